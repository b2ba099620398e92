#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>

#include "vsss/config.hpp"

namespace vsss {

inline constexpr const char* kVersionString = "vsss 0.1.0";

// Provenance record embedded in every output artifact. The embedded form
// (core_json) carries no wall-clock time, so artifacts reproduce bit-for-bit
// from the same seed and config; the run's manifest.json adds start_time.
struct RunManifest {
  std::string config_hash;  // hex FNV-1a of the canonical config dump
  std::uint64_t seed = 0;
  std::string command_line;
  std::string version = kVersionString;
  std::string start_time;  // ISO 8601 UTC; excluded from core_json

  static RunManifest make(const KeyValueConfig& config, std::uint64_t seed,
                          const std::string& command_line);

  nlohmann::json core_json() const;
  nlohmann::json full_json() const;
  // Single-line form used as a '#' comment header in CSV artifacts.
  std::string comment_line() const;

  void write(const std::string& path) const;  // full_json, pretty-printed
};

std::string iso_utc_now();

}  // namespace vsss
