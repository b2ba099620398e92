#include "vsss/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

#include "vsss/error.hpp"

namespace vsss {

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

RunManifest RunManifest::make(const KeyValueConfig& config, std::uint64_t seed,
                              const std::string& command_line) {
  RunManifest m;
  char hex[24];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(config.hash()));
  m.config_hash = hex;
  m.seed = seed;
  m.command_line = command_line;
  m.start_time = iso_utc_now();
  return m;
}

nlohmann::json RunManifest::core_json() const {
  return {{"config_hash", config_hash},
          {"seed", seed},
          {"command_line", command_line},
          {"version", version}};
}

nlohmann::json RunManifest::full_json() const {
  nlohmann::json j = core_json();
  j["start_time"] = start_time;
  return j;
}

std::string RunManifest::comment_line() const { return "manifest " + core_json().dump(); }

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << full_json().dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest: " + path);
}

}  // namespace vsss
