#pragma once

#include <string>
#include <vector>

#include "vsss/manifest.hpp"
#include "vsss/physics.hpp"

namespace vsss {

// Binary episode recording: header (manifest, field, team sizes, dt) followed
// by one canonical world snapshot per sim step, including the reset state.
struct ReplayFile {
  RunManifest manifest;  // core fields only survive the round trip
  FieldSpec field;
  std::uint32_t blue_count = 0;
  std::uint32_t yellow_count = 0;
  double dt = 0.0;
  std::vector<WorldState> snapshots;

  std::size_t episode_steps() const {
    return snapshots.empty() ? 0 : snapshots.size() - 1;
  }
};

// Writes atomically (temp file + rename); partial output is removed on error.
void write_replay(const ReplayFile& replay, const std::string& path);
ReplayFile read_replay(const std::string& path);

}  // namespace vsss
