#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vsss {

// Flat "key = value" configuration shared by the simulator, environment,
// trainers and CLI. Lines starting with '#' are comments. Keys are dotted
// lowercase identifiers, e.g. "sim.dt" or "dqn.gamma".
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(std::string_view text,
                                     std::string_view origin = "<string>");

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  // Typed getters throw ConfigError on missing key or malformed value.
  // Every get marks the key as consumed for unknown-key detection.
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, std::int64_t value);
  void set_bool(const std::string& key, bool value);

  std::vector<std::string> keys() const;
  std::vector<std::string> keys_with_prefix(std::string_view prefix) const;

  // Keys never touched by a getter; used to reject typos after loading.
  std::vector<std::string> unconsumed_keys() const;
  void expect_fully_consumed() const;  // throws ConfigError listing leftovers

  // Sorted "key = value" lines; the canonical form hashed into run manifests.
  std::string canonical_dump() const;
  std::uint64_t hash() const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::string raw(const std::string& key) const;  // throws on missing

  std::map<std::string, std::string> entries_;
  mutable std::set<std::string> consumed_;
};

std::string format_double_shortest(double v);  // shortest round-trip decimal

}  // namespace vsss
