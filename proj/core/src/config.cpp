#include "vsss/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vsss/error.hpp"
#include "vsss/rng.hpp"

namespace vsss {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(std::string_view text, std::string_view origin) {
  KeyValueConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key{trim(line.substr(0, eq))};
    const std::string value{trim(line.substr(eq + 1))};
    if (!valid_key(key)) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": bad key '" + key + "'");
    }
    cfg.entries_[key] = value;
  }
  return cfg;
}

std::string KeyValueConfig::raw(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing config key: " + key);
  consumed_.insert(key);
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key) const { return raw(key); }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  return raw(key);
}

double KeyValueConfig::get_double(const std::string& key) const {
  const std::string v = raw(key);
  double out = 0.0;
  const char* begin = v.data();
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
  }
  return out;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return get_double(key);
}

std::int64_t KeyValueConfig::get_int(const std::string& key) const {
  const std::string v = raw(key);
  std::int64_t out = 0;
  const char* begin = v.data();
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
  }
  return out;
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  if (!has(key)) return fallback;
  return get_int(key);
}

bool KeyValueConfig::get_bool(const std::string& key) const {
  const std::string v = raw(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': not a bool: '" + v + "'");
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  return get_bool(key);
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ConfigError("bad config key: '" + key + "'");
  entries_[key] = value;
}

void KeyValueConfig::set_double(const std::string& key, double value) {
  set(key, format_double_shortest(value));
}

void KeyValueConfig::set_int(const std::string& key, std::int64_t value) {
  set(key, std::to_string(value));
}

void KeyValueConfig::set_bool(const std::string& key, bool value) {
  set(key, value ? "true" : "false");
}

std::vector<std::string> KeyValueConfig::keys() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [k, v] : entries_) out.push_back(k);
  return out;
}

std::vector<std::string> KeyValueConfig::keys_with_prefix(std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (k.size() >= prefix.size() && std::string_view(k).substr(0, prefix.size()) == prefix) {
      out.push_back(k);
    }
  }
  return out;
}

std::vector<std::string> KeyValueConfig::unconsumed_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (consumed_.count(k) == 0) out.push_back(k);
  }
  return out;
}

void KeyValueConfig::expect_fully_consumed() const {
  const auto leftovers = unconsumed_keys();
  if (leftovers.empty()) return;
  std::string msg = "unknown config keys:";
  for (const auto& k : leftovers) msg += " " + k;
  throw ConfigError(msg);
}

std::string KeyValueConfig::canonical_dump() const {
  std::string out;
  for (const auto& [k, v] : entries_) {  // std::map iterates in sorted order
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

std::uint64_t KeyValueConfig::hash() const { return detail::fnv1a64(canonical_dump()); }

std::string format_double_shortest(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  // Shortest decimal that round-trips to the same double. snprintf honors the
  // process locale for the decimal separator; normalize to '.' before parsing.
  auto print = [v](int prec) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    std::string s(buf);
    for (char& c : s) {
      if (c == ',') c = '.';
    }
    return s;
  };
  for (int prec = 1; prec <= 17; ++prec) {
    const std::string s = print(prec);
    double back = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), back);
    (void)ptr;
    if (ec == std::errc() && back == v) return s;
  }
  return print(17);
}

}  // namespace vsss
