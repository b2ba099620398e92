#include "vsss/replay_file.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "vsss/error.hpp"

namespace vsss {

namespace {

constexpr char kReplayMagic[8] = {'V', 'S', 'R', 'P', '0', '0', '0', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ofstream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IoError("replay truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw IoError("replay truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::ifstream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_replay(const ReplayFile& replay, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open replay for writing: " + path);
    out.write(kReplayMagic, sizeof(kReplayMagic));
    const std::string manifest = replay.manifest.core_json().dump();
    put_u32(out, static_cast<std::uint32_t>(manifest.size()));
    out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
    put_f64(out, replay.field.length);
    put_f64(out, replay.field.width);
    put_f64(out, replay.field.goal_width);
    put_f64(out, replay.field.goal_depth);
    put_u32(out, replay.blue_count);
    put_u32(out, replay.yellow_count);
    put_f64(out, replay.dt);
    put_u64(out, replay.snapshots.size());
    for (const WorldState& w : replay.snapshots) {
      const std::vector<std::uint8_t> blob = serialize_world(w);
      put_u32(out, static_cast<std::uint32_t>(blob.size()));
      out.write(reinterpret_cast<const char*>(blob.data()),
                static_cast<std::streamsize>(blob.size()));
    }
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("failed writing replay: " + path);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move replay into place: " + path);
  }
}

ReplayFile read_replay(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open replay: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kReplayMagic, sizeof(magic)) != 0) {
    throw IoError("not a replay file: " + path);
  }
  ReplayFile replay;
  const std::uint32_t manifest_len = get_u32(in);
  if (manifest_len > 1 << 16) throw IoError("replay manifest implausibly large");
  std::string manifest_raw(manifest_len, '\0');
  in.read(manifest_raw.data(), manifest_len);
  if (!in) throw IoError("replay truncated");
  try {
    const nlohmann::json j = nlohmann::json::parse(manifest_raw);
    replay.manifest.config_hash = j.value("config_hash", "");
    replay.manifest.seed = j.value("seed", std::uint64_t{0});
    replay.manifest.command_line = j.value("command_line", "");
    replay.manifest.version = j.value("version", "");
  } catch (const nlohmann::json::exception&) {
    throw IoError("replay manifest is not valid JSON");
  }
  replay.field.length = get_f64(in);
  replay.field.width = get_f64(in);
  replay.field.goal_width = get_f64(in);
  replay.field.goal_depth = get_f64(in);
  replay.blue_count = get_u32(in);
  replay.yellow_count = get_u32(in);
  replay.dt = get_f64(in);
  const std::uint64_t count = get_u64(in);
  if (count > 100'000'000ull) throw IoError("replay snapshot count implausible");
  replay.snapshots.reserve(count);
  std::vector<std::uint8_t> blob;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t len = get_u32(in);
    if (len > 1 << 20) throw IoError("replay snapshot implausibly large");
    blob.resize(len);
    in.read(reinterpret_cast<char*>(blob.data()), len);
    if (!in) throw IoError("replay truncated");
    replay.snapshots.push_back(deserialize_world(blob));
  }
  char extra;
  in.read(&extra, 1);
  if (!in.eof()) throw IoError("replay has trailing bytes");
  return replay;
}

}  // namespace vsss
