#include "kslog/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "kslog/error.hpp"

namespace kslog {

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    KSLOG_REQUIRE(out.good(), ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    KSLOG_REQUIRE(out.good(), ErrorCode::Io, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  KSLOG_REQUIRE(in.good(), ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

void put_u64(std::string& buf, std::uint64_t x) {
  for (int k = 0; k < 8; ++k) buf.push_back(static_cast<char>((x >> (8 * k)) & 0xffu));
}

void put_f64(std::string& buf, double x) { put_u64(buf, std::bit_cast<std::uint64_t>(x)); }

std::uint64_t get_u64(const std::string& buf, std::size_t pos) {
  std::uint64_t x = 0;
  for (int k = 0; k < 8; ++k) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + k])) << (8 * k);
  return x;
}

double get_f64(const std::string& buf, std::size_t pos) { return std::bit_cast<double>(get_u64(buf, pos)); }

}  // namespace

void encode_snapshot(const StateSnapshot& s, std::string& buffer) {
  require_same_grid(s.u, s.v);
  buffer.append(kSnapshotMagic, sizeof kSnapshotMagic);
  put_u64(buffer, s.u.grid()->hash());
  put_f64(buffer, s.t);
  put_u64(buffer, s.u.size());
  for (double x : s.u.values()) put_f64(buffer, x);
  for (double x : s.v.values()) put_f64(buffer, x);
}

std::vector<StateSnapshot> decode_snapshots(const std::string& bytes, const GridPtr& grid) {
  std::vector<StateSnapshot> out;
  std::size_t pos = 0;
  const std::uint64_t hash = grid->hash();
  while (pos < bytes.size()) {
    KSLOG_REQUIRE(bytes.size() - pos >= 32, ErrorCode::Io, "truncated snapshot header");
    KSLOG_REQUIRE(std::memcmp(bytes.data() + pos, kSnapshotMagic, 8) == 0, ErrorCode::Io, "bad snapshot magic");
    KSLOG_REQUIRE(get_u64(bytes, pos + 8) == hash, ErrorCode::Io, "snapshot grid hash does not match the grid");
    const double t = get_f64(bytes, pos + 16);
    const std::uint64_t n = get_u64(bytes, pos + 24);
    KSLOG_REQUIRE(n == grid->size(), ErrorCode::Io, "snapshot cell count does not match the grid");
    pos += 32;
    KSLOG_REQUIRE(bytes.size() - pos >= 16 * n, ErrorCode::Io, "truncated snapshot payload");
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = get_f64(bytes, pos + 8 * i);
    pos += 8 * n;
    for (std::size_t i = 0; i < n; ++i) v[i] = get_f64(bytes, pos + 8 * i);
    pos += 8 * n;
    StateSnapshot s;
    s.t = t;
    s.u = Field(grid, std::move(u));
    s.v = Field(grid, std::move(v));
    s.step_index = static_cast<std::int64_t>(out.size());
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace kslog
