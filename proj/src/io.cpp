#include "fsbc/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace fsbc {
namespace {

constexpr char kMagic[8] = {'F', 'S', 'B', 'C', 'S', 'N', 'A', 'P'};

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
    return v;
  }
}

template <class T>
void put(std::ostream& out, T v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::istream& in, const std::string& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw SnapshotError(path + ": truncated snapshot");
  return to_little(v);
}

void put_array(std::ostream& out, const std::vector<double>& a) {
  for (double x : a) put(out, x);
}

void take_array(std::istream& in, std::vector<double>& a, const std::string& path) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
    if (!in) throw SnapshotError(path + ": truncated snapshot");
  } else {
    for (double& x : a) x = take<double>(in, path);
  }
}

}  // namespace

void write_snapshot(const std::string& path, const Grid& g, double sigma, const State& s) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError("cannot open " + path + " for writing");
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::int32_t>(out, g.nx());
  put<std::int32_t>(out, g.ny());
  put<std::int32_t>(out, g.nz());
  put(out, g.depth());
  put(out, sigma);
  put(out, s.t);
  put_array(out, s.psi.values);
  for (const auto& c : s.v) put_array(out, c.values);
  if (!out) throw SnapshotError("write failed: " + path);
}

Snapshot read_snapshot(const std::string& path, const Grid* expect) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw SnapshotError(path + ": not a snapshot file");
  const auto version = take<std::uint32_t>(in, path);
  if (version != kSnapshotVersion)
    throw SnapshotError(path + ": snapshot version " + std::to_string(version) + ", expected " +
                        std::to_string(kSnapshotVersion));
  Snapshot s;
  s.nx = take<std::int32_t>(in, path);
  s.ny = take<std::int32_t>(in, path);
  s.nz = take<std::int32_t>(in, path);
  s.b = take<double>(in, path);
  s.sigma = take<double>(in, path);
  if (s.nx < 1 || s.ny < 1 || s.nz < 2 || !(s.b > 0.0) ||
      static_cast<long long>(s.nx) * s.ny * s.nz > (1LL << 30))
    throw SnapshotError(path + ": corrupt header");
  if (expect && (expect->nx() != s.nx || expect->ny() != s.ny || expect->nz() != s.nz))
    throw SnapshotError(path + ": grid " + std::to_string(s.nx) + "x" + std::to_string(s.ny) + "x" +
                        std::to_string(s.nz) + " does not match the configured " + std::to_string(expect->nx()) +
                        "x" + std::to_string(expect->ny()) + "x" + std::to_string(expect->nz()));
  if (expect && expect->depth() != s.b) throw SnapshotError(path + ": depth does not match the configured b");
  std::optional<Grid> g;
  try {
    g.emplace(s.nx, s.ny, s.nz, s.b);
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(path + ": " + e.what());
  }
  s.state.t = take<double>(in, path);
  s.state.psi = SurfaceField(*g);
  take_array(in, s.state.psi.values, path);
  for (auto& c : s.state.v) {
    c = VolumeField(*g);
    take_array(in, c.values, path);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw SnapshotError(path + ": trailing bytes");
  return s;
}

void write_timeseries_header(std::ostream& out) {
  const auto& h = timeseries_header();
  for (int c = 0; c < kTimeseriesColumns; ++c) out << (c ? "," : "") << h[static_cast<std::size_t>(c)];
  out << '\n';
}

void write_timeseries_row(std::ostream& out, const DiagnosticsRecord& r) {
  const auto row = timeseries_row(r);
  std::ostringstream line;
  line << std::setprecision(17);
  for (int c = 0; c < kTimeseriesColumns; ++c) line << (c ? "," : "") << row[static_cast<std::size_t>(c)];
  out << line.str() << '\n';
}

void write_timeseries(const std::string& path, const std::vector<DiagnosticsRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_timeseries_header(out);
  for (const auto& r : records) write_timeseries_row(out, r);
}

std::vector<DiagnosticsRecord> read_timeseries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);
  std::ostringstream expected;
  write_timeseries_header(expected);
  if (line + "\n" != expected.str()) throw std::runtime_error(path + ": unexpected header");
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, kTimeseriesColumns> v{};
    std::stringstream ss(line);
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= kTimeseriesColumns) throw std::runtime_error(path + ": too many columns");
      char* end = nullptr;
      v[static_cast<std::size_t>(c++)] = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw std::runtime_error(path + ": bad number '" + cell + "'");
    }
    if (c != kTimeseriesColumns) throw std::runtime_error(path + ": short row");
    DiagnosticsRecord r;
    r.t = v[0];
    r.E = v[1];
    r.psi_c3 = v[2];
    r.psi_t_c3 = v[3];
    r.psi_tt_h15 = v[4];
    r.vbar_sup = v[5];
    r.vbar_w1inf_integral = v[6];
    r.psi_t_c2 = v[7];
    r.psi_t_h3 = v[8];
    r.vort_sup = v[9];
    r.bkm_integral = v[10];
    r.min_d3phi = v[11];
    r.depth_margin = v[12];
    r.grad_psi_sup = v[13];
    r.div_norm = v[14];
    r.energy_identity_residual = v[15];
    out.push_back(r);
  }
  return out;
}

int worker_count() {
  if (const char* env = std::getenv("EULER_FSBC_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace fsbc
