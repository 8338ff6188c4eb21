#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsbc/diagnostics.hpp"
#include "fsbc/dynamics.hpp"

namespace fsbc {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary snapshot, all little-endian:
///   "FSBCSNAP" (8 bytes), u32 version, i32 nx, ny, nz, f64 b, sigma, t,
///   psi (nx*ny), v1, v2, v3 (nz*nx*ny each, level-major, top level first).
inline constexpr std::uint32_t kSnapshotVersion = 1;

struct Snapshot {
  int nx = 0, ny = 0, nz = 0;
  double b = 0.0;
  double sigma = 0.0;
  State state;
};

void write_snapshot(const std::string& path, const Grid& g, double sigma, const State& s);
/// Throws SnapshotError on a bad magic, a version mismatch, truncation, or
/// (when `expect` is given) a grid or depth mismatch.
Snapshot read_snapshot(const std::string& path, const Grid* expect = nullptr);

/// Time-series CSV: one header line with the column names, then one row per
/// record, values printed with 17 significant digits.
void write_timeseries_header(std::ostream& out);
void write_timeseries_row(std::ostream& out, const DiagnosticsRecord& r);
void write_timeseries(const std::string& path, const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> read_timeseries(const std::string& path);

/// Worker count from EULER_FSBC_THREADS, else the hardware concurrency.
int worker_count();

}  // namespace fsbc
