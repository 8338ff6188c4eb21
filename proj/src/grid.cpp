#include "fsbc/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fsbc {

namespace detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

/// Plans for one tangential shape, for a single plane and for nz planes.
struct FftPlans {
  fftw_plan r2c_one = nullptr;
  fftw_plan c2r_one = nullptr;
  fftw_plan r2c_all = nullptr;
  fftw_plan c2r_all = nullptr;
  int levels = 0;

  FftPlans(int nx, int ny, int nz) : levels(nz) {
    std::lock_guard lock(planner_mutex());
    const int n[2] = {nx, ny};
    const int plane = nx * ny;
    const int cplane = nx * (ny / 2 + 1);
    auto* rbuf = fftw_alloc_real(static_cast<std::size_t>(plane) * nz);
    auto* cbuf = fftw_alloc_complex(static_cast<std::size_t>(cplane) * nz);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    r2c_one = fftw_plan_many_dft_r2c(2, n, 1, rbuf, nullptr, 1, plane, cbuf, nullptr, 1, cplane, flags);
    c2r_one = fftw_plan_many_dft_c2r(2, n, 1, cbuf, nullptr, 1, cplane, rbuf, nullptr, 1, plane, flags);
    r2c_all = fftw_plan_many_dft_r2c(2, n, nz, rbuf, nullptr, 1, plane, cbuf, nullptr, 1, cplane, flags);
    c2r_all = fftw_plan_many_dft_c2r(2, n, nz, cbuf, nullptr, 1, cplane, rbuf, nullptr, 1, plane, flags);
    fftw_free(rbuf);
    fftw_free(cbuf);
    if (!r2c_one || !c2r_one || !r2c_all || !c2r_all) throw std::runtime_error("FFTW planning failed");
  }
  ~FftPlans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(r2c_one);
    fftw_destroy_plan(c2r_one);
    fftw_destroy_plan(r2c_all);
    fftw_destroy_plan(c2r_all);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
};

}  // namespace detail

namespace {

// Chebyshev-Lobatto nodes t_k = cos(pi k / N) on [-1, 1], N = nz - 1.
std::vector<double> lobatto(int nz) {
  const int n = nz - 1;
  std::vector<double> t(static_cast<std::size_t>(nz));
  for (int k = 0; k <= n; ++k) t[k] = std::cos(std::numbers::pi * k / n);
  // Symmetrize so that t[k] = -t[n-k] exactly.
  for (int k = 0; k <= n / 2; ++k) {
    const double s = 0.5 * (t[k] - t[n - k]);
    t[k] = s;
    t[n - k] = -s;
  }
  if (n % 2 == 0) t[n / 2] = 0.0;
  return t;
}

// Collocation derivative on the Lobatto points (Trefethen, cheb.m), with the
// diagonal set by the negative-sum trick.
std::vector<double> cheb_diff(const std::vector<double>& t) {
  const int nz = static_cast<int>(t.size());
  const int n = nz - 1;
  std::vector<double> d(static_cast<std::size_t>(nz * nz), 0.0);
  auto c = [n](int k) { return ((k == 0 || k == n) ? 2.0 : 1.0) * ((k % 2) ? -1.0 : 1.0); };
  for (int i = 0; i < nz; ++i) {
    double row = 0.0;
    for (int j = 0; j < nz; ++j) {
      if (i == j) continue;
      const double v = c(i) / c(j) / (t[i] - t[j]);
      d[i * nz + j] = v;
      row += v;
    }
    d[i * nz + i] = -row;
  }
  return d;
}

// Clenshaw-Curtis weights on [-1, 1] for the Lobatto points (Trefethen, clencurt.m).
std::vector<double> clenshaw_curtis(int nz) {
  const int n = nz - 1;
  std::vector<double> w(static_cast<std::size_t>(nz), 0.0);
  std::vector<double> theta(static_cast<std::size_t>(nz));
  for (int k = 0; k <= n; ++k) theta[k] = std::numbers::pi * k / n;
  if (n % 2 == 0) {
    w[0] = w[n] = 1.0 / (n * n - 1.0);
    for (int k = 1; k < n; ++k) {
      double v = 1.0;
      for (int m = 1; m < n / 2; ++m) v -= 2.0 * std::cos(2.0 * m * theta[k]) / (4.0 * m * m - 1.0);
      v -= std::cos(n * theta[k]) / (n * n - 1.0);
      w[k] = 2.0 * v / n;
    }
  } else {
    w[0] = w[n] = 1.0 / (static_cast<double>(n) * n);
    for (int k = 1; k < n; ++k) {
      double v = 1.0;
      for (int m = 1; m <= (n - 1) / 2; ++m) v -= 2.0 * std::cos(2.0 * m * theta[k]) / (4.0 * m * m - 1.0);
      w[k] = 2.0 * v / n;
    }
  }
  return w;
}

}  // namespace

Grid::Grid(int nx, int ny, int nz, double depth) : nx_(nx), ny_(ny), nz_(nz), depth_(depth) {
  if (nx < 8 || ny < 8 || nx % 2 || ny % 2)
    throw std::invalid_argument("grid: nx and ny must be even and >= 8 (got " + std::to_string(nx) +
                                ", " + std::to_string(ny) + ")");
  if (nz < 8) throw std::invalid_argument("grid: nz must be >= 8 (got " + std::to_string(nz) + ")");
  if (!(depth > 0.0) || !std::isfinite(depth)) throw std::invalid_argument("grid: depth b must be positive");

  const auto t = lobatto(nz);
  nodes_.resize(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) nodes_[k] = 0.5 * depth * (t[k] - 1.0);
  nodes_.front() = 0.0;
  nodes_.back() = -depth;

  diff_ = cheb_diff(t);
  for (double& d : diff_) d *= 2.0 / depth;

  cc_weights_ = clenshaw_curtis(nz);
  for (double& w : cc_weights_) w *= 0.5 * depth;

  plans_ = std::make_shared<const detail::FftPlans>(nx, ny, nz);
}

Grid make_grid(int nx, int ny, int nz, double depth) { return Grid(nx, ny, nz, depth); }

bool Grid::dealias_keep(int i, int j) const {
  return 3 * std::abs(kx(i)) <= nx_ && 3 * std::abs(ky(j)) <= ny_ && !nyquist_x(i) && !nyquist_y(j);
}

double Grid::x1(int i) const { return 2.0 * std::numbers::pi * i / nx_; }
double Grid::x2(int j) const { return 2.0 * std::numbers::pi * j / ny_; }

double Grid::surface_weight() const {
  return 4.0 * std::numbers::pi * std::numbers::pi / (static_cast<double>(nx_) * ny_);
}

double Grid::min_vertical_spacing() const {
  double m = depth_;
  for (int k = 0; k + 1 < nz_; ++k) m = std::min(m, nodes_[k] - nodes_[k + 1]);
  return m;
}

void Grid::forward(std::span<const double> in, std::span<Complex> out, int levels) const {
  const auto plane = static_cast<std::size_t>(surface_size());
  const auto cplane = static_cast<std::size_t>(spectral_size());
  if (in.size() != plane * levels || out.size() != cplane * levels)
    throw std::invalid_argument("Grid::forward: buffer size mismatch");
  if (levels != 1 && levels != nz_) throw std::invalid_argument("Grid::forward: levels must be 1 or nz");
  const fftw_plan p = levels == 1 ? plans_->r2c_one : plans_->r2c_all;
  // FFTW's r2c input is logically const; the new-array API takes non-const.
  fftw_execute_dft_r2c(p, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(plane);
  for (auto& c : out) c *= scale;
}

void Grid::inverse(std::vector<Complex> in, std::span<double> out, int levels) const {
  const auto plane = static_cast<std::size_t>(surface_size());
  const auto cplane = static_cast<std::size_t>(spectral_size());
  if (in.size() != cplane * levels || out.size() != plane * levels)
    throw std::invalid_argument("Grid::inverse: buffer size mismatch");
  if (levels != 1 && levels != nz_) throw std::invalid_argument("Grid::inverse: levels must be 1 or nz");
  const fftw_plan p = levels == 1 ? plans_->c2r_one : plans_->c2r_all;
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

Grid Grid::with_corrupted_vertical_derivative(double relative_error) const {
  Grid g = *this;
  for (double& d : g.diff_) d *= 1.0 + relative_error;
  return g;
}

}  // namespace fsbc
