#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace fsbc {

namespace detail {
struct FftPlans;
}

using Complex = std::complex<double>;

/// Tensor-product discretization of the slab T^2 x [-b, 0].
///
/// Tangential directions are Fourier collocated on x_a = 2*pi*i/n.  The
/// vertical direction uses Chebyshev-Lobatto points mapped affinely to
/// [-b, 0], ordered from the top (node 0, x3 = 0) to the bottom
/// (node nz-1, x3 = -b).
///
/// Volume data is stored level-major: index (k * nx + i) * ny + j, so each
/// vertical level is one contiguous nx*ny plane.  Spectral data uses the
/// real-to-complex half spectrum, nx * (ny/2 + 1) coefficients per level,
/// normalized so that coefficient (0,0) is the mean of the level.
///
/// Grid is an immutable value; copies share the transform plans.
class Grid {
 public:
  Grid(int nx, int ny, int nz, double depth);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  double depth() const { return depth_; }

  int surface_size() const { return nx_ * ny_; }
  int volume_size() const { return nx_ * ny_ * nz_; }
  int spectral_ny() const { return ny_ / 2 + 1; }
  int spectral_size() const { return nx_ * spectral_ny(); }

  /// Signed wavenumber of spectral row i (x1) and column j (x2).
  int kx(int i) const { return i <= nx_ / 2 ? i : i - nx_; }
  int ky(int j) const { return j; }
  bool nyquist_x(int i) const { return 2 * i == nx_; }
  bool nyquist_y(int j) const { return 2 * j == ny_; }
  /// 2/3 rule: keeps |k1| <= nx/3 and |k2| <= ny/3.
  bool dealias_keep(int i, int j) const;

  double x1(int i) const;
  double x2(int j) const;
  std::span<const double> z() const { return nodes_; }
  double z(int k) const { return nodes_[k]; }

  /// Uniform trapezoid weight of one tangential node; sums to (2*pi)^2.
  double surface_weight() const;
  /// Clenshaw-Curtis weights on [-b, 0]; sum to b.
  std::span<const double> vertical_weights() const { return cc_weights_; }
  double min_vertical_spacing() const;

  /// Chebyshev collocation derivative d/dx3, row-major nz x nz.
  std::span<const double> vertical_diff() const { return diff_; }

  /// Forward real-to-complex transform of `levels` consecutive planes.
  void forward(std::span<const double> in, std::span<Complex> out, int levels) const;
  /// Inverse transform; `in` is taken by value because c2r clobbers it.
  void inverse(std::vector<Complex> in, std::span<double> out, int levels) const;

  /// Test hook: a copy whose vertical derivative matrix is scaled by
  /// (1 + relative_error).  Used by the check command's fault injection.
  Grid with_corrupted_vertical_derivative(double relative_error) const;

 private:
  int nx_;
  int ny_;
  int nz_;
  double depth_;
  std::vector<double> nodes_;
  std::vector<double> cc_weights_;
  std::vector<double> diff_;
  std::shared_ptr<const detail::FftPlans> plans_;
};

/// Validating factory: nx, ny even and >= 8, nz >= 8, depth > 0.
Grid make_grid(int nx, int ny, int nz, double depth);

}  // namespace fsbc
