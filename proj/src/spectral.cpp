#include "fsbc/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fsbc {

namespace {

int levels_of(const SurfaceField&) { return 1; }
int levels_of(const VolumeField& f) { return f.nz; }

template <GridField F>
std::vector<Complex> to_spectral(const Grid& g, const F& f) {
  const int levels = levels_of(f);
  std::vector<Complex> c(static_cast<std::size_t>(g.spectral_size()) * levels);
  g.forward(f.values, c, levels);
  return c;
}

template <GridField F>
void from_spectral(const Grid& g, std::vector<Complex> c, F& f) {
  g.inverse(std::move(c), f.values, levels_of(f));
}

template <GridField F, class Mult>
F apply_multiplier(const Grid& g, const F& f, Mult mult) {
  auto c = to_spectral(g, f);
  const int cny = g.spectral_ny();
  const int levels = levels_of(f);
  const std::size_t cplane = static_cast<std::size_t>(g.spectral_size());
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < cny; ++j) {
      const Complex m = mult(i, j);
      for (int k = 0; k < levels; ++k) c[k * cplane + static_cast<std::size_t>(i * cny + j)] *= m;
    }
  F out = f;
  from_spectral(g, std::move(c), out);
  return out;
}

Complex ipow(double k, int order) {
  // (i k)^order
  static const Complex unit[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return unit[order % 4] * std::pow(k, order);
}

Complex mixed_multiplier(const Grid& g, int i, int j, int a1, int a2) {
  if ((a1 % 2 == 1 && g.nyquist_x(i)) || (a2 % 2 == 1 && g.nyquist_y(j))) return 0.0;
  const double k1 = g.nyquist_x(i) ? g.nx() / 2.0 : g.kx(i);
  const double k2 = g.ky(j);
  return ipow(k1, a1) * ipow(k2, a2);
}

template <GridField F>
F mixed_impl(const Grid& g, const F& f, int a1, int a2) {
  if (a1 < 0 || a2 < 0) throw std::invalid_argument("derivative order must be nonnegative");
  if (a1 == 0 && a2 == 0) return f;
  return apply_multiplier(g, f, [&](int i, int j) { return mixed_multiplier(g, i, j, a1, a2); });
}

template <GridField F>
F tangential_impl(const Grid& g, const F& f, int axis, int order) {
  if (axis != 1 && axis != 2) throw std::invalid_argument("tangential axis must be 1 or 2");
  if (order < 1) throw std::invalid_argument("derivative order must be >= 1");
  return axis == 1 ? mixed_impl(g, f, order, 0) : mixed_impl(g, f, 0, order);
}

template <GridField F>
F dealias_impl(const Grid& g, const F& f) {
  return apply_multiplier(g, f, [&](int i, int j) { return g.dealias_keep(i, j) ? 1.0 : 0.0; });
}

template <GridField F>
F drop_nyquist_impl(const Grid& g, const F& f) {
  return apply_multiplier(g, f, [&](int i, int j) { return (g.nyquist_x(i) || g.nyquist_y(j)) ? 0.0 : 1.0; });
}

template <GridField F>
void check_grid(const Grid& g, const F& f) {
  if (f.nx != g.nx() || f.ny != g.ny()) throw std::invalid_argument("field does not match grid");
  if constexpr (std::same_as<F, VolumeField>) {
    if (f.nz != g.nz()) throw std::invalid_argument("field does not match grid");
  }
}

// Power of the unitary coefficient at each spectral index, accounting for the
// half spectrum: columns 0 < j < ny/2 stand for two conjugate modes.
template <class Fn>
double spectral_sum(const Grid& g, const std::vector<Complex>& c, Fn weight) {
  const int cny = g.spectral_ny();
  const double area = 4.0 * std::numbers::pi * std::numbers::pi;
  double sum = 0.0;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < cny; ++j) {
      const double mult = (j == 0 || g.nyquist_y(j)) ? 1.0 : 2.0;
      const double k1 = g.nyquist_x(i) ? g.nx() / 2.0 : g.kx(i);
      const double k2 = g.ky(j);
      sum += mult * weight(k1 * k1 + k2 * k2) * std::norm(c[static_cast<std::size_t>(i * cny + j)]);
    }
  return area * sum;
}

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

SurfaceField deriv_tangential(const Grid& g, const SurfaceField& f, int axis, int order) {
  check_grid(g, f);
  return tangential_impl(g, f, axis, order);
}
VolumeField deriv_tangential(const Grid& g, const VolumeField& f, int axis, int order) {
  check_grid(g, f);
  return tangential_impl(g, f, axis, order);
}
SurfaceField deriv_mixed(const Grid& g, const SurfaceField& f, int a1, int a2) {
  check_grid(g, f);
  return mixed_impl(g, f, a1, a2);
}
VolumeField deriv_mixed(const Grid& g, const VolumeField& f, int a1, int a2) {
  check_grid(g, f);
  return mixed_impl(g, f, a1, a2);
}

VolumeField deriv_vertical(const Grid& g, const VolumeField& f, int order) {
  check_grid(g, f);
  if (order < 0) throw std::invalid_argument("derivative order must be nonnegative");
  const int nz = g.nz();
  const std::size_t plane = static_cast<std::size_t>(g.surface_size());
  const auto d = g.vertical_diff();
  VolumeField cur = f;
  for (int o = 0; o < order; ++o) {
    VolumeField out(g);
    // Differences against the own level, so constants differentiate to exactly 0.
    for (int k = 0; k < nz; ++k) {
      double* dst = out.values.data() + k * plane;
      const double* own = cur.values.data() + k * plane;
      for (int m = 0; m < nz; ++m) {
        if (m == k) continue;
        const double w = d[static_cast<std::size_t>(k * nz + m)];
        const double* src = cur.values.data() + m * plane;
        for (std::size_t p = 0; p < plane; ++p) dst[p] += w * (src[p] - own[p]);
      }
    }
    cur = std::move(out);
  }
  return cur;
}

SurfaceField dealias(const Grid& g, const SurfaceField& f) {
  check_grid(g, f);
  return dealias_impl(g, f);
}
VolumeField dealias(const Grid& g, const VolumeField& f) {
  check_grid(g, f);
  return dealias_impl(g, f);
}
VectorField dealias(const Grid& g, const VectorField& f) {
  return {dealias(g, f[0]), dealias(g, f[1]), dealias(g, f[2])};
}

SurfaceField drop_nyquist(const Grid& g, const SurfaceField& f) {
  check_grid(g, f);
  return drop_nyquist_impl(g, f);
}
VolumeField drop_nyquist(const Grid& g, const VolumeField& f) {
  check_grid(g, f);
  return drop_nyquist_impl(g, f);
}

double integrate_surface(const Grid& g, const SurfaceField& f) {
  check_grid(g, f);
  double s = 0.0;
  for (double x : f.values) s += x;
  return s * g.surface_weight();
}

double integrate_volume(const Grid& g, const VolumeField& f) {
  check_grid(g, f);
  const auto w = g.vertical_weights();
  const std::size_t plane = static_cast<std::size_t>(g.surface_size());
  double total = 0.0;
  for (int k = 0; k < g.nz(); ++k) {
    double s = 0.0;
    const double* p = f.values.data() + k * plane;
    for (std::size_t n = 0; n < plane; ++n) s += p[n];
    total += w[k] * s;
  }
  return total * g.surface_weight();
}

double surface_mean(const Grid& g, const SurfaceField& f) {
  return integrate_surface(g, f) / (4.0 * std::numbers::pi * std::numbers::pi);
}

double l2_surface(const Grid& g, const SurfaceField& f) { return std::sqrt(integrate_surface(g, f * f)); }

double l2_volume(const Grid& g, const VolumeField& f) { return std::sqrt(integrate_volume(g, f * f)); }

double l2_volume(const Grid& g, const VectorField& f) {
  double s = 0.0;
  for (const auto& c : f) s += integrate_volume(g, c * c);
  return std::sqrt(s);
}

double boundary_sobolev_norm(const Grid& g, const SurfaceField& f, double s) {
  check_grid(g, f);
  if (!(s >= 0.0 && s <= 6.0)) throw std::invalid_argument("boundary Sobolev index must lie in [0, 6]");
  const auto c = to_spectral(g, f);
  return std::sqrt(spectral_sum(g, c, [s](double k2) { return std::pow(1.0 + k2, s); }));
}

double interior_sobolev_norm(const Grid& g, const VolumeField& f, int s) {
  check_grid(g, f);
  if (s < 0 || s > 3) throw std::invalid_argument("interior Sobolev index must be an integer in [0, 3]");
  double total = 0.0;
  VolumeField dz = f;
  for (int g3 = 0; g3 <= s; ++g3) {
    if (g3 > 0) dz = deriv_vertical(g, dz);
    for (int g1 = 0; g1 + g3 <= s; ++g1)
      for (int g2 = 0; g1 + g2 + g3 <= s; ++g2) {
        const VolumeField d = deriv_mixed(g, dz, g1, g2);
        total += integrate_volume(g, d * d);
      }
  }
  return std::sqrt(total);
}

double interior_sobolev_norm(const Grid& g, const VectorField& f, int s) {
  double total = 0.0;
  for (const auto& c : f) {
    const double n = interior_sobolev_norm(g, c, s);
    total += n * n;
  }
  return std::sqrt(total);
}

SupNorms holder_and_sup_norms(const Grid& g, const SurfaceField& f, int k) {
  check_grid(g, f);
  if (k < 0 || k > 3) throw std::invalid_argument("C^k order must lie in [0, 3]");
  SupNorms out;
  out.sup = sup_abs(f.values);
  for (int order = 0; order <= k; ++order)
    for (int a1 = 0; a1 <= order; ++a1) out.ck += sup_abs(deriv_mixed(g, f, a1, order - a1).values);
  out.w1inf = out.sup + sup_abs(deriv_mixed(g, f, 1, 0).values) + sup_abs(deriv_mixed(g, f, 0, 1).values);
  return out;
}

SupNorms holder_and_sup_norms(const Grid& g, const VolumeField& f, int k) {
  check_grid(g, f);
  if (k < 0 || k > 3) throw std::invalid_argument("C^k order must lie in [0, 3]");
  SupNorms out;
  out.sup = sup_abs(f.values);
  VolumeField dz = f;
  for (int g3 = 0; g3 <= k; ++g3) {
    if (g3 > 0) dz = deriv_vertical(g, dz);
    for (int g1 = 0; g1 + g3 <= k; ++g1)
      for (int g2 = 0; g1 + g2 + g3 <= k; ++g2) out.ck += sup_abs(deriv_mixed(g, dz, g1, g2).values);
  }
  out.w1inf = out.sup + sup_abs(deriv_mixed(g, f, 1, 0).values) + sup_abs(deriv_mixed(g, f, 0, 1).values) +
              sup_abs(deriv_vertical(g, f).values);
  return out;
}

}  // namespace fsbc
