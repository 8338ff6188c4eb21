#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fsbc/grid.hpp"

namespace fsbc {

/// Nodal values of a function on Gamma_top (nx x ny, row-major).
struct SurfaceField {
  int nx = 0;
  int ny = 0;
  std::vector<double> values;

  SurfaceField() = default;
  explicit SurfaceField(const Grid& g, double fill = 0.0)
      : nx(g.nx()), ny(g.ny()), values(static_cast<std::size_t>(g.surface_size()), fill) {}

  double& operator()(int i, int j) { return values[static_cast<std::size_t>(i * ny + j)]; }
  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i * ny + j)]; }
  std::size_t size() const { return values.size(); }
  bool same_shape(const SurfaceField& o) const { return nx == o.nx && ny == o.ny; }
};

/// Nodal values on the slab, level-major: (k * nx + i) * ny + j.
struct VolumeField {
  int nx = 0;
  int ny = 0;
  int nz = 0;
  std::vector<double> values;

  VolumeField() = default;
  explicit VolumeField(const Grid& g, double fill = 0.0)
      : nx(g.nx()), ny(g.ny()), nz(g.nz()), values(static_cast<std::size_t>(g.volume_size()), fill) {}

  double& operator()(int i, int j, int k) {
    return values[static_cast<std::size_t>((k * nx + i) * ny + j)];
  }
  double operator()(int i, int j, int k) const {
    return values[static_cast<std::size_t>((k * nx + i) * ny + j)];
  }
  std::size_t size() const { return values.size(); }
  bool same_shape(const VolumeField& o) const { return nx == o.nx && ny == o.ny && nz == o.nz; }
};

using VectorField = std::array<VolumeField, 3>;
using SurfaceVector = std::array<SurfaceField, 3>;

template <class F>
concept GridField = std::same_as<F, SurfaceField> || std::same_as<F, VolumeField>;

namespace detail {
template <GridField F>
void require_same_shape(const F& a, const F& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("field shape mismatch");
}
}  // namespace detail

template <GridField F>
F& operator+=(F& a, const F& b) {
  detail::require_same_shape(a, b);
  for (std::size_t n = 0; n < a.values.size(); ++n) a.values[n] += b.values[n];
  return a;
}
template <GridField F>
F& operator-=(F& a, const F& b) {
  detail::require_same_shape(a, b);
  for (std::size_t n = 0; n < a.values.size(); ++n) a.values[n] -= b.values[n];
  return a;
}
template <GridField F>
F& operator*=(F& a, const F& b) {
  detail::require_same_shape(a, b);
  for (std::size_t n = 0; n < a.values.size(); ++n) a.values[n] *= b.values[n];
  return a;
}
template <GridField F>
F& operator*=(F& a, double s) {
  for (double& x : a.values) x *= s;
  return a;
}
template <GridField F>
F& operator+=(F& a, double s) {
  for (double& x : a.values) x += s;
  return a;
}
template <GridField F>
F operator+(F a, const F& b) { return a += b; }
template <GridField F>
F operator-(F a, const F& b) { return a -= b; }
template <GridField F>
F operator*(F a, const F& b) { return a *= b; }
template <GridField F>
F operator*(F a, double s) { return a *= s; }
template <GridField F>
F operator*(double s, F a) { return a *= s; }
template <GridField F>
F operator-(F a) { return a *= -1.0; }

/// Pointwise quotient; no guard against zero denominators.
template <GridField F>
F operator/(F a, const F& b) {
  detail::require_same_shape(a, b);
  for (std::size_t n = 0; n < a.values.size(); ++n) a.values[n] /= b.values[n];
  return a;
}

/// Pointwise map.
template <GridField F, class Fn>
F map(F a, Fn fn) {
  for (double& x : a.values) x = fn(x);
  return a;
}

template <GridField F>
double max_abs(const F& f) {
  double m = 0.0;
  for (double x : f.values) m = std::max(m, std::abs(x));
  return m;
}

template <GridField F>
bool all_finite(const F& f) {
  return std::all_of(f.values.begin(), f.values.end(), [](double x) { return std::isfinite(x); });
}

inline VectorField make_vector(const Grid& g, double fill = 0.0) {
  return {VolumeField(g, fill), VolumeField(g, fill), VolumeField(g, fill)};
}

/// Trace of a volume field on Gamma_top (level 0) or Gamma_btm (level nz-1).
SurfaceField trace_top(const VolumeField& f);
SurfaceField trace_bottom(const VolumeField& f);
SurfaceField trace_level(const VolumeField& f, int k);
/// x3-independent extension of a surface field.
VolumeField extend_vertically(const Grid& g, const SurfaceField& s);
/// Field whose value depends on x3 only.
VolumeField vertical_profile(const Grid& g, std::span<const double> profile);
/// Broadcast product: f(x', x3) * s(x').
VolumeField multiply_by_surface(VolumeField f, const SurfaceField& s);
/// Broadcast product: f(x', x3) * p(x3).
VolumeField multiply_by_profile(VolumeField f, std::span<const double> p);

/// Sample an analytic function at the grid nodes.
template <class Fn>
SurfaceField sample_surface(const Grid& g, Fn fn) {
  SurfaceField s(g);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) s(i, j) = fn(g.x1(i), g.x2(j));
  return s;
}

template <class Fn>
VolumeField sample_volume(const Grid& g, Fn fn) {
  VolumeField f(g);
  for (int k = 0; k < g.nz(); ++k)
    for (int i = 0; i < g.nx(); ++i)
      for (int j = 0; j < g.ny(); ++j) f(i, j, k) = fn(g.x1(i), g.x2(j), g.z(k));
  return f;
}

}  // namespace fsbc
