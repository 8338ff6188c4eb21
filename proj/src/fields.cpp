#include "fsbc/fields.hpp"

#include <algorithm>

namespace fsbc {

SurfaceField trace_level(const VolumeField& f, int k) {
  if (k < 0 || k >= f.nz) throw std::out_of_range("trace level outside the grid");
  SurfaceField s;
  s.nx = f.nx;
  s.ny = f.ny;
  const auto plane = static_cast<std::size_t>(f.nx * f.ny);
  s.values.assign(f.values.begin() + static_cast<std::ptrdiff_t>(k * plane),
                  f.values.begin() + static_cast<std::ptrdiff_t>((k + 1) * plane));
  return s;
}

SurfaceField trace_top(const VolumeField& f) { return trace_level(f, 0); }
SurfaceField trace_bottom(const VolumeField& f) { return trace_level(f, f.nz - 1); }

VolumeField extend_vertically(const Grid& g, const SurfaceField& s) {
  VolumeField f(g);
  const auto plane = static_cast<std::size_t>(g.surface_size());
  for (int k = 0; k < g.nz(); ++k) std::copy(s.values.begin(), s.values.end(), f.values.begin() + k * plane);
  return f;
}

VolumeField vertical_profile(const Grid& g, std::span<const double> profile) {
  VolumeField f(g);
  const auto plane = static_cast<std::size_t>(g.surface_size());
  for (int k = 0; k < g.nz(); ++k)
    std::fill(f.values.begin() + k * plane, f.values.begin() + (k + 1) * plane, profile[k]);
  return f;
}

VolumeField multiply_by_surface(VolumeField f, const SurfaceField& s) {
  const auto plane = s.values.size();
  for (int k = 0; k < f.nz; ++k)
    for (std::size_t p = 0; p < plane; ++p) f.values[k * plane + p] *= s.values[p];
  return f;
}

VolumeField multiply_by_profile(VolumeField f, std::span<const double> prof) {
  const auto plane = static_cast<std::size_t>(f.nx * f.ny);
  for (int k = 0; k < f.nz; ++k)
    for (std::size_t p = 0; p < plane; ++p) f.values[k * plane + p] *= prof[k];
  return f;
}

}  // namespace fsbc
