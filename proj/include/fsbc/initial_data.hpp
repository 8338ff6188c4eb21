#pragma once

#include <cstdint>

#include "fsbc/dynamics.hpp"

namespace fsbc {

/// psi = 0, v = 0.
State flat_rest(const Grid& g);

/// psi = eps cos(k1 x1 + k2 x2), v = 0.
State single_mode_wave(const Grid& g, double eps, int k1, int k2 = 0);

struct RandomFieldOptions {
  std::uint64_t seed = 1;
  double amplitude = 1.0;  ///< max |v| after scaling
  int kmax = 2;            ///< tangential modes |k|_inf <= kmax
  int mmax = 1;            ///< vertical modes cos(m pi x3 / b), m <= mmax
  double decay = 0.5;      ///< coefficients damped by exp(-decay |k|^2)
};

/// v = curl_phi A for a random smooth potential A whose tangential
/// components vanish on Gamma_btm, so v has no bottom flux.  Divergence free
/// up to collocation error; project it for machine-level solenoidality.
VectorField random_solenoidal(const Grid& g, const GeometrySnapshot& geo, const RandomFieldOptions& opt);

/// Columnar (x3-independent) vortex v = (-d2 S, d1 S, 0) with the periodic
/// stream function S = gamma r^2 exp((cos(x1 - c1) + cos(x2 - c2) - 2) / r^2).
VectorField columnar_vortex(const Grid& g, double gamma, double radius, double c1 = 3.141592653589793,
                            double c2 = 3.141592653589793);

}  // namespace fsbc
