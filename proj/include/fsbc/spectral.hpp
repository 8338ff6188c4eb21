#pragma once

#include "fsbc/fields.hpp"
#include "fsbc/grid.hpp"

namespace fsbc {

/// Spectral tangential derivative d^order/dx_axis^order, axis in {1, 2}.
/// Odd orders zero the Nyquist mode of the differentiated direction.
SurfaceField deriv_tangential(const Grid& g, const SurfaceField& f, int axis, int order = 1);
VolumeField deriv_tangential(const Grid& g, const VolumeField& f, int axis, int order = 1);

/// Mixed tangential derivative d1^a1 d2^a2 in one transform pair.
SurfaceField deriv_mixed(const Grid& g, const SurfaceField& f, int a1, int a2);
VolumeField deriv_mixed(const Grid& g, const VolumeField& f, int a1, int a2);

/// Chebyshev collocation d/dx3.
VolumeField deriv_vertical(const Grid& g, const VolumeField& f, int order = 1);

/// 2/3-rule filter on the tangential modes.
SurfaceField dealias(const Grid& g, const SurfaceField& f);
VolumeField dealias(const Grid& g, const VolumeField& f);
VectorField dealias(const Grid& g, const VectorField& f);

/// Removes the tangential Nyquist modes.
SurfaceField drop_nyquist(const Grid& g, const SurfaceField& f);
VolumeField drop_nyquist(const Grid& g, const VolumeField& f);

double integrate_surface(const Grid& g, const SurfaceField& f);
double integrate_volume(const Grid& g, const VolumeField& f);
double surface_mean(const Grid& g, const SurfaceField& f);
double l2_surface(const Grid& g, const SurfaceField& f);
double l2_volume(const Grid& g, const VolumeField& f);
double l2_volume(const Grid& g, const VectorField& f);

/// |f|_s = (sum_k (1 + |k|^2)^s |f_k|^2)^{1/2}, with coefficients scaled so
/// that the s = 0 value is the L2 norm over the torus.  s in [0, 6].
double boundary_sobolev_norm(const Grid& g, const SurfaceField& f, double s);

/// ||f||_s = (sum_{|gamma| <= s} ||d^gamma f||_0^2)^{1/2}, s in {0..3}.
double interior_sobolev_norm(const Grid& g, const VolumeField& f, int s);
double interior_sobolev_norm(const Grid& g, const VectorField& f, int s);

/// Discrete sup-based norms.  `ck` is sum_{|beta| <= k} sup |d^beta f| over
/// the grid nodes; it stands in for the C^k (and C^{k,gamma}) norms.
struct SupNorms {
  double ck = 0.0;       ///< C^k proxy
  double sup = 0.0;      ///< L-infinity
  double w1inf = 0.0;    ///< sup|f| + sum_i sup|d_i f|
};
SupNorms holder_and_sup_norms(const Grid& g, const SurfaceField& f, int k);
SupNorms holder_and_sup_norms(const Grid& g, const VolumeField& f, int k);

}  // namespace fsbc
