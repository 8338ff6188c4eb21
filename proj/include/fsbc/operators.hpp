#pragma once

#include <array>

#include "fsbc/fields.hpp"
#include "fsbc/geometry.hpp"
#include "fsbc/grid.hpp"

namespace fsbc {

/// Tangential multi-index (alpha1, alpha2) for dbar^alpha = d1^alpha1 d2^alpha2.
struct MultiIndex {
  int a1 = 0;
  int a2 = 0;
  int order() const { return a1 + a2; }
};

/// Alinhac good unknowns for one multi-index:
/// V = dbar^alpha v - d3^phi v dbar^alpha phi, Q likewise for q.
struct GoodUnknownPair {
  VectorField V;
  VolumeField Q;
  MultiIndex alpha;
};

// All operators below throw GeometryError when geo is not invertible.

/// (d1^phi f, d2^phi f, d3^phi f), i.e. sum_j A[i][j] d_j f.
VectorField grad_phi(const Grid& g, const VolumeField& f, const GeometrySnapshot& geo);
VolumeField div_phi(const Grid& g, const VectorField& X, const GeometrySnapshot& geo);
VectorField curl_phi(const Grid& g, const VectorField& X, const GeometrySnapshot& geo);

/// div_phi(grad_phi f).  Not dealiased, so that it stays a faithful linear
/// operator for the elliptic solves.
VolumeField laplace_phi(const Grid& g, const VolumeField& f, const GeometrySnapshot& geo);

/// Spatial part of the material derivative,
/// vbar . dbar f + (v . bfN - dt_phi) / d3phi * d3 f, dealiased.
VolumeField advect(const Grid& g, const VectorField& v, const VolumeField& f, const GeometrySnapshot& geo);

/// dbar^alpha of a volume or surface field.
VolumeField dbar(const Grid& g, const VolumeField& f, MultiIndex alpha);
SurfaceField dbar(const Grid& g, const SurfaceField& f, MultiIndex alpha);

/// dbar^alpha phi = chi dbar^alpha psi for |alpha| >= 1.
VolumeField dbar_phi(const Grid& g, const GeometrySnapshot& geo, MultiIndex alpha);

/// [dbar^alpha, f] h = dbar^alpha(f h) - f dbar^alpha h, expanded by Leibniz.
VolumeField commutator(const Grid& g, MultiIndex alpha, const VolumeField& f, const VolumeField& h);
/// [dbar^alpha, f, h] = dbar^alpha(f h) - dbar^alpha f h - f dbar^alpha h, expanded by Leibniz.
VolumeField symmetric_commutator(const Grid& g, MultiIndex alpha, const VolumeField& f, const VolumeField& h);

GoodUnknownPair good_unknowns(const Grid& g, const VectorField& v, const VolumeField& q,
                              const GeometrySnapshot& geo, MultiIndex alpha);

/// Remainder R^2_i(f) of the tangential commutator identity, i in {1, 2, 3}.
VolumeField alinhac_remainder(const Grid& g, const VolumeField& f, const GeometrySnapshot& geo, MultiIndex alpha,
                              int i);

/// L2 norm of dbar^alpha d^phi_i f - d^phi_i(F) - R^2_i(f), with F the good
/// unknown of f.  Needs alpha.order() >= 1.
double alinhac_identity_residual(const Grid& g, const VolumeField& f, const GeometrySnapshot& geo,
                                 MultiIndex alpha, int i);

/// The source S of the higher-order kinematic condition on Gamma_top.
SurfaceField kinematic_source(const Grid& g, const VectorField& v, const GeometrySnapshot& geo, MultiIndex alpha);

/// Surface L2 norm of dbar^alpha(v.N) + vbar.dbar(dbar^alpha psi) - V.N - S,
/// where dbar^alpha(v.N) stands for dt dbar^alpha psi.
double higher_kinematic_residual(const Grid& g, const VectorField& v, const GeometrySnapshot& geo,
                                 MultiIndex alpha);

}  // namespace fsbc
