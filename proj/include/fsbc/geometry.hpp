#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsbc/fields.hpp"
#include "fsbc/grid.hpp"

namespace fsbc {

/// Raised when an operation needs Phi to be a diffeomorphism and the grid
/// minimum of d3(phi) is not positive.
class GeometryError : public std::runtime_error {
 public:
  explicit GeometryError(const std::string& what, double min_d3phi)
      : std::runtime_error(what), min_d3phi_(min_d3phi) {}
  double min_d3phi() const { return min_d3phi_; }

 private:
  double min_d3phi_;
};

/// Cut-off chi(x3): 1 on (-delta0, 0], 0 on [-b, -delta1], degree-7
/// smoothstep in between (C^3).
struct CutoffProfile {
  double delta0 = 0.0;
  double delta1 = 0.0;
  double depth = 0.0;
  std::vector<double> chi;    ///< nodal values
  std::vector<double> dchi;   ///< chi'
  std::vector<double> d2chi;  ///< chi''
  std::vector<double> d3chi;  ///< chi'''
  double slope_bound = 0.0;   ///< max |chi'| = 35 / (16 (delta1 - delta0))
  double d2_bound = 0.0;      ///< max |chi''|
  double d3_bound = 0.0;      ///< max |chi'''|

  /// Analytic evaluation at any x3 in [-b, 0]; derivative order 0..3.
  double evaluate(double x3, int derivative = 0) const;
};

/// Maximum slope of the degree-7 smoothstep over a band of the given width.
double smoothstep_max_slope(double width);

/// Default band: nearly the whole depth, so that the nodal cut-off is a
/// single degree-7 polynomial that collocation differentiates exactly.
double default_delta0(double depth);
double default_delta1(double depth);

/// Builds chi and enforces max|chi'| <= 1 / (psi0_sup + 1).  Throws
/// std::invalid_argument when the bound cannot be met.
CutoffProfile build_cutoff(const Grid& g, double delta0, double delta1, double psi0_sup);

/// Everything derived from the surface at one instant.
///
/// A[i][j] holds the coefficients with d^phi_i = sum_j A[i][j] d_j, and
/// A_inv[i][j] those with d_i = sum_j A_inv[i][j] d^phi_j.
struct GeometrySnapshot {
  SurfaceField psi;
  SurfaceField psi_t;
  std::array<SurfaceField, 2> dpsi;  ///< d1 psi, d2 psi
  std::array<SurfaceField, 3> d2psi; ///< d11, d12, d22 psi
  VolumeField phi;
  std::array<VolumeField, 3> dphi;  ///< d1 phi, d2 phi, d3 phi
  VolumeField dt_phi;
  std::array<std::array<VolumeField, 3>, 3> A;
  std::array<std::array<VolumeField, 3>, 3> A_inv;
  SurfaceVector N;     ///< (-d1 psi, -d2 psi, 1)
  VectorField bfN;     ///< (-d1 phi, -d2 phi, 1)
  SurfaceField norm_N; ///< sqrt(1 + |grad psi|^2)
  SurfaceField H;      ///< mean curvature -div(grad psi / |N|)
  std::vector<double> cutoff_chi;   ///< nodal chi used for the lift
  std::vector<double> cutoff_dchi;  ///< nodal chi'
  double min_d3phi = 0.0;
  double depth_margin = 0.0;  ///< b - sup|psi|
  double grad_psi_sup = 0.0;  ///< sup |grad psi|

  bool invertible() const { return min_d3phi > 0.0; }
  /// Throws GeometryError unless invertible().
  void require_invertible(const char* who) const;
  const VolumeField& d3phi() const { return dphi[2]; }
};

/// H = -div(grad psi / sqrt(1 + |grad psi|^2)); the quotient is dealiased
/// before the divergence.
SurfaceField mean_curvature(const Grid& g, const SurfaceField& psi);

/// Lifts psi to phi = x3 + chi(x3) psi(x') and builds all derived fields.
/// Logs a warning (does not throw) when min d3 phi <= 0.
GeometrySnapshot lift_surface(const Grid& g, const SurfaceField& psi, const SurfaceField& psi_t,
                              const CutoffProfile& cutoff);

/// Maximum over nodes of |A A_inv - I| (entrywise).
double cofactor_identity_defect(const GeometrySnapshot& geo);

}  // namespace fsbc
