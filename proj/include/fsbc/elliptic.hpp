#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include "fsbc/fields.hpp"
#include "fsbc/geometry.hpp"
#include "fsbc/grid.hpp"

namespace fsbc {

/// Raised when the Krylov iteration hits its cap; carries the last relative residual.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

struct SolverOptions {
  double tol = 1e-10;   ///< relative residual
  int max_iters = 500;
  int restart = 50;
};

/// Row imposed at Gamma_top.
enum class TopCondition {
  dirichlet,  ///< u = data
  neumann,    ///< N . grad_phi u = data
  equation,   ///< the interior equation is collocated at the top node as well
};

/// Additive-constant fixing for problems whose flat k = 0 block is singular.
/// A scalar unknown c is added to every top row and the functional is pinned.
enum class Gauge { none, top_mean, volume_mean };

struct BoundaryProblem {
  TopCondition top = TopCondition::dirichlet;
  Gauge gauge = Gauge::none;
};

struct LinearSolveResult {
  VolumeField u;
  double c = 0.0;         ///< bordered unknown; measures data incompatibility
  double residual = 0.0;  ///< relative Euclidean residual of the collocated system
  int iterations = 0;
};

/// Collocated variable-coefficient problem: laplace_phi u = rhs at interior
/// nodes, the chosen top row at level 0, bottom row N.grad_phi u = rhs at
/// level nz-1.  Solved by right-preconditioned restarted GMRES, the
/// preconditioner being the exact flat (psi = 0) operator, inverted mode by
/// mode.  Tangential Nyquist modes are excluded from the discrete space.
///
/// The factor tables are built once and shared read-only, so solve() may be
/// called concurrently.
class EllipticSolver {
 public:
  explicit EllipticSolver(const Grid& g, SolverOptions opt = {});

  const Grid& grid() const { return g_; }
  const SolverOptions& options() const { return opt_; }

  /// `rhs` carries top data at level 0, interior sources in between and
  /// bottom data at level nz-1.
  LinearSolveResult solve(const GeometrySnapshot& geo, const BoundaryProblem& p, const VolumeField& rhs,
                          double gauge_value = 0.0) const;

  /// Applies the collocated rows (with c added to the top row).
  VolumeField apply(const GeometrySnapshot& geo, const BoundaryProblem& p, const VolumeField& u,
                    double c = 0.0) const;

  /// Gauge functional: mean of the top trace, or the volume mean.
  double gauge_functional(Gauge gauge, const VolumeField& u) const;

  struct FlatFactors;

 private:
  Grid g_;
  SolverOptions opt_;
  std::shared_ptr<const FlatFactors> flat_;
};

enum class PressureVariant { dirichlet_top, neumann_top };

struct PressureSolution {
  VolumeField q;
  PressureVariant variant = PressureVariant::dirichlet_top;
  double residual = 0.0;
  int iterations = 0;
  double incompatibility = 0.0;  ///< Neumann variant only
};

/// -(d^phi v)^T : (d^phi v), dealiased; the right side of laplace_phi q.
VolumeField pressure_source(const Grid& g, const VectorField& v, const GeometrySnapshot& geo);

/// laplace_phi q = pressure_source, q = sigma H on top, d3 q = 0 at the bottom.
PressureSolution solve_pressure_dirichlet(const EllipticSolver& s, const VectorField& v,
                                          const GeometrySnapshot& geo, double sigma);

/// Top data of the Neumann variant:
/// -(vbar.dbar v).N - psi_tt - (vbar.dbar)(v.N).
SurfaceField pressure_neumann_data(const Grid& g, const VectorField& v, const GeometrySnapshot& geo,
                                   const SurfaceField& psi_tt);

/// Same interior equation with N.grad_phi q given on top; the constant is
/// fixed so that the top mean of q - sigma H vanishes.
PressureSolution solve_pressure_neumann(const EllipticSolver& s, const VectorField& v, const GeometrySnapshot& geo,
                                        const SurfaceField& psi_tt, double sigma);

/// laplace_phi xi = 0, N.grad_phi xi = beta - mean(beta) on top, no flux at
/// the bottom, volume mean zero.
VolumeField harmonic_extension(const EllipticSolver& s, const SurfaceField& beta, const GeometrySnapshot& geo);

enum class ProjectionMode {
  free_surface,  ///< lambda = 0 on top
  fixed_lid,     ///< v'.N = 0 imposed on top
};

struct ProjectionResult {
  VectorField v;
  double residual = 0.0;
  int iterations = 0;
};

/// v' = v - grad_phi lambda with div_phi v' = 0 at interior nodes and v'.n = 0
/// at the bottom.
ProjectionResult project_divergence_free(const EllipticSolver& s, const VectorField& v, const GeometrySnapshot& geo,
                                         ProjectionMode mode = ProjectionMode::free_surface);

}  // namespace fsbc
