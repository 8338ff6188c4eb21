#pragma once

#include <stdexcept>
#include <string>

#include "fsbc/elliptic.hpp"
#include "fsbc/fields.hpp"
#include "fsbc/geometry.hpp"
#include "fsbc/grid.hpp"

namespace fsbc {

struct State {
  double t = 0.0;
  VectorField v;
  SurfaceField psi;
};

struct StepReport {
  double dt = 0.0;
  int pressure_iterations = 0;  ///< summed over the four stages
  double divergence = 0.0;      ///< ||div_phi v||_0 after the step
  double bottom_flux = 0.0;     ///< surface L2 of v . n on Gamma_btm after the step
  bool projected = false;
};

/// Why an evolution stopped early.
enum class HaltReason {
  geometry,  ///< min d3 phi or b - sup|psi| at or below eps_geo
  solver,    ///< pressure solve did not converge
};

class EvolutionHalt : public std::runtime_error {
 public:
  EvolutionHalt(HaltReason reason, double t, const std::string& what)
      : std::runtime_error(what), reason_(reason), t_(t) {}
  HaltReason reason() const { return reason_; }
  double time() const { return t_; }

 private:
  HaltReason reason_;
  double t_;
};

struct DynamicsConfig {
  double sigma = 1.0;
  CutoffProfile cutoff;
  double eps_geo = 1e-3;
  /// Rigid lid at x3 = 0: psi stays 0, v . N = 0 on top, Neumann pressure.
  bool fixed_lid = false;
  SolverOptions solver;
};

/// Everything the right-hand side produces at one state.
struct Tendencies {
  GeometrySnapshot geo;
  VolumeField q;
  VectorField dt_v;
  SurfaceField psi_t;
  SurfaceField psi_tt;
  int pressure_iterations = 0;
};

/// v . N on Gamma_top, dealiased.
SurfaceField compute_psi_t(const Grid& g, const State& s, const GeometrySnapshot& geo);

/// -vbar.dbar v - (v.bfN - dt_phi)/d3phi d3 v - grad_phi q, dealiased.
VectorField compute_dt_v(const Grid& g, const State& s, const GeometrySnapshot& geo, const VolumeField& q);

/// (dt v).N - vbar.dbar psi_t on Gamma_top, dealiased.
SurfaceField compute_psi_tt(const Grid& g, const State& s, const GeometrySnapshot& geo, const VectorField& dt_v,
                            const SurfaceField& psi_t);

/// safety * min(dx^{3/2} / sqrt(sigma pi), dx / (|v|_inf + eps), dz_min / (w_inf + eps)),
/// w the vertical transport speed (v.bfN - dt_phi) / d3phi.
double cfl_dt(const Grid& g, const State& s, const GeometrySnapshot& geo, double sigma, double safety);

/// Checks a state against the halt thresholds; throws EvolutionHalt.
void require_admissible(const Grid& g, const GeometrySnapshot& geo, double eps_geo, double t);

class Stepper {
 public:
  Stepper(const Grid& g, DynamicsConfig cfg);

  const Grid& grid() const { return g_; }
  const DynamicsConfig& config() const { return cfg_; }
  const EllipticSolver& solver() const { return solver_; }

  /// Geometry of a state, with dt_phi built from the state's own v . N.
  GeometrySnapshot geometry(const State& s) const;

  /// Full right-hand side at a state: geometry, pressure, dt v, psi_t, psi_tt.
  Tendencies evaluate(const State& s) const;

  /// One classical RK4 step; when `project` is set the divergence projection
  /// is applied to the result.
  State step(const State& s, double dt, bool project, StepReport* report = nullptr) const;

  /// Projection of v at the geometry of s (free-surface or lid mode).
  State project(const State& s, ProjectionResult* info = nullptr) const;

 private:
  Grid g_;
  DynamicsConfig cfg_;
  EllipticSolver solver_;
};

}  // namespace fsbc
