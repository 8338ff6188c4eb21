#include "fsbc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fsbc/operators.hpp"
#include "fsbc/spectral.hpp"

namespace fsbc {

namespace {

constexpr double kSpeedFloor = 1e-14;

State axpy(const State& s, double a, const Tendencies& k) {
  State out{s.t, s.v, s.psi};
  for (int c = 0; c < 3; ++c) out.v[c] += a * k.dt_v[c];
  out.psi += a * k.psi_t;
  return out;
}

// Lid pressure: N . grad q = -(advect v) . N on top, so that v . N stays 0.
PressureSolution lid_pressure(const EllipticSolver& s, const VectorField& v, const GeometrySnapshot& geo) {
  const Grid& g = s.grid();
  VolumeField rhs = pressure_source(g, v, geo);
  const SurfaceField top = -dealias(g, trace_top(advect(g, v, v[2], geo)));
  const int last = g.nz() - 1;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      rhs(i, j, 0) = top(i, j);
      rhs(i, j, last) = 0.0;
    }
  const LinearSolveResult r = s.solve(geo, {TopCondition::neumann, Gauge::top_mean}, rhs, 0.0);
  PressureSolution out;
  out.q = r.u;
  out.variant = PressureVariant::neumann_top;
  out.residual = r.residual;
  out.iterations = r.iterations;
  out.incompatibility = std::abs(r.c);
  return out;
}

}  // namespace

SurfaceField compute_psi_t(const Grid& g, const State& s, const GeometrySnapshot& geo) {
  return dealias(g, trace_top(s.v[0]) * geo.N[0] + trace_top(s.v[1]) * geo.N[1] + trace_top(s.v[2]));
}

VectorField compute_dt_v(const Grid& g, const State& s, const GeometrySnapshot& geo, const VolumeField& q) {
  const VectorField gq = grad_phi(g, q, geo);
  VectorField out;
  for (int c = 0; c < 3; ++c) out[c] = dealias(g, -advect(g, s.v, s.v[c], geo) - gq[c]);
  return out;
}

SurfaceField compute_psi_tt(const Grid& g, const State& s, const GeometrySnapshot& geo, const VectorField& dt_v,
                            const SurfaceField& psi_t) {
  SurfaceField out = trace_top(dt_v[0]) * geo.N[0] + trace_top(dt_v[1]) * geo.N[1] + trace_top(dt_v[2]);
  out -= trace_top(s.v[0]) * deriv_tangential(g, psi_t, 1) + trace_top(s.v[1]) * deriv_tangential(g, psi_t, 2);
  return dealias(g, out);
}

double cfl_dt(const Grid& g, const State& s, const GeometrySnapshot& geo, double sigma, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) throw std::invalid_argument("cfl_dt: safety must lie in (0, 1]");
  if (!(sigma > 0.0)) throw std::invalid_argument("cfl_dt: sigma must be positive");
  const double dx = 2.0 * std::numbers::pi / std::max(g.nx(), g.ny());
  double dz = std::numeric_limits<double>::infinity();
  for (int k = 0; k + 1 < g.nz(); ++k) dz = std::min(dz, std::abs(g.z(k) - g.z(k + 1)));
  double vmax = 0.0;
  for (const auto& c : s.v) vmax = std::max(vmax, max_abs(c));
  const VolumeField w = (s.v[0] * geo.bfN[0] + s.v[1] * geo.bfN[1] + s.v[2] - geo.dt_phi) * geo.A[2][2];
  const double cap = std::pow(dx, 1.5) / std::sqrt(sigma * std::numbers::pi);
  return safety * std::min({cap, dx / (vmax + kSpeedFloor), dz / (max_abs(w) + kSpeedFloor)});
}

void require_admissible(const Grid& g, const GeometrySnapshot& geo, double eps_geo, double t) {
  (void)g;
  if (geo.min_d3phi <= eps_geo || geo.depth_margin <= eps_geo) {
    std::ostringstream os;
    os << "geometry degenerate at t = " << t << ": min d3phi = " << geo.min_d3phi
       << ", b - sup|psi| = " << geo.depth_margin << " (eps_geo = " << eps_geo << ")";
    throw EvolutionHalt(HaltReason::geometry, t, os.str());
  }
}

Stepper::Stepper(const Grid& g, DynamicsConfig cfg) : g_(g), cfg_(std::move(cfg)), solver_(g_, cfg_.solver) {
  if (!(cfg_.sigma > 0.0)) throw std::invalid_argument("dynamics: sigma must be positive");
}

GeometrySnapshot Stepper::geometry(const State& s) const {
  GeometrySnapshot geo = lift_surface(g_, s.psi, SurfaceField(g_), cfg_.cutoff);
  if (cfg_.fixed_lid) return geo;
  geo.psi_t = compute_psi_t(g_, s, geo);
  geo.dt_phi = multiply_by_profile(extend_vertically(g_, geo.psi_t), geo.cutoff_chi);
  return geo;
}

Tendencies Stepper::evaluate(const State& s) const {
  Tendencies k;
  try {
    k.geo = geometry(s);
    require_admissible(g_, k.geo, cfg_.eps_geo, s.t);
    PressureSolution p = cfg_.fixed_lid ? lid_pressure(solver_, s.v, k.geo)
                                        : solve_pressure_dirichlet(solver_, s.v, k.geo, cfg_.sigma);
    k.q = std::move(p.q);
    k.pressure_iterations = p.iterations;
    k.dt_v = compute_dt_v(g_, s, k.geo, k.q);
    if (cfg_.fixed_lid) {
      k.psi_t = SurfaceField(g_);
      k.psi_tt = SurfaceField(g_);
    } else {
      k.psi_t = k.geo.psi_t;
      k.psi_tt = compute_psi_tt(g_, s, k.geo, k.dt_v, k.psi_t);
    }
  } catch (const GeometryError& e) {
    throw EvolutionHalt(HaltReason::geometry, s.t, e.what());
  } catch (const SolverError& e) {
    throw EvolutionHalt(HaltReason::solver, s.t, e.what());
  }
  return k;
}

State Stepper::project(const State& s, ProjectionResult* info) const {
  try {
    const GeometrySnapshot geo = geometry(s);
    require_admissible(g_, geo, cfg_.eps_geo, s.t);
    ProjectionResult r = project_divergence_free(
        solver_, s.v, geo, cfg_.fixed_lid ? ProjectionMode::fixed_lid : ProjectionMode::free_surface);
    State out{s.t, std::move(r.v), s.psi};
    if (info) {
      info->residual = r.residual;
      info->iterations = r.iterations;
    }
    return out;
  } catch (const GeometryError& e) {
    throw EvolutionHalt(HaltReason::geometry, s.t, e.what());
  } catch (const SolverError& e) {
    throw EvolutionHalt(HaltReason::solver, s.t, e.what());
  }
}

State Stepper::step(const State& s, double dt, bool project_after, StepReport* report) const {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4 step: dt must be positive");
  const Tendencies k1 = evaluate(s);
  State s2 = axpy(s, 0.5 * dt, k1);
  s2.t = s.t + 0.5 * dt;
  const Tendencies k2 = evaluate(s2);
  State s3 = axpy(s, 0.5 * dt, k2);
  s3.t = s.t + 0.5 * dt;
  const Tendencies k3 = evaluate(s3);
  State s4 = axpy(s, dt, k3);
  s4.t = s.t + dt;
  const Tendencies k4 = evaluate(s4);

  State out{s.t + dt, s.v, s.psi};
  const double w = dt / 6.0;
  for (int c = 0; c < 3; ++c) {
    auto& vc = out.v[c].values;
    for (std::size_t n = 0; n < vc.size(); ++n)
      vc[n] += w * (k1.dt_v[c].values[n] + 2.0 * k2.dt_v[c].values[n] + 2.0 * k3.dt_v[c].values[n] +
                    k4.dt_v[c].values[n]);
  }
  if (!cfg_.fixed_lid) {
    auto& p = out.psi.values;
    for (std::size_t n = 0; n < p.size(); ++n)
      p[n] += w * (k1.psi_t.values[n] + 2.0 * k2.psi_t.values[n] + 2.0 * k3.psi_t.values[n] + k4.psi_t.values[n]);
  }
  if (project_after) out = project(out);

  if (report) {
    report->dt = dt;
    report->pressure_iterations =
        k1.pressure_iterations + k2.pressure_iterations + k3.pressure_iterations + k4.pressure_iterations;
    report->projected = project_after;
    try {
      const GeometrySnapshot geo = geometry(out);
      report->divergence = l2_volume(g_, div_phi(g_, out.v, geo));
      const SurfaceField flux = trace_bottom(out.v[2]) - trace_bottom(geo.dphi[0]) * trace_bottom(out.v[0]) -
                                trace_bottom(geo.dphi[1]) * trace_bottom(out.v[1]);
      report->bottom_flux = l2_surface(g_, flux);
    } catch (const GeometryError& e) {
      throw EvolutionHalt(HaltReason::geometry, out.t, e.what());
    }
  }
  return out;
}

}  // namespace fsbc
