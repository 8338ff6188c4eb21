#include "fsbc/verification.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fsbc/diagnostics.hpp"
#include "fsbc/dynamics.hpp"
#include "fsbc/elliptic.hpp"
#include "fsbc/initial_data.hpp"
#include "fsbc/operators.hpp"
#include "fsbc/spectral.hpp"

namespace fsbc {
namespace {

using std::numbers::pi;

const MultiIndex kThird[] = {{3, 0}, {2, 1}, {1, 2}, {0, 3}};

// Observed 3.0e-12 on the evolved 16^2 x 17 state.
constexpr double kPressureVariantBound = 1e-10;

CutoffProfile cutoff_for(const Grid& g, double psi_sup) {
  return build_cutoff(g, default_delta0(g.depth()), default_delta1(g.depth()), psi_sup);
}

GeometrySnapshot lift(const Grid& g, double amp, double (*shape)(double, double)) {
  const auto psi = sample_surface(g, [&](double x, double y) { return amp * shape(x, y); });
  return lift_surface(g, psi, SurfaceField(g), cutoff_for(g, amp));
}

double flat_shape(double, double) { return 0.0; }
double cos1(double x, double) { return std::cos(x); }
double cos2(double, double y) { return std::cos(y); }
double cos1sin2(double x, double y) { return std::cos(x) * std::sin(y); }
double cos1sin22(double x, double y) { return std::cos(x) * std::sin(2 * y); }

double sup(const VectorField& v) {
  double m = 0.0;
  for (const auto& c : v) m = std::max(m, max_abs(c));
  return m;
}

SurfaceField flux_top(const VectorField& v, const GeometrySnapshot& geo) {
  return trace_top(v[0]) * geo.N[0] + trace_top(v[1]) * geo.N[1] + trace_top(v[2]);
}

/// Eulerian function u(y1, y2, y3) sampled at the image points (x', phi(x)).
template <class Fn>
VolumeField compose(const Grid& g, const GeometrySnapshot& geo, Fn u) {
  VolumeField f(g);
  for (int k = 0; k < g.nz(); ++k)
    for (int i = 0; i < g.nx(); ++i)
      for (int j = 0; j < g.ny(); ++j) f(i, j, k) = u(g.x1(i), g.x2(j), geo.phi(i, j, k));
  return f;
}

// u = sin(y1 + y2) e^{y3/2} + cos(2 y2) y3^2 / 100.
double mu(double a, double b, double c) { return std::sin(a + b) * std::exp(c / 2) + std::cos(2 * b) * c * c / 100; }
double mu_lap(double a, double b, double c) {
  return -1.75 * std::sin(a + b) * std::exp(c / 2) - 4 * std::cos(2 * b) * c * c / 100 + 2 * std::cos(2 * b) / 100;
}
double mu_d(int axis, double a, double b, double c) {
  switch (axis) {
    case 0: return std::cos(a + b) * std::exp(c / 2);
    case 1: return std::cos(a + b) * std::exp(c / 2) - 2 * std::sin(2 * b) * c * c / 100;
    default: return 0.5 * std::sin(a + b) * std::exp(c / 2) + 2 * std::cos(2 * b) * c / 100;
  }
}

VolumeField manufactured_rhs(const Grid& g, const GeometrySnapshot& geo, TopCondition top) {
  VolumeField rhs = compose(g, geo, mu_lap);
  const int last = g.nz() - 1;
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      const double a = g.x1(i), b = g.x2(j), t = geo.psi(i, j);
      rhs(i, j, 0) = top == TopCondition::dirichlet
                         ? mu(a, b, t)
                         : geo.N[0](i, j) * mu_d(0, a, b, t) + geo.N[1](i, j) * mu_d(1, a, b, t) + mu_d(2, a, b, t);
      rhs(i, j, last) = mu_d(2, a, b, -g.depth());
    }
  return rhs;
}

VectorField random_smooth(const Grid& g, unsigned seed, int kmax, int mmax) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  VectorField v = make_vector(g);
  for (int c = 0; c < 3; ++c)
    for (int k1 = -kmax; k1 <= kmax; ++k1)
      for (int k2 = -kmax; k2 <= kmax; ++k2)
        for (int m = 0; m <= mmax; ++m) {
          const double a = n01(rng) * std::exp(-0.5 * (k1 * k1 + k2 * k2)), ph = n01(rng);
          v[c] += sample_volume(g, [&](double x, double y, double z) {
            return a * std::cos(k1 * x + k2 * y + ph) * std::cos(m * pi * z / g.depth());
          });
        }
  return v;
}

VectorField smooth_vector(const Grid& g) {
  return {sample_volume(g, [](double x, double y, double z) { return std::sin(x + 2 * y) * std::exp(0.3 * z); }),
          sample_volume(g, [](double x, double y, double z) { return std::cos(x - y) * (1 + 0.1 * z * z); }),
          sample_volume(g, [](double x, double y, double z) { return std::sin(2 * x) * std::cos(y) * 0.05 * z; })};
}

// Potential flow grad Theta composed with the map,
// Theta = 0.3 cos y1 cosh(y3 + b) / cosh b + 0.2 cos(y1 + y2) cosh(sqrt2 (y3 + b)) / cosh(sqrt2 b).
VectorField potential_flow(const Grid& g, const GeometrySnapshot& geo) {
  const double b = g.depth(), r2 = std::sqrt(2.0);
  const double e1 = 0.3 / std::cosh(b), e2 = 0.2 / std::cosh(r2 * b);
  VectorField v = make_vector(g);
  for (int k = 0; k < g.nz(); ++k)
    for (int i = 0; i < g.nx(); ++i)
      for (int j = 0; j < g.ny(); ++j) {
        const double y1 = g.x1(i), y2 = g.x2(j), y3 = geo.phi(i, j, k);
        const double c1 = std::cosh(y3 + b), c2 = std::cosh(r2 * (y3 + b));
        v[0](i, j, k) = -e1 * std::sin(y1) * c1 - e2 * std::sin(y1 + y2) * c2;
        v[1](i, j, k) = -e2 * std::sin(y1 + y2) * c2;
        v[2](i, j, k) = e1 * std::cos(y1) * std::sinh(y3 + b) + e2 * r2 * std::cos(y1 + y2) * std::sinh(r2 * (y3 + b));
      }
  return v;
}

// Surface eps cos x1 cos t carried by the potential flow, with psi_t := v . N.
struct TransportCase {
  GeometrySnapshot geo;
  TransportData d;
};

TransportCase transport_case(const Grid& g, double eps, double t) {
  TransportCase m;
  m.geo = lift(g, eps * std::cos(t), cos1);
  m.d.v = potential_flow(g, m.geo);
  m.geo.psi_t = flux_top(m.d.v, m.geo);
  m.geo.dt_phi = multiply_by_profile(extend_vertically(g, m.geo.psi_t), m.geo.cutoff_chi);
  m.d.f = sample_volume(g, [](double x, double y, double z) { return std::exp(std::sin(x) + std::cos(y)) * std::cos(0.5 * z); });
  m.d.h = sample_volume(g, [](double x, double y, double z) { return std::exp(std::cos(x + y)) * (1 + 0.2 * z); });
  m.d.dt_f = sample_volume(g, [](double x, double y, double z) { return std::sin(2 * x - y) * std::exp(0.3 * z); });
  m.d.dt_h = sample_volume(g, [](double, double y, double z) { return std::exp(std::sin(y)) * z * z / 9; });
  return m;
}

std::array<double, 6> entries(const TransportResiduals& r) { return {r.a1, r.a2_1, r.a2_2, r.a2_3, r.a3, r.a4}; }

struct Ctx {
  const CheckOptions& opt;
  std::string name;
  /// Factor applied to derivatives inside a faultable check.
  double fault() const { return opt.fault.check == name ? 1.0 + opt.fault.magnitude : 1.0; }
};

CheckResult result(const Ctx& c, double residual, double bound, std::string detail = {}) {
  CheckResult r;
  r.name = c.name;
  r.residual = residual;
  r.bound = bound;
  r.passed = std::isfinite(residual) && residual <= bound;
  r.detail = std::move(detail);
  return r;
}

CheckResult at_least(const Ctx& c, double value, double bound, std::string detail = {}) {
  CheckResult r = result(c, value, bound, std::move(detail));
  r.lower_bound = true;
  r.passed = std::isfinite(value) && value >= bound;
  return r;
}

double max_alinhac(const Grid& g, const VolumeField& f, const GeometrySnapshot& geo) {
  double m = 0.0;
  for (auto a : kThird)
    for (int i = 1; i <= 3; ++i) m = std::max(m, alinhac_identity_residual(g, f, geo, a, i));
  return m;
}

double max_kinematic(const Grid& g, const VectorField& v, const GeometrySnapshot& geo) {
  double m = 0.0;
  for (auto a : kThird) m = std::max(m, higher_kinematic_residual(g, v, geo, a));
  return m;
}

// ---- full checks ----------------------------------------------------------

CheckResult cofactor_identity(const Ctx& c) {
  const Grid g(16, 16, 17, 10.0);
  return result(c, cofactor_identity_defect(lift(g, 0.1, cos1sin2)), 1e-12);
}

CheckResult pullback_gradient(const Ctx& c) {
  // u = sin y1 + y3^2, so (grad u) o Phi = (cos x1, 0, 2 phi).
  const Grid g(16, 16, 17, 10.0);
  const auto geo = lift(g, 0.1, cos2);
  const auto f = sample_volume(g, [](double x, double, double) { return std::sin(x); }) + geo.phi * geo.phi;
  auto gr = grad_phi(g, f, geo);
  gr[0] *= c.fault();
  const double e = std::max({max_abs(gr[0] - sample_volume(g, [](double x, double, double) { return std::cos(x); })),
                             max_abs(gr[1]), max_abs(gr[2] - 2.0 * geo.phi)});
  return result(c, e, 1e-8);
}

CheckResult curl_of_gradient(const Ctx& c) {
  const Grid g(32, 32, 25, 3.0);
  const auto geo = lift(g, 0.1, cos2);
  const VolumeField f = sample_volume(g, [](double x, double y, double z) { return std::sin(x + 2 * y) * std::cos(z); });
  auto gr = grad_phi(g, f, geo);
  gr[2] *= c.fault();
  return result(c, sup(curl_phi(g, gr, geo)), 1e-8);
}

CheckResult alinhac_identity(const Ctx& c) {
  const Grid g(16, 16, 17, 10.0);
  const auto geo = lift(g, 0.05, cos2);
  const auto f = sample_volume(g, [](double x, double, double z) { return std::sin(x) * std::cos(pi * z / 10); });
  return result(c, max_alinhac(g, f, geo), 1e-6, "max over |alpha| = 3, i = 1..3");
}

CheckResult higher_kinematic(const Ctx& c) {
  const Grid g(16, 16, 16, 10.0);
  return result(c, max_kinematic(g, smooth_vector(g), lift(g, 0.1, cos1sin22)), 1e-6);
}

CheckResult elliptic_manufactured(const Ctx& c, TopCondition top) {
  const Grid g(16, 16, 16, 10.0);
  const EllipticSolver s(g);
  const auto geo = lift(g, 0.1, cos1sin2);
  const auto exact = compose(g, geo, mu);
  const auto rhs = manufactured_rhs(g, geo, top);
  const auto r = top == TopCondition::dirichlet
                     ? s.solve(geo, {TopCondition::dirichlet, Gauge::none}, rhs)
                     : s.solve(geo, {TopCondition::neumann, Gauge::top_mean}, rhs, surface_mean(g, trace_top(exact)));
  std::ostringstream d;
  d << r.iterations << " GMRES iterations";
  return result(c, std::max(max_abs(r.u - exact), std::abs(r.c)), 1e-7, d.str());
}

CheckResult pressure_bottom_neumann(const Ctx& c) {
  const Grid g(16, 16, 17, 10.0);
  const EllipticSolver s(g);
  const auto geo = lift(g, 0.05, [](double x, double y) { return std::sin(x + y); });
  const auto p = solve_pressure_dirichlet(s, random_smooth(g, 7, 3, 2), geo, 1.0);
  return result(c, max_abs(trace_bottom(deriv_vertical(g, p.q))), 1e-9);
}

// Both pressure variants at a state reached by the evolution; the Neumann
// data uses the psi_tt produced by the Dirichlet solve.
CheckResult pressure_variants_evolved(const Ctx& c) {
  const Grid g(16, 16, 17, 10.0);
  const double eps = 1e-2;
  DynamicsConfig cfg;
  cfg.cutoff = cutoff_for(g, 2 * eps);
  const Stepper st(g, cfg);
  State s = single_mode_wave(g, eps, 1);
  s.psi += sample_surface(g, [&](double x, double y) { return 0.5 * eps * std::sin(x + y); });
  const double dt = cfl_dt(g, s, st.geometry(s), cfg.sigma, 0.5);
  for (int n = 0; n < 10; ++n) s = st.step(s, dt, true);
  const Tendencies k = st.evaluate(s);
  const auto pn = solve_pressure_neumann(st.solver(), s.v, k.geo, k.psi_tt, cfg.sigma);
  const double rel = max_abs(pn.q - k.q) / std::max(max_abs(k.q), 1e-300);
  return result(c, rel, kPressureVariantBound);
}

CheckResult harmonic_tangency(const Ctx& c) {
  const Grid g(16, 16, 17, 3.0);
  const EllipticSolver s(g);
  const auto geo = lift(g, 0.1, [](double x, double y) { return std::cos(x) * std::cos(y); });
  double worst = 0.0;
  for (unsigned seed : {1u, 2u, 3u}) {
    const auto v = random_smooth(g, seed, 3, 2);
    const SurfaceField vn = flux_top(v, geo);
    auto gx = grad_phi(g, harmonic_extension(s, vn, geo), geo);
    for (auto& comp : gx) comp *= c.fault();
    const SurfaceField VN = vn - flux_top(gx, geo);
    worst = std::max(worst, max_abs(VN - SurfaceField(g, surface_mean(g, vn))));
  }
  return result(c, worst, 1e-7, "sup |V.N - mean(v.N)| over 3 fields");
}

CheckResult projection(const Ctx& c, bool flux) {
  const Grid g(16, 16, 16, 3.0);
  const EllipticSolver s(g);
  const auto geo = lift(g, 0.0, flat_shape);
  const auto p = project_divergence_free(s, random_smooth(g, 11, 1, 1), geo);
  if (flux) return result(c, max_abs(trace_bottom(p.v[2])), 1e-9);
  return result(c, l2_volume(g, div_phi(g, p.v, geo)), 1e-8);
}

CheckResult transport_identities(const Ctx& c) {
  const Grid g(24, 24, 17, 3.0);
  const auto m = transport_case(g, 0.1, 0.3);
  const auto r = transport_identity_suite(g, m.d, m.geo);
  std::ostringstream d;
  d << "A1 " << r.a1 << ", A2 " << r.a2_1 << " " << r.a2_2 << " " << r.a2_3 << ", A3 " << r.a3 << ", A4 " << r.a4;
  return result(c, r.max(), 1e-7, d.str());
}

// Smallest observed order 12 -> 24 among identities not already at the
// saturation floor on the coarse grid; an identity passes when its order is at
// least 4 or its fine-grid residual sits at the floor.
CheckResult transport_refinement(const Ctx& c) {
  const Grid coarse(12, 12, 17, 3.0), fine(24, 24, 17, 3.0);
  const auto mc = transport_case(coarse, 0.1, 0.3), mf = transport_case(fine, 0.1, 0.3);
  const auto rc = entries(transport_identity_suite(coarse, mc.d, mc.geo));
  const auto rf = entries(transport_identity_suite(fine, mf.d, mf.geo));
  constexpr double floor = 1e-10;
  double order = std::numeric_limits<double>::infinity();
  int saturated = 0;
  bool ok = true;
  for (std::size_t i = 0; i < rc.size(); ++i) {
    const double o = std::log2(rc[i] / rf[i]);
    if (rf[i] <= floor) ++saturated;
    if (rc[i] > floor) order = std::min(order, o);
    ok = ok && (rf[i] <= floor || o >= 4.0);
  }
  std::ostringstream d;
  d << "min order of unsaturated identities; " << saturated << " of 6 at the 1e-10 floor on 24^2";
  CheckResult r = at_least(c, order, 4.0, d.str());
  r.passed = ok;
  return r;
}

CheckResult trace_identity(const Ctx& c) {
  const Grid g(16, 16, 17, 10.0);
  const auto geo = lift(g, 0.05, cos2);
  const EllipticSolver solver(g);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RandomFieldOptions o;
    o.seed = seed;
    const VectorField v = project_divergence_free(solver, random_solenoidal(g, geo, o), geo).v;
    const double div = l2_volume(g, div_phi(g, v, geo));
    worst = std::max(worst, trace_identity_residual(g, v, geo) / div);
  }
  return result(c, worst, 10.0, "max over 20 seeds of residual / ||div v||_0");
}

CheckResult ferrari_tangency(const Ctx& c) {
  const Grid g(16, 16, 17, 3.0);
  const auto geo = lift(g, 0.05, cos1);
  const EllipticSolver solver(g);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RandomFieldOptions o;
    o.seed = seed;
    worst = std::max(worst, ferrari_check(solver, random_solenoidal(g, geo, o), geo).VN_sup);
  }
  return result(c, worst, 1e-7, "sup |V.N| over 10 random states");
}

CheckResult ferrari_refinement(const Ctx& c) {
  double ratio[2];
  int idx = 0;
  for (int n : {16, 32}) {
    const Grid g(n, n, n + 1, 3.0);
    const auto geo = lift(g, 0.05, cos1);
    const EllipticSolver solver(g);
    VectorField A;
    A[0] = sample_volume(g, [](double, double y, double z) { return (z + 3) * (z + 3) / 9 * std::sin(y); });
    A[1] = sample_volume(g, [](double x, double, double z) { return (z + 3) / 3 * std::cos(x); });
    A[2] = sample_volume(g, [](double x, double y, double) { return 0.5 * std::cos(x + y); });
    ratio[idx++] = ferrari_check(solver, curl_phi(g, A, geo), geo).ratio;
  }
  std::ostringstream d;
  d << "ratio " << ratio[0] << " -> " << ratio[1];
  return result(c, std::abs(ratio[1] / ratio[0] - 1.0), 0.2, d.str());
}

CheckResult energy_identity(const Ctx& c) {
  const Grid g(16, 16, 17, 10.0);
  const double eps = 1e-2;
  DynamicsConfig cfg;
  cfg.cutoff = cutoff_for(g, 2 * eps);
  const Stepper st(g, cfg);
  State s = single_mode_wave(g, eps, 1);
  s.psi += sample_surface(g, [&](double x, double y) { return 0.5 * eps * std::sin(x + y); });
  const double dt = cfl_dt(g, s, st.geometry(s), cfg.sigma, 0.5);
  std::vector<DiagnosticsRecord> hist;
  double worst = 0.0;
  for (int i = 0; i <= 50; ++i) {
    hist.push_back(make_record(g, s, st.evaluate(s), hist, {cfg.sigma, true}));
    if (hist.size() >= 5) worst = std::max(worst, hist.back().energy_identity_residual);
    if (i < 50) s = st.step(s, dt, true);
  }
  return result(c, worst, 1e-4, "50 steps, small capillary wave");
}

// ---- flat checks (psi = 0): all identities reduce to exact algebra ---------

constexpr double kFlat = 1e-12;

CheckResult flat_cofactor(const Ctx& c) {
  const Grid g(16, 16, 17, 10.0);
  return result(c, cofactor_identity_defect(lift(g, 0.0, flat_shape)), kFlat);
}

CheckResult flat_gradient(const Ctx& c) {
  const Grid g(16, 16, 17, 10.0);
  const auto geo = lift(g, 0.0, flat_shape);
  const VolumeField f = sample_volume(g, [](double x, double y, double z) { return std::sin(x - y) * std::exp(0.2 * z); });
  auto gr = grad_phi(g, f, geo);
  gr[0] *= c.fault();
  const double e = std::max({max_abs(gr[0] - deriv_tangential(g, f, 1)), max_abs(gr[1] - deriv_tangential(g, f, 2)),
                             max_abs(gr[2] - deriv_vertical(g, f))});
  return result(c, e, kFlat);
}

CheckResult flat_alinhac(const Ctx& c) {
  const Grid g(16, 16, 17, 10.0);
  const auto f = sample_volume(g, [](double x, double, double z) { return std::sin(x) * std::cos(pi * z / 10); });
  return result(c, max_alinhac(g, f, lift(g, 0.0, flat_shape)), kFlat);
}

CheckResult flat_kinematic(const Ctx& c) {
  const Grid g(16, 16, 17, 10.0);
  return result(c, max_kinematic(g, smooth_vector(g), lift(g, 0.0, flat_shape)), kFlat);
}

CheckResult flat_integration_by_parts(const Ctx& c) {
  const Grid g(16, 16, 17, 3.0);
  const auto geo = lift(g, 0.0, flat_shape);
  const VolumeField f = sample_volume(g, [](double x, double y, double z) { return std::sin(x + y) * std::cos(z); });
  const VolumeField h = sample_volume(g, [](double x, double y, double z) { return std::cos(2 * x - y) * (z + 1); });
  return result(c, std::max(transport_a2(g, f, h, geo, 1), transport_a2(g, f, h, geo, 2)), kFlat);
}

using CheckFn = std::function<CheckResult(const Ctx&)>;

struct Entry {
  const char* name;
  CheckFn fn;
  bool faultable;
};

const std::vector<Entry>& full_registry() {
  static const std::vector<Entry> r = {
      {"cofactor_identity", cofactor_identity, false},
      {"pullback_gradient", pullback_gradient, true},
      {"curl_of_gradient", curl_of_gradient, true},
      {"alinhac_identity", alinhac_identity, false},
      {"higher_kinematic", higher_kinematic, false},
      {"elliptic_dirichlet_manufactured", [](const Ctx& c) { return elliptic_manufactured(c, TopCondition::dirichlet); }, false},
      {"elliptic_neumann_manufactured", [](const Ctx& c) { return elliptic_manufactured(c, TopCondition::neumann); }, false},
      {"pressure_bottom_neumann", pressure_bottom_neumann, false},
      {"pressure_variants_evolved", pressure_variants_evolved, false},
      {"harmonic_tangency", harmonic_tangency, true},
      {"projection_divergence", [](const Ctx& c) { return projection(c, false); }, false},
      {"projection_bottom_flux", [](const Ctx& c) { return projection(c, true); }, false},
      {"transport_identities", transport_identities, false},
      {"transport_refinement", transport_refinement, false},
      {"trace_identity", trace_identity, false},
      {"ferrari_tangency", ferrari_tangency, false},
      {"ferrari_refinement", ferrari_refinement, false},
      {"energy_identity", energy_identity, false},
  };
  return r;
}

const std::vector<Entry>& flat_registry() {
  static const std::vector<Entry> r = {
      {"flat_cofactor", flat_cofactor, false},
      {"flat_gradient", flat_gradient, true},
      {"flat_alinhac", flat_alinhac, false},
      {"flat_kinematic", flat_kinematic, false},
      {"flat_integration_by_parts", flat_integration_by_parts, false},
  };
  return r;
}

const Entry* find(const std::string& name) {
  for (const auto* reg : {&full_registry(), &flat_registry()})
    for (const auto& e : *reg)
      if (name == e.name) return &e;
  return nullptr;
}

void require_fault_target(const CheckOptions& opt) {
  if (opt.fault.check.empty()) return;
  const Entry* e = find(opt.fault.check);
  if (!e) throw std::invalid_argument("derivative fault: unknown check '" + opt.fault.check + "'");
  if (!e->faultable) throw std::invalid_argument("derivative fault: check '" + opt.fault.check + "' does not accept one");
}

}  // namespace

std::vector<std::string> check_names(bool flat_only) {
  std::vector<std::string> out;
  for (const auto& e : flat_only ? flat_registry() : full_registry()) out.emplace_back(e.name);
  return out;
}

std::vector<std::string> faultable_checks() {
  std::vector<std::string> out;
  for (const auto* reg : {&full_registry(), &flat_registry()})
    for (const auto& e : *reg)
      if (e.faultable) out.emplace_back(e.name);
  return out;
}

CheckResult run_check(const std::string& name, const CheckOptions& opt) {
  require_fault_target(opt);
  const Entry* e = find(name);
  if (!e) throw std::invalid_argument("unknown check '" + name + "'");
  return e->fn(Ctx{opt, name});
}

std::vector<CheckResult> run_checks(const CheckOptions& opt) {
  require_fault_target(opt);
  const auto names = check_names(opt.flat_only);
  std::vector<CheckResult> out(names.size());
  std::vector<std::exception_ptr> errors(names.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < names.size();) {
      try {
        out[i] = run_check(names[i], opt);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(opt.threads, 1, static_cast<int>(names.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      out[i].name = names[i];
      out[i].residual = std::numeric_limits<double>::quiet_NaN();
      out[i].passed = false;
      out[i].detail = std::string("threw: ") + e.what();
    }
  }
  return out;
}

}  // namespace fsbc
