#include "fsbc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fsbc/spectral.hpp"

namespace fsbc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

MultiIndex unit_below(MultiIndex a) { return a.a1 > 0 ? MultiIndex{1, 0} : MultiIndex{0, 1}; }
MultiIndex minus(MultiIndex a, MultiIndex b) { return {a.a1 - b.a1, a.a2 - b.a2}; }

VolumeField chi_prime_psi_t(const Grid& g, const GeometrySnapshot& geo) {
  return multiply_by_profile(extend_vertically(g, geo.psi_t), geo.cutoff_dchi);
}

// (v . bfN - dt_phi) / d3phi
VolumeField vertical_speed(const VectorField& v, const GeometrySnapshot& geo) {
  return (v[0] * geo.bfN[0] + v[1] * geo.bfN[1] + v[2] - geo.dt_phi) * geo.A[2][2];
}

// Spatial part of D_t^phi without the dealiasing filter used by the stepper.
VolumeField transport(const Grid& g, const VectorField& v, const VolumeField& f, const GeometrySnapshot& geo) {
  return v[0] * deriv_tangential(g, f, 1) + v[1] * deriv_tangential(g, f, 2) +
         vertical_speed(v, geo) * deriv_vertical(g, f);
}

double pointwise_norm_sup(const VectorField& X) {
  double m = 0.0;
  for (std::size_t n = 0; n < X[0].size(); ++n)
    m = std::max(m, std::sqrt(X[0].values[n] * X[0].values[n] + X[1].values[n] * X[1].values[n] +
                              X[2].values[n] * X[2].values[n]));
  return m;
}

double sq(double x) { return x * x; }

// Weights w_j with sum_j w_j f(t_j) = f'(at) for the interpolating polynomial.
std::vector<double> derivative_weights(std::span<const double> ts, double at) {
  const std::size_t n = ts.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t m = 0; m < n; ++m) {
      if (m == j) continue;
      double term = 1.0 / (ts[j] - ts[m]);
      for (std::size_t l = 0; l < n; ++l)
        if (l != j && l != m) term *= (at - ts[l]) / (ts[j] - ts[l]);
      w[j] += term;
    }
  return w;
}

bool grows_monotonically(std::span<const double> y, double factor) {
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] < y[i - 1]) return false;
  return y.front() > 0.0 && y.back() >= factor * y.front();
}

// Least-squares slope of y against x; 0 when x has no spread.
double ls_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double scale = std::max(1.0, std::abs(mx));
  if (sxx <= 1e-24 * scale * scale * n) return 0.0;
  return sxy / sxx;
}

double require_middle(std::span<const State> states, std::span<const Tendencies> rhs, const char* who) {
  if (states.size() < 3 || rhs.size() != states.size())
    throw std::invalid_argument(std::string(who) + ": needs at least three snapshots with matching right-hand sides");
  const std::size_t m = states.size() / 2;
  for (std::size_t i = 1; i < states.size(); ++i)
    if (!(states[i].t > states[i - 1].t)) throw std::invalid_argument(std::string(who) + ": times must increase");
  return states[m].t;
}

VectorField time_derivative(std::span<const double> ts, double at, const std::vector<VectorField>& values) {
  const std::vector<double> w = derivative_weights(ts, at);
  VectorField out = values[0];
  for (int c = 0; c < 3; ++c) {
    out[c] *= w[0];
    for (std::size_t j = 1; j < values.size(); ++j) out[c] += values[j][c] * w[j];
  }
  return out;
}

void require_tangential_flow(const Grid& g, const VectorField& v, const GeometrySnapshot& geo, double tol,
                             const char* who) {
  const double div = l2_volume(g, div_phi(g, v, geo));
  const SurfaceField kin = trace_top(v[0]) * geo.N[0] + trace_top(v[1]) * geo.N[1] + trace_top(v[2]) - geo.psi_t;
  const SurfaceField flux = trace_bottom(v[2]) - trace_bottom(geo.dphi[0]) * trace_bottom(v[0]) -
                            trace_bottom(geo.dphi[1]) * trace_bottom(v[1]);
  if (div > tol) throw std::invalid_argument(std::string(who) + ": v is not divergence free");
  if (max_abs(kin) > tol) throw std::invalid_argument(std::string(who) + ": psi_t differs from v.N on top");
  if (max_abs(flux) > tol) throw std::invalid_argument(std::string(who) + ": v has flux through the bottom");
}

}  // namespace

VectorField vorticity(const Grid& g, const VectorField& v, const GeometrySnapshot& geo) {
  return curl_phi(g, v, geo);
}

const std::array<std::string, kTimeseriesColumns>& timeseries_header() {
  static const std::array<std::string, kTimeseriesColumns> h = {
      "t",        "E",         "psi_C3",       "psi_t_C3",   "psi_tt_H1.5", "vbar_sup",
      "vbar_W1inf_integral",   "psi_t_C2",     "psi_t_H3",   "vort_sup",    "bkm_integral",
      "min_d3phi", "depth_margin", "grad_psi_sup", "div_norm", "energy_identity_residual"};
  return h;
}

std::array<double, kTimeseriesColumns> timeseries_row(const DiagnosticsRecord& r) {
  return {r.t,        r.E,         r.psi_c3,       r.psi_t_c3,  r.psi_tt_h15, r.vbar_sup,
          r.vbar_w1inf_integral,   r.psi_t_c2,     r.psi_t_h3,  r.vort_sup,   r.bkm_integral,
          r.min_d3phi, r.depth_margin, r.grad_psi_sup, r.div_norm, r.energy_identity_residual};
}

DiagnosticsRecord make_record(const Grid& g, const State& s, const Tendencies& k,
                              std::span<const DiagnosticsRecord> history, const RecordOptions& opt) {
  const GeometrySnapshot& geo = k.geo;
  DiagnosticsRecord r;
  r.t = s.t;
  r.E = sq(interior_sobolev_norm(g, s.v, 3)) + opt.sigma * sq(boundary_sobolev_norm(g, s.psi, 4.0));
  r.psi_c3 = holder_and_sup_norms(g, s.psi, 3).ck;
  r.psi_t_c3 = holder_and_sup_norms(g, k.psi_t, 3).ck;
  r.psi_t_c2 = holder_and_sup_norms(g, k.psi_t, 2).ck;
  r.psi_t_h3 = boundary_sobolev_norm(g, k.psi_t, 3.0);
  r.psi_tt_h15 = boundary_sobolev_norm(g, k.psi_tt, 1.5);

  const SurfaceField v1 = trace_top(s.v[0]), v2 = trace_top(s.v[1]);
  for (std::size_t n = 0; n < v1.size(); ++n)
    r.vbar_sup = std::max(r.vbar_sup, std::hypot(v1.values[n], v2.values[n]));
  for (int a = 1; a <= 2; ++a) {
    const SurfaceField d1 = deriv_tangential(g, v1, a), d2 = deriv_tangential(g, v2, a);
    double m = 0.0;
    for (std::size_t n = 0; n < d1.size(); ++n) m = std::max(m, std::hypot(d1.values[n], d2.values[n]));
    r.vbar_w1inf += m;
  }

  r.vort_sup = pointwise_norm_sup(vorticity(g, s.v, geo));
  r.min_d3phi = geo.min_d3phi;
  r.depth_margin = geo.depth_margin;
  r.grad_psi_sup = geo.grad_psi_sup;
  r.div_norm = l2_volume(g, div_phi(g, s.v, geo));

  double kinetic = 0.0;
  {
    VolumeField e = s.v[0] * s.v[0] + s.v[1] * s.v[1] + s.v[2] * s.v[2];
    kinetic = integrate_volume(g, e * geo.d3phi());
  }
  const SurfaceField grad2 = geo.dpsi[0] * geo.dpsi[0] + geo.dpsi[1] * geo.dpsi[1];
  const SurfaceField inv_n = map(geo.norm_N, [](double x) { return 1.0 / x; });
  r.energy_bracket = kinetic + opt.sigma * integrate_surface(g, grad2 * inv_n);
  const SurfaceField dpsi_dpsit =
      geo.dpsi[0] * deriv_tangential(g, k.psi_t, 1) + geo.dpsi[1] * deriv_tangential(g, k.psi_t, 2);
  const SurfaceField dt_inv_n = -(dpsi_dpsit * inv_n * inv_n * inv_n);
  r.energy_exchange = opt.sigma * integrate_surface(g, dt_inv_n * grad2);

  if (!history.empty()) {
    const DiagnosticsRecord& p = history.back();
    const double dt = r.t - p.t;
    r.bkm_integral = p.bkm_integral + 0.5 * dt * (p.vort_sup + r.vort_sup);
    if (opt.k2_accumulator) r.vbar_w1inf_integral = p.vbar_w1inf_integral + 0.5 * dt * (p.vbar_w1inf + r.vbar_w1inf);
  }

  std::vector<DiagnosticsRecord> tail;
  const std::size_t take = std::min<std::size_t>(4, history.size());
  tail.assign(history.end() - static_cast<std::ptrdiff_t>(take), history.end());
  tail.push_back(r);
  r.energy_identity_residual = energy_identity_residual(tail);
  return r;
}

double energy_identity_residual(std::span<const DiagnosticsRecord> records) {
  if (records.size() < 5) return kNaN;
  const auto last = records.subspan(records.size() - 5);
  std::array<double, 5> ts{};
  double scale = 0.0;
  for (std::size_t j = 0; j < 5; ++j) {
    ts[j] = last[j].t;
    scale = std::max(scale, std::abs(last[j].energy_bracket));
  }
  const std::vector<double> w = derivative_weights(ts, ts[4]);
  double dI = 0.0;
  for (std::size_t j = 0; j < 5; ++j) dI += w[j] * last[j].energy_bracket;
  const double defect = std::abs(dI - last[4].energy_exchange);
  if (defect == 0.0) return 0.0;
  return defect / std::max(scale, std::numeric_limits<double>::min());
}

BreakdownReport classify_breakdown(std::span<const DiagnosticsRecord> history, const BreakdownThresholds& th) {
  if (history.size() < 3) throw std::invalid_argument("classify_breakdown: needs at least three records");
  if (th.window < 3) throw std::invalid_argument("classify_breakdown: window must be at least 3");
  if (!(th.min_growth >= 1.0)) throw std::invalid_argument("classify_breakdown: min_growth must be >= 1");
  if (!(th.trend_floor >= 0.0)) throw std::invalid_argument("classify_breakdown: trend_floor must be >= 0");
  BreakdownReport rep;
  rep.thresholds = th;

  // Running integral of K1 over the whole history.
  std::vector<double> k1(history.size()), k1_int(history.size(), 0.0);
  for (std::size_t i = 0; i < history.size(); ++i) {
    k1[i] = history[i].K1();
    if (i > 0) k1_int[i] = k1_int[i - 1] + 0.5 * (history[i].t - history[i - 1].t) * (k1[i] + k1[i - 1]);
  }
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(th.window), history.size());
  const std::size_t first = history.size() - w;
  const auto log_pos = [](double x) { return std::log(std::max(x, std::numeric_limits<double>::min())); };

  {
    std::vector<double> x, y;
    for (std::size_t i = first; i < history.size(); ++i) {
      x.push_back(k1_int[i]);
      y.push_back(log_pos(k1[i]));
    }
    rep.cond_a.trend_slope = ls_slope(x, y);
    rep.cond_a.quantity = "K1";
    const bool trend = k1.back() >= th.trend_floor && rep.cond_a.trend_slope >= th.k1_slope &&
                       grows_monotonically(std::span(k1).subspan(first), th.min_growth);
    rep.cond_a.triggered = k1.back() >= th.k1_max || trend;
  }
  {
    std::vector<double> x, y, w;
    for (std::size_t i = first; i < history.size(); ++i) {
      x.push_back(history[i].bkm_integral);
      y.push_back(log_pos(history[i].vort_sup));
      w.push_back(history[i].vort_sup);
    }
    rep.cond_b_prime.trend_slope = ls_slope(x, y);
    rep.cond_b_prime.quantity = "bkm_integral";
    const bool trend = w.back() >= th.trend_floor && rep.cond_b_prime.trend_slope >= th.bkm_slope &&
                       grows_monotonically(w, th.min_growth);
    rep.cond_b_prime.triggered = history.back().bkm_integral >= th.bkm_max || trend;
  }
  {
    std::vector<double> x, y;
    for (std::size_t i = first; i < history.size(); ++i) {
      x.push_back(history[i].t);
      y.push_back(log_pos(std::min(history[i].min_d3phi, history[i].depth_margin)));
    }
    rep.cond_c.trend_slope = ls_slope(x, y);
    rep.cond_c.quantity = "none";
    for (const DiagnosticsRecord& r : history) {
      if (r.min_d3phi <= th.eps_geo) rep.cond_c.quantity = "min_d3phi";
      else if (r.depth_margin <= th.eps_geo) rep.cond_c.quantity = "depth_margin";
      else if (r.grad_psi_sup >= th.turning_threshold) rep.cond_c.quantity = "grad_psi_sup";
      else continue;
      rep.cond_c.triggered = true;
      break;
    }
  }
  return rep;
}

FerrariRecord ferrari_check(const EllipticSolver& s, const VectorField& v, const GeometrySnapshot& geo) {
  const Grid& g = s.grid();
  const SurfaceField vn = trace_top(v[0]) * geo.N[0] + trace_top(v[1]) * geo.N[1] + trace_top(v[2]);
  SurfaceField beta = vn;
  beta += -surface_mean(g, vn);
  const VolumeField xi = harmonic_extension(s, beta, geo);
  const VectorField gx = grad_phi(g, xi, geo);
  VectorField V;
  for (int c = 0; c < 3; ++c) V[c] = v[c] - gx[c];

  FerrariRecord r;
  std::array<VectorField, 3> dV;  // dV[c][i] = d^phi_i V_c
  for (int c = 0; c < 3; ++c) dV[c] = grad_phi(g, V[c], geo);
  double dsup = 0.0;
  for (std::size_t n = 0; n < V[0].size(); ++n) {
    double f2 = 0.0;
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < 3; ++i) f2 += sq(dV[c][i].values[n]);
    dsup = std::max(dsup, std::sqrt(f2));
  }
  r.lhs = pointwise_norm_sup(V) + dsup;

  const VectorField w = vorticity(g, v, geo);
  const double h2 = interior_sobolev_norm(g, w, 2);
  r.rhs = (1.0 + std::max(0.0, std::log(h2 > 0.0 ? h2 : 1.0))) * pointwise_norm_sup(w) + 1.0;
  r.ratio = r.lhs / r.rhs;
  r.VN_sup = max_abs(trace_top(V[0]) * geo.N[0] + trace_top(V[1]) * geo.N[1] + trace_top(V[2]));
  return r;
}

HodgeRecord hodge_check(const Grid& g, const VectorField& X, const GeometrySnapshot& geo, HodgeVariant variant) {
  geo.require_invertible("hodge_check");
  const bool interior = variant == HodgeVariant::interior;
  const int s = interior ? 3 : 2;
  if (!interior) {
    const SurfaceField flux = trace_bottom(X[2]) - trace_bottom(geo.dphi[0]) * trace_bottom(X[0]) -
                              trace_bottom(geo.dphi[1]) * trace_bottom(X[1]);
    double xs = 0.0;
    for (const auto& c : X) xs = std::max(xs, max_abs(c));
    if (max_abs(flux) > 1e-8 * std::max(1.0, xs))
      throw std::invalid_argument("hodge_check: boundary variant needs X.n = 0 on the bottom");
  }
  HodgeRecord r;
  r.lhs = sq(interior_sobolev_norm(g, X, s));
  r.rhs = sq(interior_sobolev_norm(g, div_phi(g, X, geo), s - 1)) +
          sq(interior_sobolev_norm(g, curl_phi(g, X, geo), s - 1)) + sq(l2_volume(g, X));
  if (interior) {
    VectorField sum = make_vector(g);
    for (int a1 = 0; a1 <= s; ++a1)
      for (int c = 0; c < 3; ++c) sum[c] += dbar(g, X[c], {a1, s - a1});
    r.rhs += sq(l2_volume(g, sum));
  } else {
    const SurfaceField xn = trace_top(X[0]) * geo.N[0] + trace_top(X[1]) * geo.N[1] + trace_top(X[2]);
    r.rhs += sq(boundary_sobolev_norm(g, xn, s - 0.5));
  }
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
  return r;
}

double transport_a1(const Grid& g, const VolumeField& f, const VolumeField& h, const VolumeField& dt_f,
                    const VolumeField& dt_h, const GeometrySnapshot& geo) {
  geo.require_invertible("transport_a1");
  const VolumeField& j = geo.d3phi();
  const double lhs = integrate_volume(g, (dt_f * h + f * dt_h) * j) + integrate_volume(g, f * h * chi_prime_psi_t(g, geo));
  const VolumeField shift = geo.dt_phi * geo.A[2][2];
  const VolumeField dtphi_f = dt_f - shift * deriv_vertical(g, f);
  const VolumeField dtphi_h = dt_h - shift * deriv_vertical(g, h);
  const double rhs = integrate_volume(g, (dtphi_f * h + f * dtphi_h) * j) +
                     integrate_surface(g, trace_top(f) * trace_top(h) * geo.psi_t);
  return std::abs(lhs - rhs);
}

double transport_a2(const Grid& g, const VolumeField& f, const VolumeField& h, const GeometrySnapshot& geo, int i) {
  if (i != 1 && i != 2) throw std::invalid_argument("transport_a2: i must be 1 or 2");
  geo.require_invertible("transport_a2");
  const VolumeField& j = geo.d3phi();
  const double lhs = integrate_volume(g, grad_phi(g, f, geo)[i - 1] * h * j);
  const double rhs = -integrate_volume(g, f * grad_phi(g, h, geo)[i - 1] * j) +
                     integrate_surface(g, trace_top(f) * trace_top(h) * geo.N[i - 1]);
  return std::abs(lhs - rhs);
}

double transport_a2_1(const Grid& g, const VolumeField& f, const VolumeField& h, const GeometrySnapshot& geo) {
  geo.require_invertible("transport_a2_1");
  if (max_abs(trace_bottom(h)) > 1e-12 * std::max(1.0, max_abs(h)))
    throw std::invalid_argument("transport_a2_1: h must vanish on the bottom");
  const VolumeField& j = geo.d3phi();
  const double lhs = integrate_volume(g, grad_phi(g, f, geo)[2] * h * j);
  const double rhs =
      -integrate_volume(g, f * grad_phi(g, h, geo)[2] * j) + integrate_surface(g, trace_top(f) * trace_top(h));
  return std::abs(lhs - rhs);
}

double transport_a3(const Grid& g, const VolumeField& f, const VolumeField& dt_f, const VectorField& v,
                    const GeometrySnapshot& geo, double tol) {
  geo.require_invertible("transport_a3");
  require_tangential_flow(g, v, geo, tol, "transport_a3");
  const VolumeField& j = geo.d3phi();
  const double lhs = integrate_volume(g, f * dt_f * j) + 0.5 * integrate_volume(g, f * f * chi_prime_psi_t(g, geo));
  const double rhs = integrate_volume(g, (dt_f + transport(g, v, f, geo)) * f * j);
  return std::abs(lhs - rhs);
}

double transport_a4(const Grid& g, const VolumeField& f, const VolumeField& h, const VolumeField& dt_f,
                    const VolumeField& dt_h, const VectorField& v, const GeometrySnapshot& geo, double tol) {
  geo.require_invertible("transport_a4");
  require_tangential_flow(g, v, geo, tol, "transport_a4");
  const VolumeField& j = geo.d3phi();
  const double lhs = integrate_volume(g, (dt_f * h + f * dt_h) * j) + integrate_volume(g, f * h * chi_prime_psi_t(g, geo));
  const VolumeField Df = dt_f + transport(g, v, f, geo);
  const VolumeField Dh = dt_h + transport(g, v, h, geo);
  const double rhs = integrate_volume(g, (Df * h + f * Dh) * j);
  return std::abs(lhs - rhs);
}

double TransportResiduals::max() const { return std::max({a1, a2_1, a2_2, a2_3, a3, a4}); }

TransportResiduals transport_identity_suite(const Grid& g, const TransportData& d, const GeometrySnapshot& geo,
                                            double tol) {
  TransportResiduals r;
  r.a1 = transport_a1(g, d.f, d.h, d.dt_f, d.dt_h, geo);
  r.a2_1 = transport_a2(g, d.f, d.h, geo, 1);
  r.a2_2 = transport_a2(g, d.f, d.h, geo, 2);
  // The i = 3 identity needs a second factor vanishing on the bottom.
  std::vector<double> ramp(static_cast<std::size_t>(g.nz()));
  for (int k = 0; k < g.nz(); ++k) ramp[static_cast<std::size_t>(k)] = (g.z(k) + g.depth()) / g.depth();
  r.a2_3 = transport_a2_1(g, d.f, multiply_by_profile(d.h, ramp), geo);
  r.a3 = transport_a3(g, d.f, d.dt_f, d.v, geo, tol);
  r.a4 = transport_a4(g, d.f, d.h, d.dt_f, d.dt_h, d.v, geo, tol);
  return r;
}

double trace_identity_residual(const Grid& g, const VectorField& v, const GeometrySnapshot& geo) {
  SurfaceField r = deriv_tangential(g, trace_top(v[0]), 1) + deriv_tangential(g, trace_top(v[1]), 2);
  for (int c = 0; c < 3; ++c) r += trace_top(deriv_vertical(g, v[c])) * geo.N[c];
  return l2_surface(g, r);
}

VolumeField transport_remainder(const Grid& g, const VolumeField& f, const VectorField& v,
                                const GeometrySnapshot& geo, MultiIndex alpha, const VolumeField& dt_d3phi_f) {
  if (alpha.order() < 1) throw std::invalid_argument("transport_remainder: |alpha| must be >= 1");
  geo.require_invertible("transport_remainder");
  const VolumeField& inv = geo.A[2][2];
  const VolumeField d3f = deriv_vertical(g, f);
  const VolumeField W = v[0] * geo.bfN[0] + v[1] * geo.bfN[1] + v[2] - geo.dt_phi;

  VolumeField r = dt_d3phi_f * dbar_phi(g, geo, alpha);
  r += commutator(g, alpha, v[0], deriv_tangential(g, f, 1));
  r += commutator(g, alpha, v[1], deriv_tangential(g, f, 2));
  VolumeField vn(g);
  for (int c = 0; c < 3; ++c) vn += commutator(g, alpha, v[c], geo.bfN[c]);
  r += inv * d3f * vn;
  r += symmetric_commutator(g, alpha, W * inv, d3f);
  r += symmetric_commutator(g, alpha, W, inv) * d3f;
  const MultiIndex unit = unit_below(alpha);
  const VolumeField d3phi_unit = multiply_by_profile(extend_vertically(g, dbar(g, geo.psi, unit)), geo.cutoff_dchi);
  r -= W * d3f * commutator(g, minus(alpha, unit), inv * inv, d3phi_unit);
  return r;
}

double good_unknown_evolution_residual(const Grid& g, std::span<const State> states,
                                       std::span<const Tendencies> rhs, MultiIndex alpha) {
  const double t0 = require_middle(states, rhs, "good_unknown_evolution_residual");
  if (alpha.order() != 3) throw std::invalid_argument("good_unknown_evolution_residual: |alpha| must be 3");
  const std::size_t m = states.size() / 2;
  std::vector<double> ts;
  std::vector<VectorField> Vs;
  std::vector<VectorField> d3v;
  for (std::size_t i = 0; i < states.size(); ++i) {
    ts.push_back(states[i].t);
    Vs.push_back(good_unknowns(g, states[i].v, rhs[i].q, rhs[i].geo, alpha).V);
    VectorField h;
    for (int c = 0; c < 3; ++c) h[c] = deriv_vertical(g, states[i].v[c]) * rhs[i].geo.A[2][2];
    d3v.push_back(std::move(h));
  }
  const State& s = states[m];
  const GeometrySnapshot& geo = rhs[m].geo;
  const GoodUnknownPair gu = good_unknowns(g, s.v, rhs[m].q, geo, alpha);
  const VectorField dtV = time_derivative(ts, t0, Vs);
  const VectorField dt_d3v = time_derivative(ts, t0, d3v);
  const VectorField gQ = grad_phi(g, gu.Q, geo);

  VectorField res;
  for (int c = 0; c < 3; ++c) {
    const VolumeField Dt_d3v = dt_d3v[c] + transport(g, s.v, d3v[m][c], geo);
    res[c] = dtV[c] + transport(g, s.v, gu.V[c], geo) + gQ[c];
    res[c] += transport_remainder(g, s.v[c], s.v, geo, alpha, Dt_d3v);
    res[c] += alinhac_remainder(g, rhs[m].q, geo, alpha, c + 1);
  }
  return l2_volume(g, res);
}

double vorticity_transport_residual(const Grid& g, std::span<const State> states, std::span<const Tendencies> rhs) {
  const double t0 = require_middle(states, rhs, "vorticity_transport_residual");
  const std::size_t m = states.size() / 2;
  std::vector<double> ts;
  std::vector<VectorField> ws;
  for (std::size_t i = 0; i < states.size(); ++i) {
    ts.push_back(states[i].t);
    ws.push_back(vorticity(g, states[i].v, rhs[i].geo));
  }
  const State& s = states[m];
  const GeometrySnapshot& geo = rhs[m].geo;
  const VectorField dtw = time_derivative(ts, t0, ws);
  VectorField res;
  for (int c = 0; c < 3; ++c) {
    const VectorField gv = grad_phi(g, s.v[c], geo);
    res[c] = dtw[c] + transport(g, s.v, ws[m][c], geo);
    for (int j = 0; j < 3; ++j) res[c] -= ws[m][j] * gv[j];
  }
  return l2_volume(g, res);
}

}  // namespace fsbc
