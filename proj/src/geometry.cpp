#include "fsbc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "fsbc/spectral.hpp"

namespace fsbc {

namespace {

// s(u) = 35u^4 - 84u^5 + 70u^6 - 20u^7 and its derivatives, u in [0, 1].
double smoothstep(double u, int derivative) {
  switch (derivative) {
    case 0: return u * u * u * u * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)));
    case 1: return 140.0 * u * u * u * (1.0 - u) * (1.0 - u) * (1.0 - u);
    case 2: return u * u * (420.0 + u * (-1680.0 + u * (2100.0 - 840.0 * u)));
    case 3: return u * (840.0 + u * (-5040.0 + u * (8400.0 - 4200.0 * u)));
    default: throw std::invalid_argument("smoothstep derivative order must be 0..3");
  }
}

double sampled_max(int derivative) {
  double m = 0.0;
  constexpr int samples = 20000;
  for (int n = 0; n <= samples; ++n) m = std::max(m, std::abs(smoothstep(static_cast<double>(n) / samples, derivative)));
  return m;
}

}  // namespace

double smoothstep_max_slope(double width) { return 35.0 / (16.0 * width); }

double default_delta0(double depth) { return 1e-4 * depth; }
double default_delta1(double depth) { return (1.0 - 1e-4) * depth; }

double CutoffProfile::evaluate(double x3, int derivative) const {
  const double w = delta1 - delta0;
  const double u = (-x3 - delta0) / w;
  if (u <= 0.0) return derivative == 0 ? 1.0 : 0.0;
  if (u >= 1.0) return 0.0;
  // chi(x3) = 1 - s(u), du/dx3 = -1/w.
  const double chain = std::pow(-1.0 / w, derivative);
  return (derivative == 0 ? 1.0 : 0.0) - smoothstep(u, derivative) * chain;
}

CutoffProfile build_cutoff(const Grid& g, double delta0, double delta1, double psi0_sup) {
  const double b = g.depth();
  if (!(delta0 > 0.0 && delta0 < delta1 && delta1 < b)) {
    std::ostringstream os;
    os << "cutoff: need 0 < delta0 < delta1 < b (got delta0=" << delta0 << ", delta1=" << delta1 << ", b=" << b << ")";
    throw std::invalid_argument(os.str());
  }
  if (!(psi0_sup >= 0.0)) throw std::invalid_argument("cutoff: sup|psi0| must be nonnegative");
  const double slope = smoothstep_max_slope(delta1 - delta0);
  const double allowed = 1.0 / (psi0_sup + 1.0);
  if (slope > allowed) {
    std::ostringstream os;
    os << "cutoff: max|chi'| = " << slope << " exceeds 1/(sup|psi0|+1) = " << allowed
       << "; widen the transition band delta1 - delta0";
    throw std::invalid_argument(os.str());
  }
  CutoffProfile c;
  c.delta0 = delta0;
  c.delta1 = delta1;
  c.depth = b;
  const int nz = g.nz();
  c.chi.resize(nz);
  c.dchi.resize(nz);
  c.d2chi.resize(nz);
  c.d3chi.resize(nz);
  for (int k = 0; k < nz; ++k) {
    c.chi[k] = c.evaluate(g.z(k), 0);
    c.dchi[k] = c.evaluate(g.z(k), 1);
    c.d2chi[k] = c.evaluate(g.z(k), 2);
    c.d3chi[k] = c.evaluate(g.z(k), 3);
  }
  const double w = delta1 - delta0;
  c.slope_bound = slope;
  c.d2_bound = sampled_max(2) / (w * w);
  c.d3_bound = sampled_max(3) / (w * w * w);
  return c;
}

void GeometrySnapshot::require_invertible(const char* who) const {
  if (!invertible()) {
    std::ostringstream os;
    os << who << ": flattening map is not invertible (min d3 phi = " << min_d3phi << ")";
    throw GeometryError(os.str(), min_d3phi);
  }
}

SurfaceField mean_curvature(const Grid& g, const SurfaceField& psi) {
  const SurfaceField p1 = deriv_tangential(g, psi, 1);
  const SurfaceField p2 = deriv_tangential(g, psi, 2);
  SurfaceField inv_norm(g);
  for (std::size_t n = 0; n < inv_norm.size(); ++n)
    inv_norm.values[n] = 1.0 / std::sqrt(1.0 + p1.values[n] * p1.values[n] + p2.values[n] * p2.values[n]);
  const SurfaceField q1 = dealias(g, p1 * inv_norm);
  const SurfaceField q2 = dealias(g, p2 * inv_norm);
  return -(deriv_tangential(g, q1, 1) + deriv_tangential(g, q2, 2));
}

GeometrySnapshot lift_surface(const Grid& g, const SurfaceField& psi, const SurfaceField& psi_t,
                              const CutoffProfile& cutoff) {
  if (psi.nx != g.nx() || psi.ny != g.ny()) throw std::invalid_argument("lift_surface: psi does not match grid");
  if (static_cast<int>(cutoff.chi.size()) != g.nz()) throw std::invalid_argument("lift_surface: cutoff does not match grid");
  GeometrySnapshot s;
  s.psi = psi;
  s.psi_t = psi_t.values.empty() ? SurfaceField(g) : psi_t;
  if (!s.psi_t.same_shape(psi)) throw std::invalid_argument("lift_surface: psi_t does not match grid");

  s.dpsi = {deriv_tangential(g, psi, 1), deriv_tangential(g, psi, 2)};
  s.d2psi = {deriv_mixed(g, psi, 2, 0), deriv_mixed(g, psi, 1, 1), deriv_mixed(g, psi, 0, 2)};

  const VolumeField chi = vertical_profile(g, cutoff.chi);
  const VolumeField psi3 = extend_vertically(g, psi);
  s.phi = vertical_profile(g, g.z()) + chi * psi3;
  s.dphi[0] = multiply_by_profile(extend_vertically(g, s.dpsi[0]), cutoff.chi);
  s.dphi[1] = multiply_by_profile(extend_vertically(g, s.dpsi[1]), cutoff.chi);
  s.dphi[2] = multiply_by_profile(psi3, cutoff.dchi);
  s.dphi[2] += 1.0;
  s.dt_phi = multiply_by_profile(extend_vertically(g, s.psi_t), cutoff.chi);
  s.cutoff_chi = cutoff.chi;
  s.cutoff_dchi = cutoff.dchi;

  const VolumeField one(g, 1.0);
  const VolumeField zero(g, 0.0);
  const VolumeField inv3 = one / s.dphi[2];
  s.A = {{{one, zero, -(s.dphi[0] * inv3)}, {zero, one, -(s.dphi[1] * inv3)}, {zero, zero, inv3}}};
  s.A_inv = {{{one, zero, s.dphi[0]}, {zero, one, s.dphi[1]}, {zero, zero, s.dphi[2]}}};

  s.N = {-s.dpsi[0], -s.dpsi[1], SurfaceField(g, 1.0)};
  s.bfN = {-s.dphi[0], -s.dphi[1], one};
  s.norm_N = SurfaceField(g);
  for (std::size_t n = 0; n < psi.size(); ++n) {
    const double a = s.dpsi[0].values[n], b = s.dpsi[1].values[n];
    s.norm_N.values[n] = std::sqrt(1.0 + a * a + b * b);
  }
  s.grad_psi_sup = 0.0;
  for (double x : s.norm_N.values) s.grad_psi_sup = std::max(s.grad_psi_sup, std::sqrt(x * x - 1.0));
  s.H = mean_curvature(g, psi);

  s.min_d3phi = *std::min_element(s.dphi[2].values.begin(), s.dphi[2].values.end());
  s.depth_margin = g.depth() - max_abs(psi);
  if (!s.invertible())
    std::clog << "warning: lift_surface: min d3 phi = " << s.min_d3phi << " <= 0; Phi is not a diffeomorphism\n";
  return s;
}

double cofactor_identity_defect(const GeometrySnapshot& geo) {
  double worst = 0.0;
  const std::size_t n = geo.phi.size();
  for (std::size_t p = 0; p < n; ++p)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int m = 0; m < 3; ++m) s += geo.A[i][m].values[p] * geo.A_inv[m][j].values[p];
        worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
  return worst;
}

}  // namespace fsbc
