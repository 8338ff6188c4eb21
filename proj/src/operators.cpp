#include "fsbc/operators.hpp"

#include <stdexcept>

#include "fsbc/spectral.hpp"

namespace fsbc {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int m = 1; m <= k; ++m) r = r * (n - k + m) / m;
  return r;
}

// A unit multi-index alpha' <= alpha.
MultiIndex unit_below(MultiIndex alpha) { return alpha.a1 > 0 ? MultiIndex{1, 0} : MultiIndex{0, 1}; }

MultiIndex minus(MultiIndex a, MultiIndex b) { return {a.a1 - b.a1, a.a2 - b.a2}; }

// sum over 0 <= beta <= alpha of C(alpha, beta) dbar^beta f dbar^(alpha-beta) h,
// restricted by the predicate on |beta|.
template <class Keep>
VolumeField leibniz(const Grid& g, MultiIndex alpha, const VolumeField& f, const VolumeField& h, Keep keep) {
  VolumeField out(g);
  for (int b1 = 0; b1 <= alpha.a1; ++b1)
    for (int b2 = 0; b2 <= alpha.a2; ++b2) {
      if (!keep(b1 + b2)) continue;
      const double c = binomial(alpha.a1, b1) * binomial(alpha.a2, b2);
      out += c * (dbar(g, f, {b1, b2}) * dbar(g, h, {alpha.a1 - b1, alpha.a2 - b2}));
    }
  return out;
}

}  // namespace

VolumeField dbar_phi(const Grid& g, const GeometrySnapshot& geo, MultiIndex alpha) {
  if (alpha.order() == 0) return geo.phi;
  return multiply_by_profile(extend_vertically(g, dbar(g, geo.psi, alpha)), geo.cutoff_chi);
}

VectorField grad_phi(const Grid& g, const VolumeField& f, const GeometrySnapshot& geo) {
  geo.require_invertible("grad_phi");
  const VolumeField d3 = deriv_vertical(g, f);
  const VolumeField d3p = d3 * geo.A[2][2];
  return {deriv_tangential(g, f, 1) + geo.A[0][2] * d3, deriv_tangential(g, f, 2) + geo.A[1][2] * d3, d3p};
}

VolumeField div_phi(const Grid& g, const VectorField& X, const GeometrySnapshot& geo) {
  geo.require_invertible("div_phi");
  // sum_i A[i][j] d_j X^i; off the diagonal only the j = 3 column is nonzero.
  VolumeField out = deriv_tangential(g, X[0], 1) + deriv_tangential(g, X[1], 2);
  out += geo.A[0][2] * deriv_vertical(g, X[0]);
  out += geo.A[1][2] * deriv_vertical(g, X[1]);
  out += geo.A[2][2] * deriv_vertical(g, X[2]);
  return out;
}

VectorField curl_phi(const Grid& g, const VectorField& X, const GeometrySnapshot& geo) {
  const VectorField g0 = grad_phi(g, X[0], geo);
  const VectorField g1 = grad_phi(g, X[1], geo);
  const VectorField g2 = grad_phi(g, X[2], geo);
  return {g2[1] - g1[2], g0[2] - g2[0], g1[0] - g0[1]};
}

VolumeField laplace_phi(const Grid& g, const VolumeField& f, const GeometrySnapshot& geo) {
  return div_phi(g, grad_phi(g, f, geo), geo);
}

VolumeField advect(const Grid& g, const VectorField& v, const VolumeField& f, const GeometrySnapshot& geo) {
  geo.require_invertible("advect");
  const VolumeField w = (v[0] * geo.bfN[0] + v[1] * geo.bfN[1] + v[2] - geo.dt_phi) * geo.A[2][2];
  VolumeField out = v[0] * deriv_tangential(g, f, 1) + v[1] * deriv_tangential(g, f, 2);
  out += w * deriv_vertical(g, f);
  return dealias(g, out);
}

VolumeField dbar(const Grid& g, const VolumeField& f, MultiIndex alpha) {
  return deriv_mixed(g, f, alpha.a1, alpha.a2);
}
SurfaceField dbar(const Grid& g, const SurfaceField& f, MultiIndex alpha) {
  return deriv_mixed(g, f, alpha.a1, alpha.a2);
}

VolumeField commutator(const Grid& g, MultiIndex alpha, const VolumeField& f, const VolumeField& h) {
  return leibniz(g, alpha, f, h, [](int order) { return order > 0; });
}

VolumeField symmetric_commutator(const Grid& g, MultiIndex alpha, const VolumeField& f, const VolumeField& h) {
  const int top = alpha.order();
  return leibniz(g, alpha, f, h, [top](int order) { return order > 0 && order < top; });
}

GoodUnknownPair good_unknowns(const Grid& g, const VectorField& v, const VolumeField& q,
                              const GeometrySnapshot& geo, MultiIndex alpha) {
  if (alpha.a1 < 0 || alpha.a2 < 0) throw std::invalid_argument("good_unknowns: negative multi-index");
  geo.require_invertible("good_unknowns");
  const VolumeField dphi = dbar_phi(g, geo, alpha);
  GoodUnknownPair out;
  out.alpha = alpha;
  for (int c = 0; c < 3; ++c)
    out.V[c] = dbar(g, v[c], alpha) - deriv_vertical(g, v[c]) * geo.A[2][2] * dphi;
  out.Q = dbar(g, q, alpha) - deriv_vertical(g, q) * geo.A[2][2] * dphi;
  return out;
}

VolumeField alinhac_remainder(const Grid& g, const VolumeField& f, const GeometrySnapshot& geo, MultiIndex alpha,
                              int i) {
  if (i < 1 || i > 3) throw std::invalid_argument("alinhac_remainder: component must be 1, 2 or 3");
  if (alpha.order() < 1) throw std::invalid_argument("alinhac_remainder: |alpha| must be >= 1");
  geo.require_invertible("alinhac_remainder");
  const VolumeField inv = geo.A[2][2];
  const VolumeField inv2 = inv * inv;
  const VolumeField d3f = deriv_vertical(g, f);
  const MultiIndex unit = unit_below(alpha);
  // [dbar^(alpha-alpha'), 1/(d3phi)^2] dbar^alpha' d3phi
  const VolumeField d3phi_unit = multiply_by_profile(extend_vertically(g, dbar(g, geo.psi, unit)), geo.cutoff_dchi);
  const VolumeField tail = commutator(g, minus(alpha, unit), inv2, d3phi_unit);

  VolumeField r1;
  if (i < 3) {
    const VolumeField& dj = geo.dphi[i - 1];
    r1 = -symmetric_commutator(g, alpha, dj * inv, d3f);
    r1 -= d3f * symmetric_commutator(g, alpha, dj, inv);
    r1 += d3f * dj * tail;
  } else {
    r1 = symmetric_commutator(g, alpha, inv, d3f);
    r1 -= d3f * tail;
  }
  const VectorField grad_f = grad_phi(g, f, geo);
  const VolumeField d3_di = grad_phi(g, grad_f[i - 1], geo)[2];
  return r1 + d3_di * dbar_phi(g, geo, alpha);
}

double alinhac_identity_residual(const Grid& g, const VolumeField& f, const GeometrySnapshot& geo,
                                 MultiIndex alpha, int i) {
  const VectorField grad_f = grad_phi(g, f, geo);
  const VolumeField lhs = dbar(g, grad_f[i - 1], alpha);
  const VolumeField F = dbar(g, f, alpha) - grad_f[2] * dbar_phi(g, geo, alpha);
  const VolumeField rhs = grad_phi(g, F, geo)[i - 1] + alinhac_remainder(g, f, geo, alpha, i);
  return l2_volume(g, lhs - rhs);
}

SurfaceField kinematic_source(const Grid& g, const VectorField& v, const GeometrySnapshot& geo, MultiIndex alpha) {
  const int top = alpha.order();
  SurfaceField s = SurfaceField(g);
  // (d3 v . N) dbar^alpha psi
  const SurfaceField dpsi_a = dbar(g, geo.psi, alpha);
  for (int c = 0; c < 3; ++c) s += trace_top(deriv_vertical(g, v[c])) * geo.N[c] * dpsi_a;
  std::array<SurfaceField, 3> vt = {trace_top(v[0]), trace_top(v[1]), trace_top(v[2])};
  for (int b1 = 0; b1 <= alpha.a1; ++b1)
    for (int b2 = 0; b2 <= alpha.a2; ++b2) {
      const int order = b1 + b2;
      if (order == 0 || order == top) continue;
      const double c = binomial(alpha.a1, b1) * binomial(alpha.a2, b2);
      const MultiIndex rest{alpha.a1 - b1, alpha.a2 - b2};
      // dbar^rest N = (-dbar^rest d1 psi, -dbar^rest d2 psi, 0) for |rest| >= 1.
      s -= c * (dbar(g, vt[0], {b1, b2}) * dbar(g, geo.dpsi[0], rest));
      s -= c * (dbar(g, vt[1], {b1, b2}) * dbar(g, geo.dpsi[1], rest));
    }
  return s;
}

double higher_kinematic_residual(const Grid& g, const VectorField& v, const GeometrySnapshot& geo,
                                 MultiIndex alpha) {
  geo.require_invertible("higher_kinematic_residual");
  const SurfaceField v1 = trace_top(v[0]), v2 = trace_top(v[1]), v3 = trace_top(v[2]);
  const SurfaceField vn = v1 * geo.N[0] + v2 * geo.N[1] + v3;
  const SurfaceField dpsi_a = dbar(g, geo.psi, alpha);
  SurfaceField lhs = dbar(g, vn, alpha);
  lhs += v1 * deriv_tangential(g, dpsi_a, 1) + v2 * deriv_tangential(g, dpsi_a, 2);
  const VolumeField zero(g);
  const GoodUnknownPair gu = good_unknowns(g, v, zero, geo, alpha);
  for (int c = 0; c < 3; ++c) lhs -= trace_top(gu.V[c]) * geo.N[c];
  lhs -= kinematic_source(g, v, geo, alpha);
  return l2_surface(g, lhs);
}

}  // namespace fsbc
