#include "fsbc/elliptic.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "fsbc/operators.hpp"
#include "fsbc/spectral.hpp"

namespace fsbc {

using Eigen::MatrixXd;
using Eigen::PartialPivLU;
using Eigen::VectorXd;

namespace {

constexpr int kTopKinds = 3;
constexpr int kGauges = 3;

int top_index(TopCondition t) { return static_cast<int>(t); }
int gauge_index(Gauge g) { return static_cast<int>(g); }

using Vec = std::vector<double>;
using LinearMap = std::function<Vec(const Vec&)>;

double dot(const Vec& a, const Vec& b) { return std::inner_product(a.begin(), a.end(), b.begin(), 0.0); }
double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

struct GmresOutcome {
  Vec x;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Restarted GMRES with right preconditioning, zero initial guess.
GmresOutcome gmres(const LinearMap& A, const LinearMap& M, const Vec& b, const SolverOptions& opt) {
  const std::size_t n = b.size();
  GmresOutcome out;
  out.x.assign(n, 0.0);
  const double bnorm = norm(b);
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  const int m = std::max(1, opt.restart);
  while (true) {
    Vec r = b;
    if (out.iterations > 0) {
      const Vec ax = A(out.x);
      for (std::size_t p = 0; p < n; ++p) r[p] -= ax[p];
    }
    const double beta = norm(r);
    out.residual = beta / bnorm;
    if (out.residual <= opt.tol) {
      out.converged = true;
      return out;
    }
    if (out.iterations >= opt.max_iters) return out;

    std::vector<Vec> V;
    V.reserve(m + 1);
    for (double& x : r) x /= beta;
    V.push_back(std::move(r));
    MatrixXd H = MatrixXd::Zero(m + 1, m);
    VectorXd cs = VectorXd::Zero(m), sn = VectorXd::Zero(m), s = VectorXd::Zero(m + 1);
    s(0) = beta;
    int used = 0;
    for (int j = 0; j < m && out.iterations < opt.max_iters; ++j) {
      Vec w = A(M(V[j]));
      for (int i = 0; i <= j; ++i) {
        H(i, j) = dot(w, V[i]);
        for (std::size_t p = 0; p < n; ++p) w[p] -= H(i, j) * V[i][p];
      }
      H(j + 1, j) = norm(w);
      if (H(j + 1, j) > 0.0)
        for (double& x : w) x /= H(j + 1, j);
      V.push_back(std::move(w));
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * H(i, j) + sn(i) * H(i + 1, j);
        H(i + 1, j) = -sn(i) * H(i, j) + cs(i) * H(i + 1, j);
        H(i, j) = t;
      }
      const double rho = std::hypot(H(j, j), H(j + 1, j));
      cs(j) = rho == 0.0 ? 1.0 : H(j, j) / rho;
      sn(j) = rho == 0.0 ? 0.0 : H(j + 1, j) / rho;
      H(j, j) = rho;
      H(j + 1, j) = 0.0;
      s(j + 1) = -sn(j) * s(j);
      s(j) = cs(j) * s(j);
      ++out.iterations;
      used = j + 1;
      if (std::abs(s(j + 1)) / bnorm <= opt.tol) break;
    }
    VectorXd y = H.topLeftCorner(used, used).triangularView<Eigen::Upper>().solve(s.head(used));
    Vec z(n, 0.0);
    for (int i = 0; i < used; ++i)
      for (std::size_t p = 0; p < n; ++p) z[p] += y(i) * V[i][p];
    const Vec dz = M(z);
    for (std::size_t p = 0; p < n; ++p) out.x[p] += dz[p];
  }
}

}  // namespace

struct EllipticSolver::FlatFactors {
  int nz = 0;
  MatrixXd D;
  MatrixXd D2;
  std::vector<double> volume_weights;  // Clenshaw-Curtis weights divided by b
  // factors[top][k^2]
  std::array<std::map<int, PartialPivLU<MatrixXd>>, kTopKinds> factors;
  // bordered k = 0 block, indexed [top][gauge]
  std::array<std::array<PartialPivLU<MatrixXd>, kGauges>, kTopKinds> bordered;

  MatrixXd block(TopCondition top, int k2) const {
    MatrixXd m = D2 - static_cast<double>(k2) * MatrixXd::Identity(nz, nz);
    switch (top) {
      case TopCondition::dirichlet: m.row(0) = MatrixXd::Identity(nz, nz).row(0); break;
      case TopCondition::neumann: m.row(0) = D.row(0); break;
      case TopCondition::equation: break;
    }
    m.row(nz - 1) = D.row(nz - 1);
    return m;
  }

  MatrixXd bordered_block(TopCondition top, Gauge gauge) const {
    MatrixXd m = MatrixXd::Zero(nz + 1, nz + 1);
    m.topLeftCorner(nz, nz) = block(top, 0);
    m(0, nz) = 1.0;
    if (gauge == Gauge::top_mean) {
      m(nz, 0) = 1.0;
    } else {
      for (int k = 0; k < nz; ++k) m(nz, k) = volume_weights[k];
    }
    return m;
  }
};

EllipticSolver::EllipticSolver(const Grid& g, SolverOptions opt) : g_(g), opt_(opt) {
  if (!(opt.tol > 0.0) || opt.max_iters < 1 || opt.restart < 1)
    throw std::invalid_argument("elliptic solver: tolerance and iteration limits must be positive");
  auto f = std::make_shared<FlatFactors>();
  const int nz = g.nz();
  f->nz = nz;
  f->D.resize(nz, nz);
  const auto d = g.vertical_diff();
  for (int r = 0; r < nz; ++r)
    for (int c = 0; c < nz; ++c) f->D(r, c) = d[static_cast<std::size_t>(r * nz + c)];
  f->D2 = f->D * f->D;
  for (double w : g.vertical_weights()) f->volume_weights.push_back(w / g.depth());
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.spectral_ny(); ++j) {
      if (g.nyquist_x(i) || g.nyquist_y(j)) continue;
      const int k2 = g.kx(i) * g.kx(i) + g.ky(j) * g.ky(j);
      for (int t = 0; t < kTopKinds; ++t) {
        const auto top = static_cast<TopCondition>(t);
        if (k2 == 0 && top != TopCondition::dirichlet) continue;
        if (!f->factors[t].count(k2)) f->factors[t].emplace(k2, PartialPivLU<MatrixXd>(f->block(top, k2)));
      }
    }
  for (int t = 0; t < kTopKinds; ++t)
    for (int gg = 1; gg < kGauges; ++gg)
      f->bordered[t][gg] = PartialPivLU<MatrixXd>(f->bordered_block(static_cast<TopCondition>(t), static_cast<Gauge>(gg)));
  flat_ = std::move(f);
}

double EllipticSolver::gauge_functional(Gauge gauge, const VolumeField& u) const {
  switch (gauge) {
    case Gauge::none: return 0.0;
    case Gauge::top_mean: return surface_mean(g_, trace_top(u));
    case Gauge::volume_mean: {
      double s = 0.0;
      for (int k = 0; k < g_.nz(); ++k) s += flat_->volume_weights[k] * surface_mean(g_, trace_level(u, k));
      return s;
    }
  }
  return 0.0;
}

VolumeField EllipticSolver::apply(const GeometrySnapshot& geo, const BoundaryProblem& p, const VolumeField& u,
                                  double c) const {
  const VectorField grad = grad_phi(g_, u, geo);
  VolumeField out = div_phi(g_, grad, geo);
  const int nz = g_.nz();
  const std::size_t plane = static_cast<std::size_t>(g_.surface_size());
  // Top row.
  SurfaceField top;
  switch (p.top) {
    case TopCondition::dirichlet: top = trace_top(u); break;
    case TopCondition::neumann:
      top = trace_top(grad[0]) * geo.N[0] + trace_top(grad[1]) * geo.N[1] + trace_top(grad[2]);
      break;
    case TopCondition::equation: top = trace_top(out); break;
  }
  for (std::size_t n = 0; n < plane; ++n) out.values[n] = top.values[n] + c;
  // Bottom row: bfN.grad_phi u.
  const std::size_t base = static_cast<std::size_t>(nz - 1) * plane;
  for (std::size_t n = 0; n < plane; ++n)
    out.values[base + n] = -geo.dphi[0].values[base + n] * grad[0].values[base + n] -
                           geo.dphi[1].values[base + n] * grad[1].values[base + n] + grad[2].values[base + n];
  return drop_nyquist(g_, out);
}

LinearSolveResult EllipticSolver::solve(const GeometrySnapshot& geo, const BoundaryProblem& p,
                                        const VolumeField& rhs, double gauge_value) const {
  geo.require_invertible("elliptic solve");
  if (!rhs.same_shape(VolumeField(g_))) throw std::invalid_argument("elliptic solve: rhs does not match grid");
  const bool bordered = p.gauge != Gauge::none;
  if (!bordered && p.top != TopCondition::dirichlet)
    throw std::invalid_argument("elliptic solve: Neumann-type top rows need a gauge");
  const std::size_t n = static_cast<std::size_t>(g_.volume_size());
  const std::size_t total = n + (bordered ? 1 : 0);
  const int nz = g_.nz();
  const int cny = g_.spectral_ny();
  const std::size_t cplane = static_cast<std::size_t>(g_.spectral_size());
  const auto& flat = *flat_;

  auto unpack = [&](const Vec& x) {
    VolumeField u(g_);
    std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), u.values.begin());
    return u;
  };
  const LinearMap A = [&](const Vec& x) {
    const VolumeField u = unpack(x);
    const double c = bordered ? x[n] : 0.0;
    const VolumeField r = apply(geo, p, u, c);
    Vec y(total);
    std::copy(r.values.begin(), r.values.end(), y.begin());
    if (bordered) y[n] = gauge_functional(p.gauge, u);
    return y;
  };
  const LinearMap M = [&](const Vec& x) {
    std::vector<Complex> c(cplane * nz);
    g_.forward(std::span<const double>(x.data(), n), c, nz);
    std::vector<Complex> out(c.size(), Complex(0.0));
    double cval = 0.0;
    VectorXd re(nz), im(nz);
    for (int i = 0; i < g_.nx(); ++i)
      for (int j = 0; j < cny; ++j) {
        if (g_.nyquist_x(i) || g_.nyquist_y(j)) continue;
        const std::size_t idx = static_cast<std::size_t>(i * cny + j);
        for (int k = 0; k < nz; ++k) {
          re(k) = c[k * cplane + idx].real();
          im(k) = c[k * cplane + idx].imag();
        }
        const int k2 = g_.kx(i) * g_.kx(i) + g_.ky(j) * g_.ky(j);
        VectorXd sr, si;
        if (k2 == 0 && bordered) {
          VectorXd br(nz + 1), bi(nz + 1);
          br << re, x[n];
          bi << im, 0.0;
          const auto& lu = flat.bordered[top_index(p.top)][gauge_index(p.gauge)];
          const VectorXd xr = lu.solve(br);
          sr = xr.head(nz);
          si = lu.solve(bi).head(nz);
          cval = xr(nz);
        } else {
          const auto& lu = flat.factors[top_index(p.top)].at(k2);
          sr = lu.solve(re);
          si = lu.solve(im);
        }
        for (int k = 0; k < nz; ++k) out[k * cplane + idx] = Complex(sr(k), si(k));
      }
    Vec y(total);
    g_.inverse(std::move(out), std::span<double>(y.data(), n), nz);
    if (bordered) y[n] = cval;
    return y;
  };

  Vec b(total);
  const VolumeField r = drop_nyquist(g_, rhs);
  std::copy(r.values.begin(), r.values.end(), b.begin());
  if (bordered) b[n] = gauge_value;

  const GmresOutcome o = gmres(A, M, b, opt_);
  if (!o.converged) {
    std::ostringstream os;
    os << "elliptic solve did not converge in " << o.iterations << " iterations (relative residual " << o.residual
       << ", tolerance " << opt_.tol << ")";
    throw SolverError(os.str(), o.residual, o.iterations);
  }
  LinearSolveResult res;
  res.u = unpack(o.x);
  res.c = bordered ? o.x[n] : 0.0;
  res.residual = o.residual;
  res.iterations = o.iterations;
  return res;
}

VolumeField pressure_source(const Grid& g, const VectorField& v, const GeometrySnapshot& geo) {
  std::array<VectorField, 3> grads = {grad_phi(g, v[0], geo), grad_phi(g, v[1], geo), grad_phi(g, v[2], geo)};
  VolumeField s(g);
  // grads[j][i] = d^phi_i v_j
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s -= grads[j][i] * grads[i][j];
  return dealias(g, s);
}

namespace {

VolumeField with_boundary_rows(const Grid& g, VolumeField interior, const SurfaceField& top,
                               const SurfaceField& bottom) {
  const std::size_t plane = static_cast<std::size_t>(g.surface_size());
  std::copy(top.values.begin(), top.values.end(), interior.values.begin());
  std::copy(bottom.values.begin(), bottom.values.end(),
            interior.values.begin() + static_cast<std::ptrdiff_t>((g.nz() - 1) * plane));
  return interior;
}

double relative_residual(const EllipticSolver& s, const GeometrySnapshot& geo, const BoundaryProblem& p,
                         const LinearSolveResult& r, const VolumeField& rhs, double gauge_value) {
  const Grid& g = s.grid();
  const VolumeField b = drop_nyquist(g, rhs);
  VolumeField d = s.apply(geo, p, r.u, r.c) - b;
  double num = 0.0, den = 0.0;
  for (double x : d.values) num += x * x;
  for (double x : b.values) den += x * x;
  if (p.gauge != Gauge::none) {
    const double e = s.gauge_functional(p.gauge, r.u) - gauge_value;
    num += e * e;
    den += gauge_value * gauge_value;
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

}  // namespace

PressureSolution solve_pressure_dirichlet(const EllipticSolver& s, const VectorField& v,
                                          const GeometrySnapshot& geo, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("pressure: sigma must be positive");
  const Grid& g = s.grid();
  const SurfaceField top = sigma * geo.H;
  const VolumeField rhs = with_boundary_rows(g, pressure_source(g, v, geo), top, SurfaceField(g));
  const BoundaryProblem p{TopCondition::dirichlet, Gauge::none};
  LinearSolveResult r = s.solve(geo, p, rhs);
  // Impose the trace nodally; the change is at the level of the tolerance.
  std::copy(top.values.begin(), top.values.end(), r.u.values.begin());
  PressureSolution out;
  out.residual = relative_residual(s, geo, p, r, rhs, 0.0);
  out.q = std::move(r.u);
  out.variant = PressureVariant::dirichlet_top;
  out.iterations = r.iterations;
  return out;
}

SurfaceField pressure_neumann_data(const Grid& g, const VectorField& v, const GeometrySnapshot& geo,
                                   const SurfaceField& psi_tt) {
  const SurfaceVector vt = {trace_top(v[0]), trace_top(v[1]), trace_top(v[2])};
  const SurfaceField vn = vt[0] * geo.N[0] + vt[1] * geo.N[1] + vt[2];
  SurfaceField data = -psi_tt;
  for (int c = 0; c < 3; ++c)
    data -= (vt[0] * deriv_tangential(g, vt[c], 1) + vt[1] * deriv_tangential(g, vt[c], 2)) * geo.N[c];
  data -= vt[0] * deriv_tangential(g, vn, 1) + vt[1] * deriv_tangential(g, vn, 2);
  return dealias(g, data);
}

PressureSolution solve_pressure_neumann(const EllipticSolver& s, const VectorField& v, const GeometrySnapshot& geo,
                                        const SurfaceField& psi_tt, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("pressure: sigma must be positive");
  const Grid& g = s.grid();
  const SurfaceField top = pressure_neumann_data(g, v, geo, psi_tt);
  const VolumeField rhs = with_boundary_rows(g, pressure_source(g, v, geo), top, SurfaceField(g));
  const BoundaryProblem p{TopCondition::neumann, Gauge::top_mean};
  const double pin = surface_mean(g, sigma * geo.H);
  const LinearSolveResult r = s.solve(geo, p, rhs, pin);
  PressureSolution out;
  out.q = r.u;
  out.variant = PressureVariant::neumann_top;
  out.residual = r.residual;
  out.iterations = r.iterations;
  out.incompatibility = std::abs(r.c);
  return out;
}

VolumeField harmonic_extension(const EllipticSolver& s, const SurfaceField& beta, const GeometrySnapshot& geo) {
  const Grid& g = s.grid();
  SurfaceField b = beta;
  b += -surface_mean(g, beta);
  const VolumeField rhs = with_boundary_rows(g, VolumeField(g), b, SurfaceField(g));
  return s.solve(geo, {TopCondition::neumann, Gauge::volume_mean}, rhs).u;
}

ProjectionResult project_divergence_free(const EllipticSolver& s, const VectorField& v, const GeometrySnapshot& geo,
                                         ProjectionMode mode) {
  const Grid& g = s.grid();
  const VolumeField div = div_phi(g, v, geo);
  const SurfaceField bottom = trace_bottom(v[2]) - trace_bottom(geo.dphi[0]) * trace_bottom(v[0]) -
                              trace_bottom(geo.dphi[1]) * trace_bottom(v[1]);
  SurfaceField top(g);
  BoundaryProblem p{TopCondition::dirichlet, Gauge::none};
  if (mode == ProjectionMode::fixed_lid) {
    p = {TopCondition::neumann, Gauge::volume_mean};
    top = trace_top(v[0]) * geo.N[0] + trace_top(v[1]) * geo.N[1] + trace_top(v[2]);
  }
  const VolumeField rhs = with_boundary_rows(g, div, top, bottom);
  const LinearSolveResult r = s.solve(geo, p, rhs);
  const VectorField grad = grad_phi(g, r.u, geo);
  ProjectionResult out;
  out.v = {v[0] - grad[0], v[1] - grad[1], v[2] - grad[2]};
  out.residual = r.residual;
  out.iterations = r.iterations;
  return out;
}

}  // namespace fsbc
