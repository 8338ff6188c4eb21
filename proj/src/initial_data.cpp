#include "fsbc/initial_data.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "fsbc/operators.hpp"

namespace fsbc {

State flat_rest(const Grid& g) { return {0.0, make_vector(g), SurfaceField(g)}; }

State single_mode_wave(const Grid& g, double eps, int k1, int k2) {
  return {0.0, make_vector(g),
          sample_surface(g, [&](double x, double y) { return eps * std::cos(k1 * x + k2 * y); })};
}

VectorField random_solenoidal(const Grid& g, const GeometrySnapshot& geo, const RandomFieldOptions& opt) {
  if (opt.kmax < 1 || opt.mmax < 0) throw std::invalid_argument("random_solenoidal: kmax >= 1, mmax >= 0 required");
  if (!(opt.amplitude >= 0.0)) throw std::invalid_argument("random_solenoidal: amplitude must be nonnegative");
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double b = g.depth();
  VectorField A = make_vector(g);
  for (int c = 0; c < 3; ++c)
    for (int k1 = -opt.kmax; k1 <= opt.kmax; ++k1)
      for (int k2 = 0; k2 <= opt.kmax; ++k2) {
        if (k2 == 0 && k1 < 0) continue;
        const double damp = std::exp(-opt.decay * (k1 * k1 + k2 * k2));
        for (int m = 0; m <= opt.mmax; ++m) {
          const double ac = normal(rng) * damp, as = normal(rng) * damp;
          A[c] += sample_volume(g, [&](double x, double y, double z) {
            const double th = k1 * x + k2 * y;
            return (ac * std::cos(th) + as * std::sin(th)) * std::cos(m * std::numbers::pi * z / b);
          });
        }
      }
  std::vector<double> ramp(static_cast<std::size_t>(g.nz()));
  for (int k = 0; k < g.nz(); ++k) ramp[static_cast<std::size_t>(k)] = (g.z(k) + b) / b;
  A[0] = multiply_by_profile(A[0], ramp);
  A[1] = multiply_by_profile(A[1], ramp);
  VectorField v = curl_phi(g, A, geo);
  double m = 0.0;
  for (const auto& c : v) m = std::max(m, max_abs(c));
  if (m > 0.0)
    for (auto& c : v) c *= opt.amplitude / m;
  return v;
}

VectorField columnar_vortex(const Grid& g, double gamma, double radius, double c1, double c2) {
  if (!(radius > 0.0)) throw std::invalid_argument("columnar_vortex: radius must be positive");
  const double r2 = radius * radius;
  VectorField v = make_vector(g);
  // S = gamma r^2 e^{s}, s = (cos(x1 - c1) + cos(x2 - c2) - 2) / r^2.
  auto e = [&](double x, double y) { return gamma * std::exp((std::cos(x - c1) + std::cos(y - c2) - 2.0) / r2); };
  v[0] = sample_volume(g, [&](double x, double y, double) { return e(x, y) * std::sin(y - c2); });
  v[1] = sample_volume(g, [&](double x, double y, double) { return -e(x, y) * std::sin(x - c1); });
  return v;
}

}  // namespace fsbc
