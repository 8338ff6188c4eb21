#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fsbc/spectral.hpp"

using namespace fsbc;
using std::numbers::pi;

TEST_CASE("grid validates its shape") {
  CHECK_THROWS_AS(Grid(7, 8, 8, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid(8, 8, 4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Grid(8, 8, 8, 0.0), std::invalid_argument);
  CHECK_NOTHROW(Grid(8, 8, 8, 1.0));
}

TEST_CASE("Lobatto nodes run from the top to the bottom with exact endpoints") {
  const Grid g(8, 8, 9, 3.0);
  CHECK(g.z(0) == 0.0);
  CHECK(g.z(8) == -3.0);
  CHECK(g.z(4) == doctest::Approx(-1.5).epsilon(1e-15));
  for (int k = 0; k + 1 < g.nz(); ++k) CHECK(g.z(k) > g.z(k + 1));
}

TEST_CASE("vertical collocation is exact on polynomials of degree below nz") {
  const Grid g(8, 8, 10, 2.5);
  const auto f = sample_volume(g, [](double, double, double z) { return std::pow(z, 9) - 3 * z * z + 1.0; });
  const auto d = deriv_vertical(g, f);
  for (int k = 0; k < g.nz(); ++k) {
    const double z = g.z(k);
    CHECK(d(0, 0, k) == doctest::Approx(9 * std::pow(z, 8) - 6 * z).epsilon(1e-10));
  }
}

TEST_CASE("vertical derivative of an analytic profile converges spectrally") {
  const Grid g(8, 8, 17, 10.0);
  const auto f = sample_volume(g, [](double, double, double z) { return std::cos(pi * z / 10.0); });
  const auto d = deriv_vertical(g, f);
  double err = 0.0;
  for (int k = 0; k < g.nz(); ++k) err = std::max(err, std::abs(d(0, 0, k) + pi / 10.0 * std::sin(pi * g.z(k) / 10.0)));
  CHECK(err < 1e-9);
}

TEST_CASE("tangential derivatives match analytic derivatives") {
  const Grid g(16, 12, 8, 1.0);
  const auto f = sample_surface(g, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); });
  const auto d1 = deriv_tangential(g, f, 1);
  const auto d22 = deriv_tangential(g, f, 2, 2);
  const auto d12 = deriv_mixed(g, f, 1, 1);
  for (int i = 0; i < g.nx(); ++i)
    for (int j = 0; j < g.ny(); ++j) {
      const double x = g.x1(i), y = g.x2(j);
      CHECK(d1(i, j) == doctest::Approx(3 * std::cos(3 * x) * std::cos(2 * y)).epsilon(1e-12));
      CHECK(d22(i, j) == doctest::Approx(-4 * std::sin(3 * x) * std::cos(2 * y)).epsilon(1e-12));
      CHECK(d12(i, j) == doctest::Approx(-6 * std::cos(3 * x) * std::sin(2 * y)).epsilon(1e-12));
    }
}

TEST_CASE("odd derivatives annihilate the Nyquist mode") {
  const Grid g(8, 8, 8, 1.0);
  const auto f = sample_surface(g, [](double x, double) { return std::cos(4 * x); });
  CHECK(max_abs(deriv_tangential(g, f, 1)) < 1e-14);
  const auto f2 = deriv_tangential(g, f, 1, 2);
  CHECK(f2(0, 0) == doctest::Approx(-16.0));
}

TEST_CASE("dealiasing keeps |k| <= n/3 and drops the rest") {
  const Grid g(16, 16, 8, 1.0);
  const auto low = sample_surface(g, [](double x, double y) { return std::cos(5 * x) + std::sin(5 * y); });
  const auto high = sample_surface(g, [](double x, double) { return std::cos(6 * x); });
  CHECK(max_abs(dealias(g, low) - low) < 1e-13);
  CHECK(max_abs(dealias(g, high)) < 1e-13);
}

TEST_CASE("quadrature integrates polynomials and trigonometric data exactly") {
  const double b = 4.0;
  const Grid g(8, 8, 9, b);
  const auto one = VolumeField(g, 1.0);
  CHECK(integrate_volume(g, one) == doctest::Approx(4 * pi * pi * b).epsilon(1e-13));
  const auto z4 = sample_volume(g, [](double, double, double z) { return z * z * z * z; });
  CHECK(integrate_volume(g, z4) == doctest::Approx(4 * pi * pi * std::pow(b, 5) / 5.0).epsilon(1e-12));
  const auto c2 = sample_surface(g, [](double x, double) { return std::cos(x) * std::cos(x); });
  CHECK(integrate_surface(g, c2) == doctest::Approx(2 * pi * pi).epsilon(1e-13));
}

TEST_CASE("boundary Sobolev norm follows Parseval") {
  const Grid g(16, 16, 8, 1.0);
  const auto f = sample_surface(g, [](double x, double) { return std::cos(x); });
  // |cos x1|_s^2 = (1 + 1)^s * 2 pi^2
  for (double s : {0.0, 1.5, 3.0, 4.0})
    CHECK(boundary_sobolev_norm(g, f, s) == doctest::Approx(std::sqrt(std::pow(2.0, s) * 2 * pi * pi)).epsilon(1e-12));
  const auto mixed = sample_surface(g, [](double x, double y) { return std::sin(2 * x + y); });
  CHECK(boundary_sobolev_norm(g, mixed, 2.0) == doctest::Approx(std::sqrt(36.0 * 2 * pi * pi)).epsilon(1e-12));
  CHECK(boundary_sobolev_norm(g, f, 0.0) == doctest::Approx(l2_surface(g, f)).epsilon(1e-12));
}

TEST_CASE("interior Sobolev norm sums all derivatives up to order s") {
  const double b = 2.0;
  const Grid g(16, 16, 9, b);
  const auto f = sample_volume(g, [](double x, double, double) { return std::sin(x); });
  const double base = 2 * pi * pi * b;  // ||sin x1||_0^2
  CHECK(interior_sobolev_norm(g, f, 0) == doctest::Approx(std::sqrt(base)).epsilon(1e-12));
  CHECK(interior_sobolev_norm(g, f, 1) == doctest::Approx(std::sqrt(2 * base)).epsilon(1e-12));
  CHECK(interior_sobolev_norm(g, f, 3) == doctest::Approx(std::sqrt(4 * base)).epsilon(1e-12));
  const auto z = sample_volume(g, [](double, double, double z) { return z; });
  // ||z||_1^2 = (2pi)^2 (b^3/3 + b)
  CHECK(interior_sobolev_norm(g, z, 1) == doctest::Approx(std::sqrt(4 * pi * pi * (b * b * b / 3 + b))).epsilon(1e-12));
}

TEST_CASE("sup-based norms") {
  const Grid g(16, 16, 8, 1.0);
  const auto f = sample_surface(g, [](double x, double) { return std::sin(x); });
  const auto n = holder_and_sup_norms(g, f, 3);
  CHECK(n.sup == doctest::Approx(1.0));
  CHECK(n.ck == doctest::Approx(4.0));
  CHECK(n.w1inf == doctest::Approx(2.0));
  const auto c2 = holder_and_sup_norms(g, f, 2);
  CHECK(c2.ck <= n.ck);
}

TEST_CASE("transforms round-trip") {
  const Grid g(12, 10, 8, 1.0);
  const auto f = sample_volume(g, [](double x, double y, double z) { return std::exp(std::sin(x) + z) * std::cos(3 * y); });
  std::vector<Complex> c(static_cast<std::size_t>(g.spectral_size() * g.nz()));
  g.forward(f.values, c, g.nz());
  VolumeField back(g);
  g.inverse(c, back.values, g.nz());
  CHECK(max_abs(back - f) < 1e-13);
  // Coefficient (0,0) is the mean of each level.
  const auto one = SurfaceField(g, 2.5);
  std::vector<Complex> c1(static_cast<std::size_t>(g.spectral_size()));
  g.forward(one.values, c1, 1);
  CHECK(c1[0].real() == doctest::Approx(2.5));
}
