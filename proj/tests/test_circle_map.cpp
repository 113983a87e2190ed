#include "rotlab/circle_map.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <random>

using namespace rotlab;

namespace {

AnglePtr golden_angle() {
  static AnglePtr a = std::make_shared<IrrationalAngle>(IrrationalAngle::golden(28));
  return a;
}

// independent oracle: composite Simpson for the total variation integral
// int_0^1 |2 pi eps sin(2 pi x)| / (1 + eps cos(2 pi x)) dx, exploiting the
// symmetry about x = 1/2.
double arnold_var_quadrature(double eps, int n) {
  auto integrand = [eps](double x) {
    return kTwoPi * eps * std::sin(kTwoPi * x) / (1.0 + eps * std::cos(kTwoPi * x));
  };
  double h = 0.5 / n;
  double s = integrand(0.0) + integrand(0.5);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
  return 2.0 * (h / 3.0) * s;
}

std::vector<FourierMode> test_h_modes() {
  return {{1, 0.04, 0.0}, {2, 0.0, 0.015}, {3, 0.006, 0.0}};
}

}  // namespace

TEST_CASE("rotation and degenerate Arnold evaluate as translations", "[circlemap]") {
  auto rho = golden_angle();
  CircleMap r = CircleMap::rotation(rho);
  CHECK(r.lift(0.25) == Catch::Approx(0.25 + rho->value()).margin(1e-15));

  CircleMap a0 = CircleMap::arnold(0.37, 0.0);
  for (double x : {0.0, 0.3, 0.99}) CHECK(a0.lift(x) == Catch::Approx(x + 0.37).margin(1e-15));

  CircleMap a = CircleMap::arnold(0.25, 0.5);
  CHECK(a.lift(0.0) == Catch::Approx(0.25).margin(1e-15));
}

TEST_CASE("lift equivariance on random points", "[circlemap]") {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  CircleMap maps[] = {CircleMap::rotation(golden_angle()),
                      CircleMap::arnold(0.61, 0.5, golden_angle()),
                      CircleMap::conjugated_rotation(test_h_modes(), golden_angle())};
  for (const auto& f : maps) {
    for (int i = 0; i < 256; ++i) {
      double x = unif(rng);
      CHECK(std::abs(f.lift(x + 1.0) - f.lift(x) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("lift strictly increasing on a 4096 grid", "[circlemap]") {
  CircleMap maps[] = {CircleMap::arnold(0.61, 0.9, golden_angle()),
                      CircleMap::conjugated_rotation(test_h_modes(), golden_angle())};
  for (const auto& f : maps) {
    double prev = f.lift(0.0);
    for (int i = 1; i <= 4096; ++i) {
      double cur = f.lift(static_cast<double>(i) / 4096);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("iterate on the rotation is exact translation", "[circlemap]") {
  auto rho = golden_angle();
  CircleMap r = CircleMap::rotation(rho);
  IterateResult it = iterate(r, 13, 0.2);
  CHECK(it.value == Catch::Approx(0.2 + 13 * rho->value()).margin(1e-12));
  CHECK(it.log_deriv == 0.0);

  IterateResult id = iterate(r, 0, 0.77);
  CHECK(id.value == 0.77);
  CHECK(id.log_deriv == 0.0);
}

TEST_CASE("iterate matches direct composition", "[circlemap]") {
  CircleMap f = CircleMap::arnold(0.616, 0.5, golden_angle());
  double x = 0.0;
  double prod = 1.0;
  for (int j = 0; j < 8; ++j) {
    prod *= f.deriv(x);
    x = f.lift(x);
  }
  IterateResult it = iterate(f, 8, 0.0);
  CHECK(it.value == Catch::Approx(x).margin(1e-12));
  CHECK(std::exp(it.log_deriv) == Catch::Approx(prod).margin(1e-12));
  // q_5 = 8 for the golden target: the displacement is near p_5 = 5
  CHECK(std::abs(it.value - 0.0 - 5.0) < 0.05);
}

TEST_CASE("iterate is additive under orbit splitting", "[circlemap]") {
  CircleMap f = CircleMap::arnold(0.61, 0.7, golden_angle());
  for (double x : {0.0, 0.41}) {
    IterateResult a = iterate(f, 21, x);
    IterateResult b1 = iterate(f, 8, x);
    IterateResult b2 = iterate(f, 13, b1.value);
    CHECK(std::abs(a.value - b2.value) < 1e-10 * 21);
    CHECK(std::abs(a.log_deriv - (b1.log_deriv + b2.log_deriv)) < 1e-10 * 21);
  }
}

TEST_CASE("inverse round trip", "[circlemap]") {
  CircleMap maps[] = {CircleMap::arnold(0.61, 0.9, golden_angle()),
                      CircleMap::conjugated_rotation(test_h_modes(), golden_angle())};
  for (const auto& f : maps) {
    for (double x : {0.05, 0.33, 0.78}) {
      IterateResult fwd = iterate(f, 6, x);
      IterateResult back = iterate(f, -6, fwd.value);
      CHECK(std::abs(back.value - x) < 1e-9);
      CHECK(std::abs(back.log_deriv + fwd.log_deriv) < 1e-9);
    }
  }
}

TEST_CASE("var_log_deriv closed form for the Arnold family", "[circlemap]") {
  CircleMap r = CircleMap::rotation(golden_angle());
  CHECK(var_log_deriv(r, 1024) == 0.0);

  for (double eps : {0.3, 0.5, 0.9}) {
    CircleMap f = CircleMap::arnold(0.6, eps);
    double closed = 2.0 * std::log((1.0 + eps) / (1.0 - eps));
    double grid_v = var_log_deriv(f, 4096);
    double quad = arnold_var_quadrature(eps, 4096);
    CHECK(grid_v == Catch::Approx(closed).margin(1e-9));
    CHECK(quad == Catch::Approx(closed).margin(1e-9));
    CHECK(*f.var_log_df() == Catch::Approx(closed).margin(1e-12));
    // grid refinement is stable
    CHECK(std::abs(var_log_deriv(f, 8192) - grid_v) < 1e-6);
  }
}

TEST_CASE("construction rejects non-diffeomorphisms", "[circlemap]") {
  CHECK_THROWS_AS(CircleMap::arnold(0.5, 1.0), Error);
  CHECK_THROWS_AS(CircleMap::arnold(0.5, -0.1), Error);
  // sup|h'-1| >= 1 fails the certificate
  CHECK_THROWS_AS(
      CircleMap::conjugated_rotation({{1, 0.2, 0.0}}, golden_angle()), Error);
}

TEST_CASE("conjugated rotation evaluates through the conjugacy", "[circlemap]") {
  auto rho = golden_angle();
  CircleMap f = CircleMap::conjugated_rotation(test_h_modes(), rho);
  TrigDiffeo<double> h{test_h_modes()};
  for (double x : {0.1, 0.5, 0.93}) {
    double y = h.inverse(x);
    CHECK(std::abs(h.value(y) - x) < 1e-13);
    CHECK(f.lift(x) == Catch::Approx(h.value(y + rho->value())).margin(1e-12));
    // derivative against a central difference
    double fd = (f.lift(x + 5e-7) - f.lift(x - 5e-7)) / 1e-6;
    CHECK(f.deriv(x) == Catch::Approx(fd).margin(1e-6));
  }
}
