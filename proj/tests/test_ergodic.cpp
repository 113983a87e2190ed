#include "rotlab/ergodic.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <memory>

#include "rotlab/rotation_number.hpp"

using namespace rotlab;

namespace {

AnglePtr golden_angle() {
  static AnglePtr a = std::make_shared<IrrationalAngle>(IrrationalAngle::golden(28));
  return a;
}

const CircleMap& tuned_arnold_half() {
  static CircleMap f = [] {
    TuneResult r = tune_arnold(0.5, golden_angle(), 18);
    return *r.map;
  }();
  return f;
}

// closed-form oracle: S_n cos(2 pi .)(x) = Re[e^{2 pi i x} (e^{2 pi i n rho} - 1)
// / (e^{2 pi i rho} - 1)]
double dirichlet_sum(double rho, long long n, double x) {
  std::complex<double> num = std::polar(1.0, kTwoPi * wrap_unit(n * rho)) - 1.0;
  std::complex<double> den = std::polar(1.0, kTwoPi * rho) - 1.0;
  return (std::polar(1.0, kTwoPi * x) * num / den).real();
}

}  // namespace

TEST_CASE("birkhoff sums match the geometric closed form on rotations", "[ergodic]") {
  auto rho = golden_angle();
  CircleMap r = CircleMap::rotation(rho);
  TestFunction u = tf_fourier(1, true);
  for (long long n : {1LL, 8LL, 55LL, 233LL}) {
    for (double x : {0.0, 0.37}) {
      double got = birkhoff_sum(r, u, n, x);
      CHECK(got == Catch::Approx(dirichlet_sum(rho->value(), n, x)).margin(1e-9));
    }
  }
}

TEST_CASE("birkhoff base cases", "[ergodic]") {
  CircleMap f = CircleMap::arnold(0.61, 0.5, golden_angle());
  TestFunction one = tf_constant(1.0);
  CHECK(birkhoff_sum(f, one, 100, 0.3) == Catch::Approx(100.0).margin(1e-12));
  TestFunction u = tf_fourier(1, true);
  CHECK(birkhoff_sum(f, u, 1, 0.21) == u(0.21));
  CHECK_THROWS_AS(birkhoff_sum(f, u, 0, 0.0), Error);
}

TEST_CASE("birkhoff additivity over orbit splits", "[ergodic]") {
  const CircleMap& f = tuned_arnold_half();
  TestFunction u = tf_fourier(2, false, 0.7);
  for (double x : {0.0, 0.5}) {
    double whole = birkhoff_sum(f, u, 89, x);
    double first = birkhoff_sum(f, u, 34, x);
    double rest = birkhoff_sum(f, u, 55, iterate(f, 34, x).value);
    CHECK(std::abs(whole - (first + rest)) < 1e-9 * 89);
  }
}

TEST_CASE("mu_mean on the rotation: zero mean inside the envelope", "[ergodic]") {
  CircleMap r = CircleMap::rotation(golden_angle());
  TestFunction u = tf_fourier(1, true);
  double prev_bound = 1e9;
  for (int k : {4, 7, 10, 13}) {
    MuMean m = mu_mean(r, u, k);
    long long q = golden_angle()->convergent(k).q;
    CHECK(m.error_bound == Catch::Approx(4.0 / q));
    CHECK(std::abs(m.value) <= m.error_bound * (1.0 + 1e-9));
    CHECK(m.error_bound < prev_bound);
    prev_bound = m.error_bound;
  }
}

TEST_CASE("mu_mean of a constant is exact", "[ergodic]") {
  const CircleMap& f = tuned_arnold_half();
  MuMean m = mu_mean(f, tf_constant(2.5), 8);
  CHECK(m.value == Catch::Approx(2.5).margin(1e-12));
  CHECK(m.error_bound == 0.0);
}

TEST_CASE("mu_mean requires a variation bound", "[ergodic]") {
  const CircleMap& f = tuned_arnold_half();
  TestFunction bare;
  bare.name = "no-var";
  bare.u = [](double x) { return x - std::floor(x); };
  CHECK_THROWS_AS(mu_mean(f, bare, 5), NoVarBound);
}

TEST_CASE("mu(log Df) vanishes for the tuned map", "[ergodic]") {
  const CircleMap& f = tuned_arnold_half();
  TestFunction u = tf_log_deriv(f);
  double prev = 1e9;
  for (int k : {6, 9, 12}) {
    MuMean m = mu_mean(f, u, k);
    CHECK(std::abs(m.value) <= m.error_bound * (1.0 + 1e-9));
    CHECK(std::abs(m.value) < prev);
    prev = std::abs(m.value);
  }
}

TEST_CASE("corollary experiment on the rotation matches the Dirichlet kernel",
          "[ergodic]") {
  auto rho = golden_angle();
  CircleMap r = CircleMap::rotation(rho);
  TestFunction u = tf_fourier(1, true);
  auto rows = corollary_experiment(r, u, 4, 10, 256);
  for (const auto& row : rows) {
    // sup over x of |S_q u| = |sin(pi q rho)| / |sin(pi rho)|; mu(u) = 0 and
    // the Birkhoff estimate of mu is itself Dirichlet-small.
    double expect = std::abs(std::sin(kPi * wrap_unit(row.q * rho->value()))) /
                    std::abs(std::sin(kPi * rho->value()));
    CHECK(row.sup_deviation ==
          Catch::Approx(expect).margin(row.q * row.mu_error_bound + 1e-6));
  }
}

TEST_CASE("corollary experiment of the zero function vanishes", "[ergodic]") {
  const CircleMap& f = tuned_arnold_half();
  TestFunction z = tf_constant(0.0);
  for (const auto& row : corollary_experiment(f, z, 4, 8, 64))
    CHECK(row.sup_deviation < 1e-10);
}

TEST_CASE("corollary deviations trend to zero on the tuned Arnold map", "[ergodic]") {
  const CircleMap& f = tuned_arnold_half();
  TestFunction u = tf_fourier(1, true);
  auto rows = corollary_experiment(f, u, 4, 10, 128);
  double max_dev = 0.0;
  for (const auto& row : rows) max_dev = std::max(max_dev, row.sup_deviation);
  CHECK(rows.back().sup_deviation < 0.5 * max_dev);
  // classical envelope, allowing the mu-estimation slack
  for (const auto& row : rows)
    CHECK(row.sup_deviation <= 4.0 + row.q * row.mu_error_bound + 1e-9);
}

TEST_CASE("herman table on the rotation", "[ergodic]") {
  auto rho = golden_angle();
  CircleMap r = CircleMap::rotation(rho);
  auto rows = herman_check(r, 3, 9, 64);
  for (const auto& row : rows) {
    CHECK(row.c0_dev == Catch::Approx(rho->approximation_error(row.k)).margin(1e-11));
    CHECK(row.c1_dev < 1e-12);
  }
}

TEST_CASE("herman convergence and the Denjoy bound for the tuned map", "[ergodic]") {
  const CircleMap& f = tuned_arnold_half();
  auto rows = herman_check(f, 4, 12, 128);
  double ev = std::exp(*f.var_log_df());
  for (const auto& row : rows) {
    CHECK(row.c0_dev > 0.0);
    CHECK(row.c1_dev > 0.0);
    CHECK(row.c1_dev <= ev - 1.0 + 1e-9);
  }
  CHECK(rows.back().c0_dev < rows.front().c0_dev);
  CHECK(rows.back().c1_dev < rows.front().c1_dev);
}

TEST_CASE("herman rejects maps below C2", "[ergodic]") {
  const CircleMap& f = tuned_arnold_half();
  CircleMap c1_only = CircleMap::from_callables(
      [&f](double x) { return f.lift(x); }, [&f](double x) { return f.deriv(x); },
      nullptr, Regularity::C1, std::nullopt, f.family(), f.angle_ptr());
  CHECK_THROWS_AS(herman_check(c1_only, 3, 5, 16), Error);
}

TEST_CASE("Denjoy inequality along convergent times", "[ergodic]") {
  const CircleMap& f = tuned_arnold_half();
  double v = *f.var_log_df();
  for (int k = 3; k <= 10; ++k) {
    long long q = f.angle().convergent(k).q;
    for (int i = 0; i < 64; ++i) {
      double x = static_cast<double>(i) / 64;
      CHECK(std::abs(iterate(f, q, x).log_deriv) <= v + 1e-6);
    }
  }
}

TEST_CASE("Denjoy-Koksma envelope for BV observables", "[ergodic]") {
  const CircleMap& f = tuned_arnold_half();
  // a Fourier mode and a smoothed-indicator bump
  TestFunction members[] = {tf_fourier(1, true, 0.8),
                            tf_gap_bump_symmetric(0.3, 0.25, 1.0)};
  for (const TestFunction& u : members) {
    MuMean mu = mu_mean(f, u, 12);
    for (int k = 3; k <= 10; ++k) {
      long long q = f.angle().convergent(k).q;
      for (int i = 0; i < 32; ++i) {
        double x = static_cast<double>(i) / 32;
        double dev = std::abs(birkhoff_sum(f, u, q, x) - q * mu.value);
        CHECK(dev <= *u.var_bound + q * mu.error_bound + 1e-9);
      }
      // time averages stabilize: within the envelope of the deep estimate
      double avg = birkhoff_sum(f, u, q, 0.11) / static_cast<double>(q);
      CHECK(std::abs(avg - mu.value) <= *u.var_bound / q + mu.error_bound + 1e-9);
    }
  }
}

TEST_CASE("test-function families are periodic with consistent derivatives",
          "[ergodic]") {
  TestFunction members[] = {tf_fourier(1, true),  tf_fourier(3, false, 0.4),
                            tf_constant(2.0),     tf_gap_bump_symmetric(0.4, 0.2, 1.3),
                            tf_gap_bump_antisymmetric(0.4, 0.2, 5.0)};
  const double h = 1e-6;
  for (const TestFunction& u : members) {
    for (int i = 0; i < 64; ++i) {
      double x = static_cast<double>(i) / 64;
      CHECK(std::abs(u(x + 1.0) - u(x)) < 1e-12);
      if (u.has_derivative()) {
        double fd = (u(x + h) - u(x - h)) / (2 * h);
        CHECK(std::abs(fd - u.du(x)) < 1e-4 * (1.0 + std::abs(u.du(x))));
      }
    }
  }
}
