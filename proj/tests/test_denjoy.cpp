#include "rotlab/denjoy.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

using namespace rotlab;

namespace {

AnglePtr golden_angle() {
  static AnglePtr a = std::make_shared<IrrationalAngle>(IrrationalAngle::golden(28));
  return a;
}

const DenjoyMap& golden_denjoy64() {
  static DenjoyMap dj = DenjoyMap::build(golden_angle(), 64);
  return dj;
}

// independent oracle: composite Simpson on [0, b]
double simpson(double (*g)(double), double b, int n) {
  double h = b / n;
  double s = g(0.0) + g(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(i * h);
  return h / 3.0 * s;
}

}  // namespace

TEST_CASE("profile calibration identities", "[denjoy]") {
  // closed-form primitive against high-order quadrature of eta
  CHECK(std::abs(simpson(denjoy_profile, 1.0, 1 << 14) - 1.0) < 1e-12);
  CHECK(std::abs(simpson(denjoy_profile, 0.5, 1 << 14) - 0.5) < 1e-12);
  CHECK(std::abs(denjoy_profile(0.5) - 1.0) < 1e-12);
  CHECK(std::abs(denjoy_profile_primitive(1.0) - 1.0) < 1e-12);
  CHECK(std::abs(denjoy_profile_primitive(0.5) - 0.5) < 1e-12);
  CHECK(denjoy_profile(0.0) == Catch::Approx(0.0).margin(1e-30));
  // profile maximum 25/16 at cos(2 pi s) = -1/4
  double s_star = std::acos(-0.25) / kTwoPi;
  CHECK(denjoy_profile(s_star) == Catch::Approx(kProfileMax).margin(1e-12));
}

TEST_CASE("gap law telescopes in closed form", "[denjoy]") {
  CHECK(GapLaw::length(0) == Catch::Approx(0.2).margin(1e-16));
  // explicit summation oracle: sum_{|n| <= N} l_n + tail(N) = 1
  const long long N = 100000;
  CompensatedSum s;
  for (long long n = -N; n <= N; ++n) s.add(GapLaw::length(n));
  CHECK(s.value() + GapLaw::tail(N) == Catch::Approx(1.0).margin(1e-12));
  CHECK(GapLaw::tail(64) == Catch::Approx(2.0 * 1.2 / 67.0).margin(1e-16));
  // ratios tend to one from both sides
  CHECK(GapLaw::ratio(0) == Catch::Approx(0.5).margin(1e-16));
  CHECK(GapLaw::ratio(-1) == Catch::Approx(2.0).margin(1e-16));
  CHECK(std::abs(GapLaw::ratio(1000) - 1.0) < 3e-3);
  CHECK(std::abs(GapLaw::ratio(-1000) - 1.0) < 3e-3);
}

TEST_CASE("gap endpoints map exactly onto the image gap", "[denjoy]") {
  const DenjoyMap& dj = golden_denjoy64();
  for (long long n = -64; n < 64; ++n) {
    const Gap& src = dj.gap(n);
    const Gap& dst = dj.gap(n + 1);
    CHECK(std::abs(dj.eval(src.a) - dst.a) < 1e-12);
    CHECK(std::abs(dj.eval(src.a + src.len) - (dst.a + dst.len)) < 1e-12);
  }
}

TEST_CASE("midpoints map to midpoints with derivative equal to the length ratio",
          "[denjoy]") {
  const DenjoyMap& dj = golden_denjoy64();
  for (long long n = -20; n < 20; ++n) {
    CHECK(std::abs(dj.eval(dj.midpoint(n)) - dj.midpoint(n + 1)) < 1e-13);
    CHECK(dj.deriv(dj.midpoint(n)) == Catch::Approx(GapLaw::ratio(n)).margin(1e-13));
  }
  CHECK(std::abs(dj.eval(dj.x0()) - dj.midpoint(1)) < 1e-13);
  CHECK(std::abs(dj.eval(dj.gap(0).a) - dj.gap(1).a) < 1e-13);
}

TEST_CASE("derivative bounds: diffeomorphism with C1-small tails", "[denjoy]") {
  const DenjoyMap& dj = golden_denjoy64();
  // brute-force scan of sup |Dg_n - 1| per gap
  double worst = 0.0;
  long long argmax = 0;
  double global_min = 1e9;
  std::vector<double> sup_by_n;
  for (long long n = -64; n <= 64; ++n) {
    const Gap& g = dj.gap(n);
    double sup = 0.0;
    for (int i = 0; i <= 200; ++i) {
      double x = g.a + g.len * (i / 200.0);
      double d = dj.deriv(x);
      global_min = std::min(global_min, d);
      sup = std::max(sup, std::abs(d - 1.0));
    }
    sup_by_n.push_back(sup);
    if (sup > worst) {
      worst = sup;
      argmax = n;
    }
  }
  CHECK(global_min > 0.2);
  CHECK(argmax == -1);  // expansion ratio 2 is the farthest from 1
  CHECK(worst == Catch::Approx(kProfileMax).margin(1e-3));
  // sup |Dg_n - 1| decreases as |n| grows on both branches
  auto sup_of = [&](long long n) { return sup_by_n[static_cast<size_t>(n + 64)]; };
  for (long long n = 0; n < 63; ++n) CHECK(sup_of(n + 1) < sup_of(n) + 1e-15);
  for (long long n = -1; n > -63; --n) CHECK(sup_of(n - 1) < sup_of(n) + 1e-15);
}

TEST_CASE("gap order matches the rotation orbit order", "[denjoy]") {
  const DenjoyMap& dj = golden_denjoy64();
  std::vector<long long> by_gap_position(129);
  std::iota(by_gap_position.begin(), by_gap_position.end(), 0);
  std::vector<long long> by_theta = by_gap_position;
  std::sort(by_gap_position.begin(), by_gap_position.end(), [&](long long i, long long j) {
    return dj.midpoint(i - 64) < dj.midpoint(j - 64);
  });
  std::sort(by_theta.begin(), by_theta.end(), [&](long long i, long long j) {
    return golden_angle()->orbit_point(i - 64) < golden_angle()->orbit_point(j - 64);
  });
  CHECK(by_gap_position == by_theta);
}

TEST_CASE("evaluation domain is exactly the placed gaps with placed images",
          "[denjoy]") {
  const DenjoyMap& dj = golden_denjoy64();
  CHECK_THROWS_AS(dj.eval(dj.midpoint(64)), DomainRestricted);
  CHECK_NOTHROW(dj.eval(dj.midpoint(63)));
  CHECK_NOTHROW(dj.eval(dj.midpoint(-64)));
  // a dust point between two adjacent placed gaps
  const auto& gaps = dj.gaps_by_index();
  std::vector<Gap> by_pos = gaps;
  std::sort(by_pos.begin(), by_pos.end(), [](const Gap& l, const Gap& r) { return l.a < r.a; });
  double dust = 0.5 * (by_pos[0].a + by_pos[0].len + by_pos[1].a);
  REQUIRE(by_pos[0].a + by_pos[0].len < dust);
  CHECK_THROWS_AS(dj.eval(dust), DomainRestricted);
  CHECK(dj.gap_index(dust) == std::nullopt);
}

TEST_CASE("ordering must be resolvable at working precision", "[denjoy]") {
  // a value within 1e-13 of 1/3 collides {3 rho} with {0 rho}
  auto nearly_third = std::make_shared<IrrationalAngle>(
      IrrationalAngle::from_decimal("0.3333333333334333", 2, 256));
  CHECK_THROWS_AS(DenjoyMap::build(nearly_third, 8), OrderingUnresolvable);
}

TEST_CASE("orbit weights: telescoping closed form and chain rule agree", "[denjoy]") {
  const DenjoyMap& dj = golden_denjoy64();
  AtomicMeasure nu = orbit_weights(dj);
  CHECK(nu.S == Catch::Approx(5.0).margin(1e-10));
  CHECK(nu.route_discrepancy < 1e-10);
  CHECK(nu.atoms[64].w == Catch::Approx(0.2).margin(1e-15));  // w_0 = l_0
  CHECK(nu.tail_bound == Catch::Approx(2.0 * 1.2 / 67.0).margin(1e-15));
  CompensatedSum total;
  for (const Atom& a : nu.atoms) {
    CHECK(a.w > 0.0);
    total.add(a.w);
  }
  CHECK(total.value() == Catch::Approx(1.0 - nu.tail_bound).margin(1e-12));
  CHECK(total.value() <= 1.0);
}

TEST_CASE("cantor witness vanishes for bumps inside the gap", "[denjoy]") {
  const DenjoyMap& dj = golden_denjoy64();
  const Gap& g0 = dj.gap(0);
  TestFunction u = tf_gap_bump_symmetric(g0.a, g0.len, 1.0);
  CHECK(cantor_witness(dj, u) == 0.0);

  TestFunction anti = tf_gap_bump_antisymmetric(g0.a, g0.len, 5.0);
  CHECK(cantor_witness(dj, anti) == 0.0);

  // straddles the left endpoint: support leaks out of the gap
  TestFunction leak = tf_gap_bump_symmetric(g0.a - 0.5 * g0.len, g0.len, 1.0);
  CHECK_THROWS_AS(cantor_witness(dj, leak), SupportLeak);
}

TEST_CASE("wrapped circle map iterates the gap dynamics", "[denjoy]") {
  auto dj = std::make_shared<const DenjoyMap>(DenjoyMap::build(golden_angle(), 64));
  CircleMap f = make_circle_map(dj);
  IterateResult it = iterate(f, 7, dj->midpoint(-5));
  CHECK(wrap_unit(it.value) == Catch::Approx(dj->midpoint(2)).margin(1e-12));
  double expect_logd = std::log(GapLaw::length(2) / GapLaw::length(-5));
  CHECK(it.log_deriv == Catch::Approx(expect_logd).margin(1e-12));

  IterateResult back = iterate(f, -7, it.value);
  CHECK(wrap_unit(back.value) == Catch::Approx(dj->midpoint(-5)).margin(1e-10));

  // the lift displacement stays inside (0, 1)
  for (long long n : {-30LL, -3LL, 0LL, 17LL}) {
    double x = dj->midpoint(n);
    double d = f.lift(x) - x;
    CHECK(d > 0.0);
    CHECK(d < 1.0);
  }
}

TEST_CASE("table round trip reproduces the map bit-exactly", "[denjoy]") {
  const DenjoyMap& dj = golden_denjoy64();
  std::vector<Gap> table = dj.gaps_by_index();
  DenjoyMap copy = DenjoyMap::from_table(golden_angle(), 64, table);
  for (long long n : {-64LL, -7LL, 0LL, 13LL, 63LL}) {
    double x = dj.midpoint(n) + 0.25 * dj.gap(n).len;
    CHECK(copy.eval(x) == dj.eval(x));
    CHECK(copy.deriv(x) == dj.deriv(x));
  }
}

TEST_CASE("truncation must be meaningful", "[denjoy]") {
  CHECK_THROWS_AS(DenjoyMap::build(golden_angle(), 4), Error);
}
