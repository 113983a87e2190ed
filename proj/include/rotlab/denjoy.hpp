#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rotlab/angles.hpp"
#include "rotlab/circle_map.hpp"
#include "rotlab/errors.hpp"
#include "rotlab/numerics.hpp"
#include "rotlab/test_functions.hpp"

namespace rotlab {

// ---------------------------------------------------------------------------
// Gap law: lengths l_n = Z^{-1} / ((|n|+2)(|n|+3)) for n in Z, where
// Z = sum_n 1/((|n|+2)(|n|+3)) = 5/6 by telescoping. Then sum_n l_n = 1,
// l_0 = 1/5, the one-sided tail sums telescope to 1/(M+3), and the length
// ratios tend to 1 (the C1 requirement).
// ---------------------------------------------------------------------------
struct GapLaw {
  static constexpr double kZ = 5.0 / 6.0;
  static constexpr double kInvZ = 6.0 / 5.0;

  static double length(long long n) {
    double m = static_cast<double>(n < 0 ? -n : n);
    return kInvZ / ((m + 2.0) * (m + 3.0));
  }
  /// l_{n+1} / l_n.
  static double ratio(long long n) { return length(n + 1) / length(n); }
  /// Mass of the unplaced gaps: sum_{|n| > M} l_n = 2 Z^{-1} / (M+3).
  static double tail(long long M) { return 2.0 * kInvZ / (static_cast<double>(M) + 3.0); }
};

// Gap profile eta(s) = sin^2(pi s) + sin^2(2 pi s) with primitive
// H(s) = s - sin(2 pi s)/(4 pi) - sin(4 pi s)/(8 pi). Calibration:
// H(1) = 1, H(1/2) = 1/2, eta(1/2) = 1, eta(0) = eta(1) = 0, and eta is
// symmetric about 1/2. These identities make the gap maps send midpoints
// to midpoints with derivative exactly l_{n+1}/l_n there, so the orbit
// derivative cocycle telescopes in closed form.
inline double denjoy_profile(double s) {
  double s1 = std::sin(kPi * s);
  double s2 = std::sin(kTwoPi * s);
  return s1 * s1 + s2 * s2;
}
inline double denjoy_profile_primitive(double s) {
  return s - std::sin(kTwoPi * s) / (2.0 * kTwoPi) - std::sin(2.0 * kTwoPi * s) / (4.0 * kTwoPi);
}
/// sup_s eta(s) = 25/16, attained where cos(2 pi s) = -1/4.
inline constexpr double kProfileMax = 25.0 / 16.0;

struct Gap {
  long long n = 0;
  double a = 0.0;    // left endpoint on the circle
  double len = 0.0;
};

/// A C1 Denjoy counterexample with rotation number rho, truncated to the
/// gaps I_n with |n| <= M. Gaps are placed on the circle in the order of
/// the rotation orbit {n rho}; the unplaced mass tail(M) is distributed
/// between gaps proportionally to rotation distance, which keeps the
/// placed gaps disjoint and order-isomorphic to the orbit. On each gap,
///   g_n(x) = a_{n+1} + (x - a_n) + c_n l_n H((x - a_n)/l_n),
/// with c_n = l_{n+1}/l_n - 1, maps I_n onto I_{n+1} with derivative
/// 1 + c_n eta(.) that equals 1 at both endpoints. Points outside placed
/// gaps (Cantor dust or the truncation tail) are not evaluable and fail
/// loudly rather than interpolate.
class DenjoyMap {
 public:
  static DenjoyMap build(AnglePtr rho, long long M) {
    if (M < 8) throw Error("build_denjoy: truncation M must be at least 8");
    // Orbit ordering must be resolvable slightly past M (images of the
    // boundary gaps are still indexed).
    if (rho->depth() < 1) throw Error("build_denjoy: angle carries no convergents");
    DenjoyMap dj;
    dj.rho_ = std::move(rho);
    dj.M_ = M;

    const long long count = 2 * M + 1;
    std::vector<double> theta(static_cast<size_t>(count));
    for (long long n = -M; n <= M; ++n)
      theta[static_cast<size_t>(n + M)] = dj.rho_->orbit_point(n);

    std::vector<long long> order(static_cast<size_t>(count));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](long long i, long long j) {
      return theta[static_cast<size_t>(i)] < theta[static_cast<size_t>(j)];
    });
    for (size_t i = 0; i + 1 < order.size(); ++i) {
      double d = theta[static_cast<size_t>(order[i + 1])] - theta[static_cast<size_t>(order[i])];
      if (d < 1e-12)
        throw OrderingUnresolvable("two orbit points of {n rho} collide at working precision");
    }

    const double tail = GapLaw::tail(M);
    dj.gaps_by_n_.resize(static_cast<size_t>(count));
    CompensatedSum placed;
    for (size_t rank = 0; rank < order.size(); ++rank) {
      long long idx = order[rank];
      long long n = idx - M;
      Gap g;
      g.n = n;
      g.len = GapLaw::length(n);
      g.a = placed.value() + tail * theta[static_cast<size_t>(idx)];
      placed.add(g.len);
      dj.gaps_by_n_[static_cast<size_t>(n + M)] = g;
    }
    dj.rebuild_position_index();
    return dj;
  }

  /// Rebuild from a serialized gap table (bit-exact round trip).
  static DenjoyMap from_table(AnglePtr rho, long long M, std::vector<Gap> gaps) {
    if (gaps.size() != static_cast<size_t>(2 * M + 1))
      throw Error("denjoy table: expected 2M+1 gap records");
    DenjoyMap dj;
    dj.rho_ = std::move(rho);
    dj.M_ = M;
    dj.gaps_by_n_.resize(gaps.size());
    for (const Gap& g : gaps) {
      if (g.n < -M || g.n > M) throw Error("denjoy table: gap index out of range");
      dj.gaps_by_n_[static_cast<size_t>(g.n + M)] = g;
    }
    dj.rebuild_position_index();
    return dj;
  }

  long long truncation() const { return M_; }
  const IrrationalAngle& rho() const { return *rho_; }
  const AnglePtr& rho_ptr() const { return rho_; }

  const Gap& gap(long long n) const {
    if (n < -M_ || n > M_)
      throw DomainRestricted("gap index beyond truncation", static_cast<double>(n));
    return gaps_by_n_[static_cast<size_t>(n + M_)];
  }
  const std::vector<Gap>& gaps_by_index() const { return gaps_by_n_; }

  double midpoint(long long n) const {
    const Gap& g = gap(n);
    return g.a + 0.5 * g.len;
  }
  double x0() const { return midpoint(0); }

  /// Index n of the placed gap containing x (endpoints included).
  std::optional<long long> gap_index(double x) const {
    double xx = wrap_unit(x);
    auto it = std::upper_bound(by_position_.begin(), by_position_.end(), xx,
                               [](double v, const Gap& g) { return v < g.a; });
    if (it == by_position_.begin()) return std::nullopt;
    --it;
    if (xx <= it->a + it->len) return it->n;
    return std::nullopt;
  }

  /// g_n(x) for x in a placed gap whose image gap is also placed.
  double eval(double x) const {
    auto n = gap_index(x);
    if (!n)
      throw DomainRestricted("point lies outside every placed gap", x);
    if (*n + 1 > M_)
      throw DomainRestricted("image gap beyond truncation", x);
    const Gap& src = gap(*n);
    const Gap& dst = gap(*n + 1);
    double s = (wrap_unit(x) - src.a) / src.len;
    double c = GapLaw::ratio(*n) - 1.0;
    return dst.a + (wrap_unit(x) - src.a) + c * src.len * denjoy_profile_primitive(s);
  }

  /// Dg_n(x) = 1 + c_n eta((x - a_n)/l_n).
  double deriv(double x) const {
    auto n = gap_index(x);
    if (!n)
      throw DomainRestricted("point lies outside every placed gap", x);
    const Gap& src = gap(*n);
    double s = (wrap_unit(x) - src.a) / src.len;
    double c = GapLaw::ratio(*n) - 1.0;
    return 1.0 + c * denjoy_profile(s);
  }

  /// Inverse branch g_{m-1}^{-1} on the gap containing y.
  double inverse(double y) const {
    auto m = gap_index(y);
    if (!m)
      throw DomainRestricted("point lies outside every placed gap", y);
    if (*m - 1 < -M_)
      throw DomainRestricted("preimage gap beyond truncation", y);
    const Gap& src = gap(*m - 1);
    double yy = wrap_unit(y);
    RealFn g = [this](double x) { return eval(x); };
    RealFn dg = [this](double x) { return deriv(x); };
    return solve_increasing(g, yy, src.a, src.a + src.len, 1e-15, &dg);
  }

 private:
  void rebuild_position_index() {
    by_position_ = gaps_by_n_;
    std::sort(by_position_.begin(), by_position_.end(),
              [](const Gap& l, const Gap& r) { return l.a < r.a; });
    for (size_t i = 0; i + 1 < by_position_.size(); ++i) {
      if (by_position_[i].a + by_position_[i].len > by_position_[i + 1].a + 1e-15)
        throw Error("denjoy gaps overlap");
    }
    if (by_position_.back().a + by_position_.back().len > 1.0 + 1e-15)
      throw Error("denjoy gaps spill past the circle");
  }

  AnglePtr rho_;
  long long M_ = 0;
  std::vector<Gap> gaps_by_n_;    // indexed by n + M
  std::vector<Gap> by_position_;  // sorted by left endpoint
};

using DenjoyPtr = std::shared_ptr<const DenjoyMap>;

/// Wrap the truncated Denjoy map as a CircleMap (lift semantics with the
/// displacement in (0,1)); evaluation off the placed gaps throws.
inline CircleMap make_circle_map(DenjoyPtr dj) {
  auto lift = [dj](double x) {
    double xx = wrap_unit(x);
    double y = dj->eval(xx);
    double base = x - xx;
    return base + y + (y < xx ? 1.0 : 0.0);
  };
  auto deriv = [dj](double x) { return dj->deriv(wrap_unit(x)); };
  auto inverse = [dj](double y) {
    double yy = wrap_unit(y);
    double x = dj->inverse(yy);
    double base = y - yy;
    return base + x - (x > yy ? 1.0 : 0.0);
  };
  FamilyInfo info;
  info.kind = FamilyInfo::Kind::Denjoy;
  info.denjoy = dj;
  info.label = "denjoy(M=" + std::to_string(dj->truncation()) + ")";
  return CircleMap::from_callables(lift, deriv, inverse, Regularity::C1, std::nullopt,
                                   std::move(info), dj->rho_ptr());
}

// ---------------------------------------------------------------------------
// The atomic 1-automorphic measure carried by the orbit of x0.
// ---------------------------------------------------------------------------

struct Atom {
  long long n = 0;
  double x = 0.0;
  double w = 0.0;
};

/// nu = (1/S) sum_n Df^n(x0) delta_{f^n(x0)}, truncated to |n| <= M. The
/// calibrated profile telescopes Df^n(x0) to l_n/l_0 exactly, so S = 1/l_0
/// and w_n = l_n; the truncated atoms carry mass 1 - tail(M).
struct AtomicMeasure {
  std::vector<Atom> atoms;
  double S = 0.0;
  double tail_bound = 0.0;
  double total_weight = 0.0;
  /// Relative disagreement between the chain-rule route and the closed form.
  double route_discrepancy = 0.0;
};

/// Computes the weights two independent ways: (i) chain-rule products of
/// gap derivatives along the numerically iterated orbit of x0 (forward by
/// eval, backward by the inverse branch), completed by the closed-form
/// tail, and (ii) the telescoped lengths l_n directly. The two must agree
/// to 1e-10 in relative terms.
inline AtomicMeasure orbit_weights(const DenjoyMap& dj) {
  const long long M = dj.truncation();
  AtomicMeasure nu;
  nu.tail_bound = GapLaw::tail(M);
  nu.atoms.resize(static_cast<size_t>(2 * M + 1));

  const double l0 = GapLaw::length(0);
  // Route (i): chain rule along the actual orbit.
  std::vector<double> chain(static_cast<size_t>(2 * M + 1), 0.0);
  chain[static_cast<size_t>(M)] = 1.0;  // Df^0 = 1
  {
    double x = dj.x0();
    double prod = 1.0;
    for (long long n = 0; n < M; ++n) {
      prod *= dj.deriv(x);
      x = dj.eval(x);
      chain[static_cast<size_t>(n + 1 + M)] = prod;
    }
    x = dj.x0();
    prod = 1.0;
    for (long long n = 0; n > -M; --n) {
      x = dj.inverse(x);
      prod /= dj.deriv(x);
      chain[static_cast<size_t>(n - 1 + M)] = prod;
    }
  }
  CompensatedSum s_chain;
  for (double v : chain) s_chain.add(v);
  double S_chain = s_chain.value() + nu.tail_bound / l0;  // closed-form tail completion
  double S_closed = 1.0 / l0;
  nu.route_discrepancy = std::abs(S_chain - S_closed) / S_closed;
  for (long long n = -M; n <= M; ++n) {
    double closed = GapLaw::length(n) / l0;
    double got = chain[static_cast<size_t>(n + M)];
    nu.route_discrepancy =
        std::max(nu.route_discrepancy, std::abs(got - closed) / closed);
  }
  if (nu.route_discrepancy > 1e-10)
    throw Error("orbit weight routes disagree beyond 1e-10");

  nu.S = S_closed;
  CompensatedSum total;
  for (long long n = -M; n <= M; ++n) {
    Atom a;
    a.n = n;
    a.x = dj.midpoint(n);
    a.w = GapLaw::length(n);  // Df^n(x0)/S = l_n
    nu.atoms[static_cast<size_t>(n + M)] = a;
    total.add(a.w);
  }
  nu.total_weight = total.value();
  return nu;
}

/// Mean of u against the invariant measure for a test function supported
/// strictly inside the open gap I_0: the support of the invariant measure
/// is the Cantor set, disjoint from the open gap, so the mean is exactly
/// zero. Checked by asserting zero endpoint samples and a Birkhoff average
/// along a placed orbit segment staying within the Denjoy-Koksma envelope.
inline double cantor_witness(const DenjoyMap& dj, const TestFunction& u,
                             int cross_check_k = 8, long long start_gap = 3) {
  const Gap& g0 = dj.gap(0);
  if (u(g0.a) != 0.0 || u(g0.a + g0.len) != 0.0)
    throw SupportLeak("test function nonzero at a gap endpoint sample");
  // Birkhoff cross-check: the orbit of a midpoint never re-enters I_0 in
  // forward time, so the average must sit inside Var(u)/q_k.
  const auto& q = dj.rho().convergent(cross_check_k).q;
  if (start_gap + q > dj.truncation())
    throw Error("cantor_witness: cross-check orbit would leave the placed gaps");
  double x = dj.midpoint(start_gap);
  CompensatedSum sum;
  for (long long j = 0; j < q; ++j) {
    sum.add(u(x));
    x = dj.eval(x);
  }
  double avg = std::abs(sum.value()) / static_cast<double>(q);
  double envelope = (u.var_bound ? *u.var_bound : 0.0) / static_cast<double>(q) + 1e-12;
  if (avg > envelope)
    throw Error("cantor_witness: Birkhoff cross-check exceeded the envelope");
  return 0.0;
}

}  // namespace rotlab
