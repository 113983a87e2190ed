#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rotlab/angles.hpp"
#include "rotlab/circle_map.hpp"
#include "rotlab/errors.hpp"
#include "rotlab/numerics.hpp"

namespace rotlab {

// ---------------------------------------------------------------------------
// Sign certificates. For an orientation-preserving lift F and a rational
// p/q:   F^q - id - p > 0 everywhere  =>  rho(F) > p/q,
//        F^q - id - p < 0 everywhere  =>  rho(F) < p/q,
// and a sign change forces rho(F) = p/q. Grid samples give the grid-level
// version of these certificates.
// ---------------------------------------------------------------------------

/// F^q(x) - x - p with the orbit kept wrapped in [0,1) and the winding
/// tracked as an exact integer, so the small displacement survives long
/// orbits without cancellation.
template <class Real, class Lift>
Real wrapped_displacement(const Lift& f, long long q, long long p, Real x) {
  using std::floor;
  Real y = wrap_unit(x);
  const Real y0 = y;
  long long winding = 0;
  for (long long j = 0; j < q; ++j) {
    Real z = f.lift(y);
    Real fl = floor(z);
    winding += static_cast<long long>(fl);
    y = z - fl;
    if (y >= Real(1)) { y -= Real(1); ++winding; }
    if (y < Real(0)) { y += Real(1); --winding; }
  }
  return (y - y0) + Real(winding - p);
}

enum class SignTest { Positive, Negative, Straddle, BelowNoise };

template <class Real, class Lift>
SignTest displacement_sign(const Lift& f, long long q, long long p, int samples) {
  const Real noise = Real(64) * Real(q) * std::numeric_limits<Real>::epsilon();
  bool pos = false, neg = false, weak = false;
  for (int i = 0; i < samples; ++i) {
    Real d = wrapped_displacement<Real>(f, q, p, Real(i) / Real(samples));
    if (d > noise)
      pos = true;
    else if (d < -noise)
      neg = true;
    else
      weak = true;
  }
  if (pos && neg) return SignTest::Straddle;
  if (weak) return SignTest::BelowNoise;
  return pos ? SignTest::Positive : SignTest::Negative;
}

/// Where the rotation number of a trial map sits relative to a target
/// angle, decided by convergent sign tests.
enum class SideOfTarget { Below, Matches, Above };

struct RotationCertificate {
  int certified_k = 0;   // all convergents through this index certified
  double lo = 0.0;       // best certified rational bounds around rho(f)
  double hi = 1.0;
  long long q_lo = 1, p_lo = 0;
  long long q_hi = 1, p_hi = 1;
  double midpoint() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
};

/// Runs the convergent sign tests of `target` against the trial lift, in
/// depth order, up to k_max. A failed test reveals which side of the
/// target the trial's rotation number lies on; passing them all certifies
/// the rotation number inside the final convergent bracket.
template <class Real, class Lift>
SideOfTarget classify_against(const Lift& f, const IrrationalAngle& target, int k_max,
                              int samples, RotationCertificate* cert = nullptr) {
  RotationCertificate c;
  for (int k = 1; k <= k_max; ++k) {
    const Convergent& cv = target.convergent(k);
    // side > 0 means p/q < target, so a passing trial must displace upward.
    int expected = cv.side > 0 ? 1 : -1;
    int deep_samples = cv.q > 10000 ? std::min(samples, 4) : samples;
    SignTest s = displacement_sign<Real>(f, cv.q, cv.p, deep_samples);
    if (s == SignTest::Straddle || s == SignTest::BelowNoise) {
      // rho(trial) is (indistinguishable from) p_k/q_k, which is a definite
      // side of the irrational target.
      if (cert) *cert = c;
      return cv.side > 0 ? SideOfTarget::Below : SideOfTarget::Above;
    }
    int got = s == SignTest::Positive ? 1 : -1;
    if (got != expected) {
      if (cert) *cert = c;
      return got > 0 ? SideOfTarget::Above : SideOfTarget::Below;
    }
    double ratio = static_cast<double>(cv.p) / static_cast<double>(cv.q);
    if (expected > 0) {
      c.lo = ratio; c.p_lo = cv.p; c.q_lo = cv.q;
    } else {
      c.hi = ratio; c.p_hi = cv.p; c.q_hi = cv.q;
    }
    c.certified_k = k;
  }
  if (cert) *cert = c;
  return SideOfTarget::Matches;
}

struct TuneOptions {
  int samples = 8;
  long long q_cap = 400000;  // deepest convergent denominator used
  int max_iterations = 300;
};

struct TuneResult {
  std::optional<CircleMap> map;
  double a_star = 0.0;
  double eps = 0.0;
  RotationCertificate certificate;
  int iterations = 0;
  int certificate_depth = 0;  // depth the sign certificates were verified at
};

namespace detail {
inline int deepest_usable_k(const IrrationalAngle& angle, long long q_cap) {
  int k = 0;
  for (const auto& c : angle.convergents()) {
    if (c.q > q_cap) break;
    k = c.k;
  }
  return k;
}
}  // namespace detail

/// Tune the Arnold offset until the map passes the target's convergent
/// sign certificates. Monotonicity of the rotation number in the offset
/// drives a bisection; failed certificates supply the search direction.
/// Orbits run in extended precision for the deep denominators.
inline TuneResult tune_arnold(double eps, const AnglePtr& target, int certificate_depth,
                              TuneOptions opt = {}) {
  using Real = long double;
  if (!(eps >= 0.0 && eps < 1.0)) throw Error("tune_arnold: coupling must lie in [0, 1)");
  int k_deep = detail::deepest_usable_k(*target, opt.q_cap);
  if (certificate_depth > k_deep)
    throw TuneFailed("requested certificate depth exceeds usable convergents (q cap " +
                     std::to_string(opt.q_cap) + ")");

  TuneResult out;
  out.eps = eps;
  if (eps == 0.0) {
    out.a_star = target->value();
    out.map = CircleMap::arnold(out.a_star, 0.0, target);
    ArnoldLift<Real> fl{static_cast<Real>(out.a_star), 0.0L};
    classify_against<Real>(fl, *target, k_deep, opt.samples, &out.certificate);
    out.certificate_depth = std::min(k_deep, out.certificate.certified_k);
    return out;
  }

  const double span = eps / kTwoPi;
  Real lo = static_cast<Real>(target->value() - span) - Real(1e-9);
  Real hi = static_cast<Real>(target->value() + span) + Real(1e-9);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Real mid = (lo + hi) / 2;
    ArnoldLift<Real> trial{mid, static_cast<Real>(eps)};
    RotationCertificate cert;
    SideOfTarget side = classify_against<Real>(trial, *target, k_deep, opt.samples, &cert);
    if (side == SideOfTarget::Matches) {
      if (cert.certified_k < certificate_depth)
        throw TuneFailed("certificate shallower than requested depth");
      out.a_star = static_cast<double>(mid);
      out.iterations = it;
      out.certificate = cert;
      out.certificate_depth = cert.certified_k;
      out.map = CircleMap::arnold(out.a_star, eps, target);
      return out;
    }
    if (side == SideOfTarget::Below)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < Real(4) * std::numeric_limits<Real>::epsilon() * (abs(mid) + Real(1)))
      throw TuneFailed("offset bracket collapsed without certificate");
  }
  throw TuneFailed("iteration budget exhausted without certificate");
}

// ---------------------------------------------------------------------------
// Target-free measurement: Stern-Brocot (mediant) descent. Each mediant
// sign test either refines the certified bracket or detects a rational
// rotation number. The descent path reproduces the continued fraction of
// rho(f), so the bracket endpoints are its convergents.
// ---------------------------------------------------------------------------

struct RotationMeasurement {
  double lo = 0.0, hi = 1.0;
  long long p_lo = 0, q_lo = 1, p_hi = 1, q_hi = 1;
  int convergent_count = 0;  // CF terms resolved along the descent
  bool rational = false;     // sign test straddled: rho = p/q exactly
  long long p_rat = 0, q_rat = 1;
  double midpoint() const {
    if (rational) return static_cast<double>(p_rat) / static_cast<double>(q_rat);
    return 0.5 * (lo + hi);
  }
};

struct LiftAdapter {
  const CircleMap* m;
  double lift(double x) const { return m->lift(x); }
};

inline RotationMeasurement measure_rotation(const CircleMap& f, int max_convergents,
                                            long long q_cap = 400000, int samples = 8) {
  RotationMeasurement r;
  LiftAdapter ad{&f};
  {
    SignTest s0 = displacement_sign<double>(ad, 1, 0, samples);
    SignTest s1 = displacement_sign<double>(ad, 1, 1, samples);
    if (s0 != SignTest::Positive || s1 != SignTest::Negative)
      throw Error("measure_rotation: rotation number not strictly inside (0, 1)");
  }
  int direction = 0;  // sign of the previous refinement; a flip ends a CF run
  while (true) {
    long long p = r.p_lo + r.p_hi;
    long long q = r.q_lo + r.q_hi;
    if (q > q_cap) break;
    int deep_samples = q > 10000 ? std::min(samples, 4) : samples;
    SignTest s = displacement_sign<double>(ad, q, p, deep_samples);
    if (s == SignTest::Straddle || s == SignTest::BelowNoise) {
      r.rational = true;
      r.p_rat = p;
      r.q_rat = q;
      r.lo = r.hi = static_cast<double>(p) / static_cast<double>(q);
      break;
    }
    int step = s == SignTest::Positive ? 1 : -1;
    if (step != direction) {
      if (r.convergent_count >= max_convergents) break;
      direction = step;
      ++r.convergent_count;
    }
    if (step > 0) {
      r.p_lo = p; r.q_lo = q;
    } else {
      r.p_hi = p; r.q_hi = q;
    }
  }
  if (!r.rational) {
    r.lo = static_cast<double>(r.p_lo) / static_cast<double>(r.q_lo);
    r.hi = static_cast<double>(r.p_hi) / static_cast<double>(r.q_hi);
  }
  return r;
}

}  // namespace rotlab
