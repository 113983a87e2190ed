#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rotlab/angles.hpp"
#include "rotlab/errors.hpp"
#include "rotlab/numerics.hpp"

namespace rotlab {

// ---------------------------------------------------------------------------
// Concrete lift families, parameterized on the working real type so that
// long orbits can run in extended precision where needed.
// ---------------------------------------------------------------------------

template <class Real>
struct RotationLift {
  Real rho;
  Real lift(Real x) const { return x + rho; }
  Real deriv(Real) const { return Real(1); }
};

/// F(x) = x + a + eps * sin(2 pi x) / (2 pi), so DF = 1 + eps cos(2 pi x).
/// Requires eps in [0, 1) for DF > 0.
template <class Real>
struct ArnoldLift {
  Real a;
  Real eps;
  Real lift(Real x) const {
    using std::sin;
    return x + a + eps * sin(two_pi_v<Real> * x) / two_pi_v<Real>;
  }
  Real deriv(Real x) const {
    using std::cos;
    return Real(1) + eps * cos(two_pi_v<Real> * x);
  }
};

struct FourierMode {
  int m = 1;
  double sin_amp = 0.0;
  double cos_amp = 0.0;
};

/// h(x) = x + sum_m [ s_m sin(2 pi m x) + c_m cos(2 pi m x) ], a circle
/// diffeomorphism certified by sum_m 2 pi m (|s_m| + |c_m|) < 1.
template <class Real>
struct TrigDiffeo {
  std::vector<FourierMode> modes;

  Real value(Real x) const {
    using std::cos;
    using std::sin;
    Real r = x;
    for (const auto& md : modes) {
      Real t = two_pi_v<Real> * md.m * x;
      r += Real(md.sin_amp) * sin(t) + Real(md.cos_amp) * cos(t);
    }
    return r;
  }
  Real deriv(Real x) const {
    using std::cos;
    using std::sin;
    Real r = Real(1);
    for (const auto& md : modes) {
      Real t = two_pi_v<Real> * md.m * x;
      r += two_pi_v<Real> * md.m * (Real(md.sin_amp) * cos(t) - Real(md.cos_amp) * sin(t));
    }
    return r;
  }
  /// Certified bound on sup |h' - 1|.
  double deriv_perturbation_bound() const {
    double s = 0.0;
    for (const auto& md : modes)
      s += kTwoPi * md.m * (std::abs(md.sin_amp) + std::abs(md.cos_amp));
    return s;
  }
  double displacement_bound() const {
    double s = 0.0;
    for (const auto& md : modes) s += std::abs(md.sin_amp) + std::abs(md.cos_amp);
    return s;
  }
  /// h^{-1}(y) by guarded Newton from the bracket [y - amp, y + amp].
  Real inverse(Real y) const {
    double amp = displacement_bound() + 1e-12;
    Real lo = y - Real(amp), hi = y + Real(amp);
    Real x = y;
    for (int i = 0; i < 80; ++i) {
      Real f = value(x) - y;
      Real d = deriv(x);
      if (f > 0)
        hi = x;
      else
        lo = x;
      Real xn = x - f / d;
      if (!(xn > lo && xn < hi)) xn = (lo + hi) / 2;
      if (abs_real(xn - x) < Real(1e-16)) return xn;
      x = xn;
    }
    return x;
  }

 private:
  static Real abs_real(Real v) {
    using std::abs;
    return abs(v);
  }
};

/// f = h o R_rho o h^{-1}; rotation number is rho exactly.
template <class Real>
struct ConjugatedRotationLift {
  TrigDiffeo<Real> h;
  Real rho;
  Real lift(Real x) const {
    Real y = h.inverse(x);
    return h.value(y + rho);
  }
  Real deriv(Real x) const {
    Real y = h.inverse(x);
    return h.deriv(y + rho) / h.deriv(y);
  }
};

// ---------------------------------------------------------------------------
// Type-erased circle diffeomorphism working in double precision.
// ---------------------------------------------------------------------------

enum class Regularity { C1, C1bv, C2, Comega };

class DenjoyMap;  // defined in denjoy.hpp

struct FamilyInfo {
  enum class Kind { Rotation, Arnold, ConjugatedRotation, Denjoy };
  Kind kind = Kind::Rotation;
  double a = 0.0;    // Arnold offset
  double eps = 0.0;  // Arnold coupling
  std::vector<FourierMode> h_modes;
  std::shared_ptr<const DenjoyMap> denjoy;
  std::string label;
};

struct IterateResult {
  double value = 0.0;
  double log_deriv = 0.0;
};

/// A circle diffeomorphism represented by its lift, with a positive
/// derivative oracle. Immutable and freely shareable; evaluation is pure.
class CircleMap {
 public:
  double lift(double x) const { return lift_(x); }
  double deriv(double x) const { return deriv_(x); }

  /// F^{-1}(y): monotone bisection to 1e-14 with derivative polish.
  double inverse(double y) const {
    if (inverse_) return inverse_(y);
    RealFn g = lift_;
    RealFn dg = deriv_;
    double x = solve_increasing(g, y, y - 2.0, y + 1.0, 1e-15, &dg);
    if (std::abs(lift_(x) - y) > 1e-11)
      throw InverseNotConverged("lift inverse residual above tolerance");
    return x;
  }

  Regularity regularity() const { return regularity_; }
  const std::optional<double>& var_log_df() const { return var_log_df_; }
  const FamilyInfo& family() const { return family_; }

  bool has_angle() const { return angle_ != nullptr; }
  const IrrationalAngle& angle() const {
    if (!angle_) throw Error("map carries no rotation angle");
    return *angle_;
  }
  const AnglePtr& angle_ptr() const { return angle_; }

  // ---- factories -----------------------------------------------------

  static CircleMap rotation(AnglePtr rho) {
    CircleMap m;
    double r = rho->value();
    m.lift_ = [r](double x) { return x + r; };
    m.deriv_ = [](double) { return 1.0; };
    m.inverse_ = [r](double y) { return y - r; };
    m.regularity_ = Regularity::Comega;
    m.var_log_df_ = 0.0;
    m.family_.kind = FamilyInfo::Kind::Rotation;
    m.family_.label = "rotation(" + rho->name() + ")";
    m.angle_ = std::move(rho);
    return m;
  }

  static CircleMap arnold(double a, double eps, AnglePtr target = nullptr) {
    if (!(eps >= 0.0 && eps < 1.0))
      throw Error("arnold: coupling must lie in [0, 1)");
    CircleMap m;
    ArnoldLift<double> f{a, eps};
    m.lift_ = [f](double x) { return f.lift(x); };
    m.deriv_ = [f](double x) { return f.deriv(x); };
    m.regularity_ = Regularity::Comega;
    // Var(log DF) = 2 log((1+eps)/(1-eps)) in closed form.
    m.var_log_df_ = eps == 0.0 ? 0.0 : 2.0 * std::log((1.0 + eps) / (1.0 - eps));
    m.family_.kind = FamilyInfo::Kind::Arnold;
    m.family_.a = a;
    m.family_.eps = eps;
    m.family_.label = "arnold";
    m.angle_ = std::move(target);
    m.validate();
    return m;
  }

  static CircleMap conjugated_rotation(std::vector<FourierMode> modes, AnglePtr rho,
                                       int var_grid = 8192) {
    TrigDiffeo<double> h{std::move(modes)};
    if (h.deriv_perturbation_bound() >= 1.0)
      throw Error("conjugated_rotation: sup|h'-1| certificate fails, not a diffeomorphism");
    CircleMap m;
    ConjugatedRotationLift<double> f{h, rho->value()};
    m.lift_ = [f](double x) { return f.lift(x); };
    m.deriv_ = [f](double x) { return f.deriv(x); };
    m.regularity_ = Regularity::Comega;
    m.family_.kind = FamilyInfo::Kind::ConjugatedRotation;
    m.family_.h_modes = f.h.modes;
    m.family_.label = "conjugated_rotation(" + rho->name() + ")";
    m.angle_ = std::move(rho);
    m.var_log_df_ = estimate_var_log_df(m, var_grid);
    m.validate();
    return m;
  }

  /// Assemble from raw callables (used by the Denjoy wrapper).
  static CircleMap from_callables(RealFn lift, RealFn deriv, RealFn inverse,
                                  Regularity reg, std::optional<double> var,
                                  FamilyInfo info, AnglePtr rho) {
    CircleMap m;
    m.lift_ = std::move(lift);
    m.deriv_ = std::move(deriv);
    m.inverse_ = std::move(inverse);
    m.regularity_ = reg;
    m.var_log_df_ = var;
    m.family_ = std::move(info);
    m.angle_ = std::move(rho);
    return m;
  }

 private:
  CircleMap() = default;

  static double estimate_var_log_df(const CircleMap& m, int grid) {
    CompensatedSum tv;
    double prev = std::log(m.deriv(0.0));
    for (int i = 1; i <= grid; ++i) {
      double cur = std::log(m.deriv(static_cast<double>(i) / grid));
      tv.add(std::abs(cur - prev));
      prev = cur;
    }
    return tv.value();
  }

  void validate(int grid = 512) const {
    for (int i = 0; i < grid; ++i) {
      double x = static_cast<double>(i) / grid;
      if (!(deriv_(x) > 0.0)) throw Error("derivative not positive on sample grid");
      if (std::abs(lift_(x + 1.0) - lift_(x) - 1.0) > 1e-9)
        throw Error("lift equivariance F(x+1)=F(x)+1 fails on sample grid");
    }
    if (var_log_df_ && estimate_var_log_df(*this, grid) > *var_log_df_ * (1.0 + 1e-6))
      throw Error("sampled Var(log Df) exceeds the declared bound");
  }

  RealFn lift_;
  RealFn deriv_;
  RealFn inverse_;  // optional fast path
  Regularity regularity_ = Regularity::C1;
  std::optional<double> var_log_df_;
  FamilyInfo family_;
  AnglePtr angle_;
};

/// n-fold iterate of the lift together with log DF^n(x), the Birkhoff sum
/// of log DF along the orbit (compensated). Negative n uses the inverse.
inline IterateResult iterate(const CircleMap& f, long long n, double x) {
  IterateResult r{x, 0.0};
  CompensatedSum ld;
  if (n >= 0) {
    for (long long j = 0; j < n; ++j) {
      ld.add(std::log(f.deriv(r.value)));
      r.value = f.lift(r.value);
    }
  } else {
    for (long long j = 0; j < -n; ++j) {
      r.value = f.inverse(r.value);
      ld.add(-std::log(f.deriv(r.value)));
    }
  }
  r.log_deriv = ld.value();
  return r;
}

/// Total variation of log DF sampled on a uniform grid; converges to
/// Var(log DF) as the grid refines (exact once all extrema are sampled).
inline double var_log_deriv(const CircleMap& f, int grid) {
  CompensatedSum tv;
  double prev = std::log(f.deriv(0.0));
  for (int i = 1; i <= grid; ++i) {
    double cur = std::log(f.deriv(static_cast<double>(i) / grid));
    tv.add(std::abs(cur - prev));
    prev = cur;
  }
  return tv.value();
}

}  // namespace rotlab
