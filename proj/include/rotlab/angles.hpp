#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rotlab/errors.hpp"

namespace rotlab {

using mp_real = boost::multiprecision::number<boost::multiprecision::gmp_float<0>>;

inline unsigned bits_to_digits10(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30103)) + 2;
}

/// One rational approximation p/q of an angle. `side` is the sign of
/// (rho - p/q); consecutive convergents alternate sides.
struct Convergent {
  int k = 0;
  long long p = 0;
  long long q = 1;
  int side = 0;
};

/// Continued-fraction expansion of x in (0, 1):
/// x = 1/(a_1 + 1/(a_2 + ...)). Throws RationalDetected when the
/// remainder underflows 2^(-precision/2) before `depth` terms.
inline std::vector<long long> cf_expand(const mp_real& x0, int depth) {
  if (!(x0 > 0 && x0 < 1))
    throw Error("cf_expand: input must lie strictly in (0, 1)");
  if (depth < 1) throw Error("cf_expand: depth must be positive");
  const unsigned digits10 = x0.precision();
  // 2^(-bits/2) expressed through decimal digits of the working value.
  mp_real floor_eps = pow(mp_real(10), -static_cast<int>(digits10 / 2));
  std::vector<long long> out;
  out.reserve(depth);
  mp_real x = x0;
  for (int i = 0; i < depth; ++i) {
    mp_real inv = 1 / x;
    mp_real a = floor(inv);
    if (a > mp_real(1e15))
      throw RationalDetected("cf_expand: quotient overflow, value is rational at working precision",
                             out);
    out.push_back(a.convert_to<long long>());
    mp_real rem = inv - a;
    if (rem < floor_eps)
      throw RationalDetected("cf_expand: remainder underflow, value is rational at working precision",
                             out);
    x = rem;
  }
  return out;
}

namespace detail {
inline long long checked_fma(long long a, long long b, long long c) {
  __int128 r = static_cast<__int128>(a) * b + c;
  if (r > static_cast<__int128>(0x3FFFFFFFFFFFFFFFLL))
    throw DepthExceeded("convergent denominators overflow 63-bit range");
  return static_cast<long long>(r);
}
}  // namespace detail

/// Fold partial quotients into the convergent table by the standard
/// recurrence p_k = a_k p_{k-1} + p_{k-2}, q_k = a_k q_{k-1} + q_{k-2}.
inline std::vector<Convergent> convergents_from_cf(std::span<const long long> cf) {
  if (cf.empty()) throw Error("convergents_from_cf: empty quotient sequence");
  std::vector<Convergent> out;
  out.reserve(cf.size());
  long long pm1 = 1, qm1 = 0;  // index k-2 seed
  long long p0 = 0, q0 = 1;    // index k-1 seed
  for (size_t i = 0; i < cf.size(); ++i) {
    if (cf[i] < 1) throw Error("convergents_from_cf: partial quotients must be >= 1");
    long long p = detail::checked_fma(cf[i], p0, pm1);
    long long q = detail::checked_fma(cf[i], q0, qm1);
    out.push_back({static_cast<int>(i) + 1, p, q, 0});
    pm1 = p0; qm1 = q0;
    p0 = p; q0 = q;
  }
  return out;
}

/// Reconstruct the value represented by the quotients, folding bottom-up.
inline mp_real fold_cf(std::span<const long long> cf) {
  if (cf.empty()) throw Error("fold_cf: empty quotient sequence");
  mp_real t = mp_real(cf.back());
  for (size_t i = cf.size() - 1; i-- > 0;) t = mp_real(cf[i]) + 1 / t;
  return 1 / t;
}

/// An irrational rotation number with its continued fraction and certified
/// convergents. Immutable after construction; safe to share across threads.
class IrrationalAngle {
 public:
  enum class Exactness { QuadraticPeriodic, Numeric };

  static constexpr int kDefaultDepth = 30;
  static constexpr unsigned kDefaultPrecisionBits = 256;

  /// (sqrt(5)-1)/2, expansion [1,1,1,...]. Depth is not limited by
  /// numerics since the expansion is known exactly.
  static IrrationalAngle golden(int depth = kDefaultDepth,
                                unsigned precision_bits = kDefaultPrecisionBits) {
    unsigned bits = adequate_bits(precision_bits, depth, 1);
    mp_real::default_precision(bits_to_digits10(bits));
    mp_real v = (sqrt(mp_real(5)) - 1) / 2;
    return IrrationalAngle("golden", v, std::vector<long long>(depth, 1), bits,
                           Exactness::QuadraticPeriodic);
  }

  /// sqrt(2)-1, expansion [2,2,2,...].
  static IrrationalAngle sqrt2_minus_one(int depth = kDefaultDepth,
                                         unsigned precision_bits = kDefaultPrecisionBits) {
    unsigned bits = adequate_bits(precision_bits, depth, 2);
    mp_real::default_precision(bits_to_digits10(bits));
    mp_real v = sqrt(mp_real(2)) - 1;
    return IrrationalAngle("sqrt2m1", v, std::vector<long long>(depth, 2), bits,
                           Exactness::QuadraticPeriodic);
  }

  /// Expand a decimal literal at the given working precision. Throws
  /// RationalDetected if the digits cannot support `depth` quotients.
  static IrrationalAngle from_decimal(const std::string& decimal,
                                      int depth = kDefaultDepth,
                                      unsigned precision_bits = kDefaultPrecisionBits) {
    mp_real::default_precision(bits_to_digits10(precision_bits));
    mp_real v(decimal);
    if (!(v > 0 && v < 1)) throw Error("angle must lie strictly in (0, 1)");
    return IrrationalAngle(decimal, v, cf_expand(v, depth), precision_bits,
                           Exactness::Numeric);
  }

  static IrrationalAngle from_value(const mp_real& v, int depth,
                                    unsigned precision_bits = kDefaultPrecisionBits,
                                    std::string name = "numeric") {
    if (!(v > 0 && v < 1)) throw Error("angle must lie strictly in (0, 1)");
    return IrrationalAngle(std::move(name), v, cf_expand(v, depth), precision_bits,
                           Exactness::Numeric);
  }

  const std::string& name() const { return name_; }
  double value() const { return value_.convert_to<double>(); }
  const mp_real& value_mp() const { return value_; }
  const std::vector<long long>& cf() const { return cf_; }
  const std::vector<Convergent>& convergents() const { return conv_; }
  int depth() const { return static_cast<int>(conv_.size()); }
  unsigned precision_bits() const { return precision_bits_; }
  Exactness exactness() const { return exactness_; }

  /// k is 1-based; throws DepthExceeded past the computed range.
  const Convergent& convergent(int k) const {
    if (k < 1 || k > depth())
      throw DepthExceeded("convergent index " + std::to_string(k) +
                          " outside computed depth " + std::to_string(depth()));
    return conv_[static_cast<size_t>(k) - 1];
  }

  /// |q_k * rho - p_k|, evaluated at full working precision.
  double approximation_error(int k) const {
    const Convergent& c = convergent(k);
    mp_real e = abs(value_ * c.q - c.p);
    return e.convert_to<double>();
  }

  /// Fractional part of n * rho in [0, 1), at full working precision.
  double orbit_point(long long n) const {
    mp_real t = value_ * n;
    t -= floor(t);
    return t.convert_to<double>();
  }

 private:
  IrrationalAngle(std::string name, mp_real value, std::vector<long long> cf,
                  unsigned bits, Exactness ex)
      : name_(std::move(name)),
        value_(std::move(value)),
        cf_(std::move(cf)),
        precision_bits_(bits),
        exactness_(ex) {
    conv_ = convergents_from_cf(cf_);
    for (auto& c : conv_) {
      mp_real e = value_ * c.q - c.p;
      c.side = e > 0 ? 1 : (e < 0 ? -1 : 0);
      if (c.side == 0)
        throw Error("angle equals one of its convergents; not irrational at working precision");
    }
    check_invariants();
  }

  // Working precision rule: at least 2*log2(q_K) + 64 bits. q_K for a
  // periodic expansion with quotient a grows like ((a+sqrt(a^2+4))/2)^K.
  static unsigned adequate_bits(unsigned requested, int depth, long long a) {
    double growth = std::log2((a + std::sqrt(static_cast<double>(a) * a + 4)) / 2);
    unsigned needed = static_cast<unsigned>(2 * growth * depth) + 64;
    return std::max(requested, needed);
  }

  void check_invariants() const {
    for (size_t i = 0; i + 1 < conv_.size(); ++i) {
      if (conv_[i + 1].q <= conv_[i].q)
        throw Error("convergent denominators not strictly increasing");
    }
    long long pm1 = 0, qm1 = 1;  // the k=0 pair p_0/q_0 = 0/1
    for (const auto& c : conv_) {
      __int128 det = static_cast<__int128>(c.p) * qm1 - static_cast<__int128>(pm1) * c.q;
      long long expect = (c.k % 2 == 1) ? 1 : -1;
      if (det != expect) throw Error("convergent determinant identity violated");
      pm1 = c.p; qm1 = c.q;
    }
  }

  std::string name_;
  mp_real value_;
  std::vector<long long> cf_;
  std::vector<Convergent> conv_;
  unsigned precision_bits_;
  Exactness exactness_;
};

using AnglePtr = std::shared_ptr<const IrrationalAngle>;

}  // namespace rotlab
