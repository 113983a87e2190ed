#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rotlab {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Continued-fraction expansion hit the precision floor: the input is
/// indistinguishable from a rational at working precision. Carries the
/// partial quotients found so far.
class RationalDetected : public Error {
 public:
  RationalDetected(const std::string& what, std::vector<long long> partial)
      : Error(what), partial_quotients(std::move(partial)) {}
  std::vector<long long> partial_quotients;
};

/// A convergent index beyond the computed depth was requested.
class DepthExceeded : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested at a point outside the map's resolvable domain
/// (a Cantor-set point or an unplaced gap of a truncated construction).
class DomainRestricted : public Error {
 public:
  DomainRestricted(const std::string& what, double where)
      : Error(what), x(where) {}
  double x;
};

class InverseNotConverged : public Error {
 public:
  using Error::Error;
};

class TuneFailed : public Error {
 public:
  using Error::Error;
};

/// Two orbit points of the rotation collide at working precision, so the
/// circular order of {n*rho} cannot be resolved.
class OrderingUnresolvable : public Error {
 public:
  using Error::Error;
};

/// A test function claimed to be supported inside a gap is nonzero at a
/// gap endpoint.
class SupportLeak : public Error {
 public:
  using Error::Error;
};

class MeanNotZero : public Error {
 public:
  using Error::Error;
};

class SmallDenominator : public Error {
 public:
  using Error::Error;
};

class NoVarBound : public Error {
 public:
  using Error::Error;
};

/// CLI-level configuration error (unknown fields, malformed values).
class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

}  // namespace rotlab
