#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rotlab/circle_map.hpp"
#include "rotlab/errors.hpp"
#include "rotlab/numerics.hpp"
#include "rotlab/test_functions.hpp"

namespace rotlab {

/// S_n u(x) = sum_{j=0}^{n-1} u(f^j x), compensated.
inline double birkhoff_sum(const CircleMap& f, const TestFunction& u, long long n,
                           double x) {
  if (n < 1) throw Error("birkhoff_sum: n must be at least 1");
  CompensatedSum s;
  double v = x;
  for (long long j = 0; j < n; ++j) {
    s.add(u(v));
    v = f.lift(v);
  }
  return s.value();
}

struct MuMean {
  double value = 0.0;
  double error_bound = 0.0;
};

/// Invariant-measure mean via the q_k-Birkhoff average at x0. For BV test
/// functions the Denjoy-Koksma inequality bounds the error by Var(u)/q_k,
/// which works uniformly for every shipped family, including the singular
/// Denjoy measure.
inline MuMean mu_mean(const CircleMap& f, const TestFunction& u, int k, double x0 = 0.0) {
  if (!u.var_bound)
    throw NoVarBound("mu_mean requires a total-variation bound on the test function");
  long long q = f.angle().convergent(k).q;
  MuMean m;
  m.value = birkhoff_sum(f, u, q, x0) / static_cast<double>(q);
  m.error_bound = *u.var_bound / static_cast<double>(q);
  return m;
}

struct BirkhoffReport {
  int k = 0;
  long long q = 0;
  double sup_deviation = 0.0;
  int grid_size = 0;
  double mu_estimate = 0.0;
  double mu_error_bound = 0.0;
};

/// sup over the grid of |S_{q_k} u - q_k mu(u)| for k in [k_min, k_max].
/// mu(u) is estimated at depth k_max + 2. Grid sups are lower bounds of
/// the true sup; the experiments assert decay, not exact suprema.
inline std::vector<BirkhoffReport> corollary_experiment(const CircleMap& f,
                                                        const TestFunction& u,
                                                        int k_min, int k_max,
                                                        int grid, double x0 = 0.0) {
  if (!f.var_log_df() && f.regularity() == Regularity::C1)
    throw Error("corollary_experiment: map must carry a Var(log Df) bound");
  MuMean mu = mu_mean(f, u, k_max + 2, x0);
  std::vector<BirkhoffReport> out;
  for (int k = k_min; k <= k_max; ++k) {
    const auto& cv = f.angle().convergent(k);
    BirkhoffReport r;
    r.k = k;
    r.q = cv.q;
    r.grid_size = grid;
    r.mu_estimate = mu.value;
    r.mu_error_bound = mu.error_bound;
    double sup = 0.0;
    for (int i = 0; i < grid; ++i) {
      double x = static_cast<double>(i) / grid;
      double dev = std::abs(birkhoff_sum(f, u, cv.q, x) - cv.q * mu.value);
      if (dev > sup) sup = dev;
    }
    r.sup_deviation = sup;
    out.push_back(r);
  }
  return out;
}

struct HermanRow {
  int k = 0;
  long long q = 0;
  double c0_dev = 0.0;  // sup |f^{q_k}(x) - x - p_k|
  double c1_dev = 0.0;  // sup |Df^{q_k}(x) - 1|
};

/// C0 and C1 distance of f^{q_k} from the identity over a grid. The C1
/// column obeys the Denjoy bound exp(V) - 1 at every k.
inline std::vector<HermanRow> herman_check(const CircleMap& f, int k_min, int k_max,
                                           int grid) {
  if (f.regularity() == Regularity::C1 || f.regularity() == Regularity::C1bv)
    throw Error("herman_check: map must be at least C2");
  std::vector<HermanRow> out;
  for (int k = k_min; k <= k_max; ++k) {
    const auto& cv = f.angle().convergent(k);
    HermanRow row;
    row.k = k;
    row.q = cv.q;
    for (int i = 0; i < grid; ++i) {
      double x = static_cast<double>(i) / grid;
      IterateResult it = iterate(f, cv.q, x);
      row.c0_dev = std::max(row.c0_dev, std::abs(it.value - x - cv.p));
      row.c1_dev = std::max(row.c1_dev, std::abs(std::exp(it.log_deriv) - 1.0));
    }
    out.push_back(row);
  }
  return out;
}

}  // namespace rotlab
