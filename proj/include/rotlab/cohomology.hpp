#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rotlab/circle_map.hpp"
#include "rotlab/denjoy.hpp"
#include "rotlab/ergodic.hpp"
#include "rotlab/errors.hpp"
#include "rotlab/numerics.hpp"
#include "rotlab/test_functions.hpp"

namespace rotlab {

// ---------------------------------------------------------------------------
// Corrector sequence: w_k = 1 - (1/q_k) sum_{j=0}^{q_k-1} Df^j. Its
// Lebesgue mean vanishes identically because each Df^j integrates to 1,
// and it satisfies the exact identity
//   Df - 1 = (w_k o f) Df - w_k + (1/q_k)(Df^{q_k} - 1).
// ---------------------------------------------------------------------------

struct CorrectorSequence {
  int k = 0;
  long long q = 0;
  RealFn eval;
  double operator()(double x) const { return eval(x); }
};

inline CorrectorSequence w_hat(const CircleMap& f, int k) {
  CorrectorSequence w;
  w.k = k;
  w.q = f.angle().convergent(k).q;
  long long q = w.q;
  w.eval = [f, q](double x) {
    CompensatedSum s;
    double v = x;
    double log_prod = 0.0;
    s.add(1.0);  // Df^0
    for (long long j = 1; j < q; ++j) {
      log_prod += std::log(f.deriv(v));
      v = f.lift(v);
      s.add(std::exp(log_prod));
    }
    return 1.0 - s.value() / static_cast<double>(q);
  };
  return w;
}

inline double corrector_quadrature_mean(const CorrectorSequence& w, int grid = 4096) {
  return periodic_mean(w.eval, grid);
}

inline double corrector_sup(const CorrectorSequence& w, int grid = 1024) {
  double sup = 0.0;
  for (int i = 0; i < grid; ++i)
    sup = std::max(sup, std::abs(w.eval(static_cast<double>(i) / grid)));
  return sup;
}

/// Residual of the exact corrector identity at one point; pure roundoff.
inline double lemma_identity_residual(const CircleMap& f, int k, double x) {
  CorrectorSequence w = w_hat(f, k);
  double dfx = f.deriv(x);
  double fx = f.lift(x);
  IterateResult full = iterate(f, w.q, x);
  double dfq = std::exp(full.log_deriv);
  double lhs = dfx - 1.0;
  double rhs = w(fx) * dfx - w(x) + (dfq - 1.0) / static_cast<double>(w.q);
  return std::abs(lhs - rhs);
}

struct DefectReport {
  double sup_defect = 0.0;
  int grid = 0;
  std::string target;
  std::string candidate;
};

/// sup over the grid of |(w_k o f) Df - w_k - (Df - 1)|. By the corrector
/// identity this equals sup (1/q_k)|Df^{q_k} - 1|, so the Denjoy
/// inequality bounds it by (e^V - 1)/q_k.
inline DefectReport lemma_defect(const CircleMap& f, int k, int grid) {
  CorrectorSequence w = w_hat(f, k);
  DefectReport r;
  r.grid = grid;
  r.target = "Df-1";
  r.candidate = "w_hat(k=" + std::to_string(k) + ")";
  for (int i = 0; i < grid; ++i) {
    double x = static_cast<double>(i) / grid;
    double dfx = f.deriv(x);
    double d = std::abs(w(f.lift(x)) * dfx - w(x) - (dfx - 1.0));
    if (d > r.sup_defect) r.sup_defect = d;
  }
  return r;
}

inline double lemma_defect_bound(const CircleMap& f, int k) {
  if (!f.var_log_df()) throw Error("lemma_defect_bound: map carries no Var(log Df)");
  return (std::exp(*f.var_log_df()) - 1.0) / static_cast<double>(f.angle().convergent(k).q);
}

/// sup over the grid of |(w o f) Df - w - u'|, the derivative-level
/// coboundary residual.
inline DefectReport transfer_defect(const CircleMap& f, const RealFn& w,
                                    const RealFn& uprime, int grid,
                                    std::string candidate = "w",
                                    std::string target = "u'") {
  DefectReport r;
  r.grid = grid;
  r.candidate = std::move(candidate);
  r.target = std::move(target);
  for (int i = 0; i < grid; ++i) {
    double x = static_cast<double>(i) / grid;
    double d = std::abs(w(f.lift(x)) * f.deriv(x) - w(x) - uprime(x));
    if (d > r.sup_defect) r.sup_defect = d;
  }
  return r;
}

struct MeanCorrected {
  RealFn w;
  double c = 0.0;  // Lebesgue mean removed from the input
  int k = 0;
};

/// Zero-mean correction: subtract the Lebesgue mean c and add c * w_hat_k
/// back, which restores the transfer image up to (c/q_k)(Df^{q_k} - 1).
/// The output has zero Lebesgue mean and its transfer defect against any
/// target grows by at most |c| * lemma_defect(f, k).
inline MeanCorrected mean_correct(const CircleMap& f, const RealFn& w, int k,
                                  int grid = 4096) {
  MeanCorrected out;
  out.c = periodic_mean(w, grid);
  out.k = k;
  CorrectorSequence wk = w_hat(f, k);
  double c = out.c;
  out.w = [w, wk, c](double x) { return w(x) - c + c * wk(x); };
  return out;
}

struct C1Function {
  RealFn value;
  RealFn deriv;
};

/// v(x) = int_0^x w dl for a zero-mean w; v(0) = 0 and v is 1-periodic.
/// The derivative evaluator is w itself; values interpolate a corrected
/// cumulative trapezoid table with local Simpson refinement.
inline C1Function primitive(const RealFn& w, int grid = 4096) {
  double mean = periodic_mean(w, grid);
  if (std::abs(mean) > 1e-8)
    throw MeanNotZero("primitive requires |Lebesgue mean| < 1e-8, got " +
                      std::to_string(mean));
  auto table = std::make_shared<std::vector<double>>(cumulative_primitive_table(w, grid));
  C1Function v;
  v.value = [table, w, grid](double x) {
    double xx = wrap_unit(x);
    double t = xx * grid;
    int i = static_cast<int>(t);
    if (i >= grid) i = grid - 1;
    double a = static_cast<double>(i) / grid;
    double hloc = xx - a;
    // Simpson on [a, x] keeps the interpolation error far below the
    // table's accuracy.
    double seg = hloc / 6.0 * (w(a) + 4.0 * w(a + 0.5 * hloc) + w(xx));
    return (*table)[static_cast<size_t>(i)] + seg;
  };
  v.deriv = w;
  return v;
}

struct CoboundaryDefect {
  double c0 = 0.0;  // sup |v o f - v + c - u|
  double c1 = 0.0;  // sup |(v' o f) Df - v' - u'|
  double centering_c = 0.0;
  double max() const { return c0 > c1 ? c0 : c1; }
};

/// C1 distance of the coboundary v o f - v from the target u, with the
/// constant freedom resolved by centering against the invariant measure
/// (Birkhoff average at depth k_mu + 2).
inline CoboundaryDefect coboundary_defect_C1(const CircleMap& f, const C1Function& v,
                                             const C1Function& u, int grid,
                                             int k_mu = 8, double x0 = 0.0) {
  CoboundaryDefect r;
  long long q = f.angle().convergent(std::min(k_mu + 2, f.angle().depth())).q;
  {
    CompensatedSum s;
    double x = x0;
    for (long long j = 0; j < q; ++j) {
      s.add(u.value(x) - (v.value(f.lift(x)) - v.value(x)));
      x = f.lift(x);
    }
    r.centering_c = s.value() / static_cast<double>(q);
  }
  for (int i = 0; i < grid; ++i) {
    double x = static_cast<double>(i) / grid;
    double fx = f.lift(x);
    double dfx = f.deriv(x);
    r.c0 = std::max(r.c0, std::abs(v.value(fx) - v.value(x) + r.centering_c - u.value(x)));
    r.c1 = std::max(r.c1, std::abs(v.deriv(fx) * dfx - v.deriv(x) - u.deriv(x)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Constructive coboundary solver on (conjugated) rotations. For the rigid
// rotation the cohomological equation diagonalizes in Fourier modes:
// w(m) = u(m) / (e^{2 pi i m rho} - 1). A map conjugated to the rotation
// by h pulls the problem back through h and pushes the solution forward.
// ---------------------------------------------------------------------------

/// Trapezoid Fourier analysis: coefficients for m = 0..M of a 1-periodic
/// real function (spectrally accurate for smooth inputs).
inline std::vector<std::complex<double>> fourier_coefficients(const RealFn& g, int M,
                                                              int N = 4096) {
  std::vector<double> gv(static_cast<size_t>(N));
  for (int j = 0; j < N; ++j) gv[static_cast<size_t>(j)] = g(static_cast<double>(j) / N);
  std::vector<std::complex<double>> out(static_cast<size_t>(M) + 1);
  for (int m = 0; m <= M; ++m) {
    CompensatedSum re, im;
    for (int j = 0; j < N; ++j) {
      double t = -kTwoPi * m * j / static_cast<double>(N);
      re.add(gv[static_cast<size_t>(j)] * std::cos(t));
      im.add(gv[static_cast<size_t>(j)] * std::sin(t));
    }
    out[static_cast<size_t>(m)] = {re.value() / N, im.value() / N};
  }
  return out;
}

struct FourierSolution {
  int cutoff = 0;
  std::vector<std::complex<double>> w_modes;  // m = 0..cutoff, mode 0 is zero
  double tail_bound = 0.0;  // sum of |u(m)| dropped beyond the cutoff
  C1Function w;
};

/// Solve w o R_rho - w = u from the Fourier coefficients of u (m = 0..M_in,
/// real signal convention). Requires u(0) = 0; retains modes through M.
inline FourierSolution solve_rotation_coboundary(
    const std::vector<std::complex<double>>& u_hat, double rho, int M) {
  if (u_hat.empty()) throw Error("solve_rotation_coboundary: empty coefficients");
  if (std::abs(u_hat[0]) > 1e-10)
    throw MeanNotZero("solve_rotation_coboundary: zeroth Fourier coefficient must vanish");
  int m_in = static_cast<int>(u_hat.size()) - 1;
  int cutoff = std::min(M, m_in);
  FourierSolution sol;
  sol.cutoff = cutoff;
  sol.w_modes.assign(static_cast<size_t>(cutoff) + 1, {0.0, 0.0});
  for (int m = 1; m <= cutoff; ++m) {
    double t = kTwoPi * wrap_unit(m * rho);
    std::complex<double> denom = std::polar(1.0, t) - 1.0;
    if (std::abs(denom) < 1e-12)
      throw SmallDenominator("resonant mode m=" + std::to_string(m) +
                             " at the working precision");
    sol.w_modes[static_cast<size_t>(m)] = u_hat[static_cast<size_t>(m)] / denom;
  }
  CompensatedSum tail;
  for (int m = cutoff + 1; m <= m_in; ++m)
    tail.add(2.0 * std::abs(u_hat[static_cast<size_t>(m)]));
  sol.tail_bound = tail.value();

  auto modes = std::make_shared<std::vector<std::complex<double>>>(sol.w_modes);
  sol.w.value = [modes](double x) {
    CompensatedSum s;
    for (size_t m = 1; m < modes->size(); ++m) {
      double t = kTwoPi * static_cast<double>(m) * x;
      const auto& c = (*modes)[m];
      s.add(2.0 * (c.real() * std::cos(t) - c.imag() * std::sin(t)));
    }
    return s.value();
  };
  sol.w.deriv = [modes](double x) {
    CompensatedSum s;
    for (size_t m = 1; m < modes->size(); ++m) {
      double t = kTwoPi * static_cast<double>(m) * x;
      double wm = kTwoPi * static_cast<double>(m);
      const auto& c = (*modes)[m];
      s.add(-2.0 * wm * (c.real() * std::sin(t) + c.imag() * std::cos(t)));
    }
    return s.value();
  };
  return sol;
}

struct ConjugatedSolveResult {
  C1Function v;           // solves v o f - v = u - mu_constant
  double mu_constant = 0.0;  // invariant mean of u (pullback mode 0)
  double tail_bound = 0.0;
  FourierSolution base;
};

/// Constructive solution of v o f - v = u - mu(u) for f a (conjugated)
/// rotation: pull u back through h, solve on the rotation in Fourier
/// modes, and push the solution forward through h^{-1}.
inline ConjugatedSolveResult solve_conjugated_coboundary(const CircleMap& f,
                                                         const RealFn& u, int M,
                                                         int grid = 4096) {
  const FamilyInfo& fam = f.family();
  TrigDiffeo<double> h;
  if (fam.kind == FamilyInfo::Kind::ConjugatedRotation)
    h.modes = fam.h_modes;
  else if (fam.kind != FamilyInfo::Kind::Rotation)
    throw Error("solve_conjugated_coboundary: map must be a (conjugated) rotation");
  double rho = f.angle().value();

  RealFn pulled = [&h, &u](double y) { return u(h.value(y)); };
  auto coeffs = fourier_coefficients(pulled, M, grid);
  ConjugatedSolveResult out;
  out.mu_constant = coeffs[0].real();
  coeffs[0] = {0.0, 0.0};
  out.base = solve_rotation_coboundary(coeffs, rho, M);
  out.tail_bound = out.base.tail_bound;

  auto hh = std::make_shared<TrigDiffeo<double>>(h);
  C1Function g = out.base.w;
  out.v.value = [hh, g](double x) { return g.value(hh->inverse(x)); };
  out.v.deriv = [hh, g](double x) {
    double y = hh->inverse(x);
    return g.deriv(y) / hh->deriv(y);
  };
  return out;
}

// ---------------------------------------------------------------------------
// Automorphic measures and the invariant 1-distribution L(u) = int u' d nu.
// ---------------------------------------------------------------------------

struct AutomorphicReport {
  double max_defect = 0.0;
  double skipped_weight = 0.0;  // truncation-boundary atoms with unplaced images
  std::vector<double> per_test;
};

/// max over tests of |int phi d nu - int (phi o f)(Df)^s d nu|. Atoms
/// whose image falls outside the resolvable domain of a truncated map are
/// excluded from the pushforward sum and reported as skipped weight; for
/// the Denjoy measure the interior terms cancel by exact weight
/// telescoping and only boundary/tail terms remain.
inline AutomorphicReport automorphic_defect(const CircleMap& f, const AtomicMeasure& nu,
                                            double s,
                                            std::span<const TestFunction> tests) {
  AutomorphicReport rep;
  for (const TestFunction& phi : tests) {
    CompensatedSum lhs, rhs;
    double skipped = 0.0;
    for (const Atom& a : nu.atoms) {
      lhs.add(a.w * phi(a.x));
      try {
        double fx = wrap_unit(f.lift(a.x));
        double dfx = f.deriv(a.x);
        rhs.add(a.w * phi(fx) * std::pow(dfx, s));
      } catch (const DomainRestricted&) {
        skipped += a.w;
      }
    }
    double d = std::abs(lhs.value() - rhs.value());
    rep.per_test.push_back(d);
    rep.max_defect = std::max(rep.max_defect, d);
    rep.skipped_weight = std::max(rep.skipped_weight, skipped);
  }
  return rep;
}

/// L(u) = int u' d nu = sum_n w_n u'(x_n).
struct InvariantDistribution {
  AtomicMeasure nu;
  double operator()(const TestFunction& u) const {
    if (!u.has_derivative())
      throw Error("invariant distribution needs u' at the support points");
    CompensatedSum s;
    for (const Atom& a : nu.atoms) s.add(a.w * u.du(a.x));
    return s.value();
  }
};

inline double distribution_eval(const InvariantDistribution& L, const TestFunction& u) {
  return L(u);
}

struct InvarianceReport {
  double max_defect = 0.0;
  std::vector<double> per_test;
};

/// max over tests of |L(u o f) - L(u)|, using (u o f)' = (u' o f) Df along
/// the atoms. Bounded by the automorphic defect of nu applied to phi = u'.
inline InvarianceReport invariance_check(const InvariantDistribution& L,
                                         const CircleMap& f,
                                         std::span<const TestFunction> tests) {
  InvarianceReport rep;
  for (const TestFunction& u : tests) {
    if (!u.has_derivative()) throw Error("invariance_check needs u'");
    CompensatedSum direct, composed;
    for (const Atom& a : L.nu.atoms) {
      direct.add(a.w * u.du(a.x));
      try {
        double fx = wrap_unit(f.lift(a.x));
        composed.add(a.w * u.du(fx) * f.deriv(a.x));
      } catch (const DomainRestricted&) {
        // truncation boundary: counted in the propagated tail bound
      }
    }
    double d = std::abs(composed.value() - direct.value());
    rep.per_test.push_back(d);
    rep.max_defect = std::max(rep.max_defect, d);
  }
  return rep;
}

/// max over tests of |int v d nu - int v d lambda|: a quantitative witness
/// that the atomic automorphic measure is not Lebesgue.
inline double nu_vs_lambda(const AtomicMeasure& nu, std::span<const TestFunction> tests,
                           int grid = 4096) {
  double worst = 0.0;
  for (const TestFunction& v : tests) {
    CompensatedSum s;
    for (const Atom& a : nu.atoms) s.add(a.w * v(a.x));
    double lambda_mean = periodic_mean(v.u, grid);
    worst = std::max(worst, std::abs(s.value() - lambda_mean));
  }
  return worst;
}

}  // namespace rotlab
