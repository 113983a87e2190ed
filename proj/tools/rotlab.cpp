// Experiment runner: every subcommand resolves its configuration, computes
// one experiment, and emits a deterministic CSV or JSON report (stdout or
// --out). Exit codes: 0 ok, 1 tolerance failure (report still written),
// 2 invalid configuration, 3 I/O failure.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rotlab/angles.hpp"
#include "rotlab/circle_map.hpp"
#include "rotlab/cohomology.hpp"
#include "rotlab/denjoy.hpp"
#include "rotlab/ergodic.hpp"
#include "rotlab/io.hpp"
#include "rotlab/rotation_number.hpp"
#include "rotlab/test_functions.hpp"

namespace {

using namespace rotlab;

class ToleranceFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOpts {
  std::string out;
  unsigned precision_bits = IrrationalAngle::kDefaultPrecisionBits;
  double tol_scale = 1.0;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--out", c.out, "write the report to a file instead of stdout");
  cmd->add_option("--precision-bits", c.precision_bits, "working precision for angles");
  cmd->add_option("--tol-scale", c.tol_scale, "scale factor on tolerance thresholds");
}

void emit(const CommonOpts& c, const std::string& payload) {
  if (c.out.empty()) {
    std::cout << payload;
    if (payload.empty() || payload.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw std::ios_base::failure("cannot open output file '" + c.out + "'");
  f << payload;
  if (payload.empty() || payload.back() != '\n') f << '\n';
  if (!f) throw std::ios_base::failure("write failed for '" + c.out + "'");
}

std::string csv_report(const ordered_json& config, const std::string& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  os << "# config: " << config.dump() << "\n" << header << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

void parse_k_range(const std::string& spec, int& kmin, int& kmax) {
  auto dots = spec.find("..");
  if (dots == std::string::npos)
    throw ConfigInvalid("--k expects a range like 4..10, got '" + spec + "'");
  try {
    kmin = std::stoi(spec.substr(0, dots));
    kmax = std::stoi(spec.substr(dots + 2));
  } catch (const std::exception&) {
    throw ConfigInvalid("--k expects integer endpoints, got '" + spec + "'");
  }
  if (kmin < 1 || kmax < kmin) throw ConfigInvalid("--k range is empty or negative");
}

TestFunction test_function_by_name(const std::string& name, const CircleMap& map) {
  if (name == "cos") return tf_fourier(1, true);
  if (name == "sin") return tf_fourier(1, false);
  if (name == "cos2") return tf_fourier(2, true);
  if (name == "sin2") return tf_fourier(2, false);
  if (name == "one") return tf_constant(1.0);
  if (name == "logdf") return tf_log_deriv(map);
  throw ConfigInvalid("unknown test function '" + name +
                      "' (expected cos, sin, cos2, sin2, one, logdf)");
}

// ---------------------------------------------------------------------------

int run_cf(const std::string& angle_spec, int depth, const CommonOpts& c) {
  AnglePtr rho = angle_from_spec(angle_spec, depth, c.precision_bits);
  ordered_json arr = ordered_json::array();
  for (const Convergent& cv : rho->convergents()) {
    ordered_json row;
    row["k"] = cv.k;
    row["a"] = rho->cf()[static_cast<size_t>(cv.k) - 1];
    row["p"] = cv.p;
    row["q"] = cv.q;
    row["err"] = rho->approximation_error(cv.k);
    arr.push_back(row);
  }
  emit(c, arr.dump(2));
  return 0;
}

int run_rotnum(const std::string& map_arg, int depth, long long q_cap,
               const CommonOpts& c) {
  ordered_json spec = load_json_argument(map_arg);
  CircleMap map = map_from_json(spec, c.precision_bits);
  RotationMeasurement m = measure_rotation(map, depth, q_cap);
  ordered_json j;
  j["config"] = ordered_json{{"command", "rotnum"}, {"map", spec}, {"depth", depth},
                             {"q_cap", q_cap}};
  if (map.family().kind == FamilyInfo::Kind::Arnold) {
    j["a"] = map.family().a;
    j["eps"] = map.family().eps;
  }
  j["certified_k"] = m.convergent_count;
  j["rho_interval"] = {m.lo, m.hi};
  j["rho_midpoint"] = m.midpoint();
  j["rational"] = m.rational;
  if (m.rational) {
    j["p"] = m.p_rat;
    j["q"] = m.q_rat;
  }
  emit(c, j.dump(2));
  return 0;
}

int run_tune(const std::string& angle_spec, double eps, int depth, int samples,
             long long q_cap, const CommonOpts& c) {
  AnglePtr target = angle_from_spec(angle_spec, IrrationalAngle::kDefaultDepth,
                                    c.precision_bits);
  TuneOptions opt;
  opt.samples = samples;
  opt.q_cap = q_cap;
  TuneResult r = tune_arnold(eps, target, depth, opt);
  // a loadable Arnold map spec carrying its certificate
  ordered_json j;
  j["family"] = "arnold";
  j["a"] = r.a_star;
  j["eps"] = r.eps;
  j["rho"] = angle_spec;
  j["certified_k"] = r.certificate_depth;
  j["rho_interval"] = {r.certificate.lo, r.certificate.hi};
  emit(c, j.dump(2));
  return 0;
}

int run_lemma(const std::string& map_arg, const std::string& k_range, int grid,
              const CommonOpts& c) {
  ordered_json spec = load_json_argument(map_arg);
  CircleMap map = map_from_json(spec, c.precision_bits);
  int kmin = 0, kmax = 0;
  parse_k_range(k_range, kmin, kmax);
  ordered_json config{{"command", "lemma"}, {"map", spec}, {"kmin", kmin},
                      {"kmax", kmax},      {"grid", grid}, {"tol_scale", c.tol_scale}};
  std::vector<std::vector<std::string>> rows;
  bool ok = true;
  for (int k = kmin; k <= kmax; ++k) {
    long long q = map.angle().convergent(k).q;
    double residual = 0.0;
    for (int i = 0; i < grid; ++i)
      residual = std::max(residual,
                          lemma_identity_residual(map, k, static_cast<double>(i) / grid));
    double defect = lemma_defect(map, k, grid).sup_defect;
    double bound = lemma_defect_bound(map, k);
    rows.push_back({std::to_string(k), std::to_string(q), format_double(residual),
                    format_double(defect), format_double(bound)});
    if (residual > 1e-9 * c.tol_scale) ok = false;
    if (defect > (bound + 1e-9) * c.tol_scale) ok = false;
  }
  emit(c, csv_report(config, "k,q,identity_residual_max,defect,bound", rows));
  if (!ok) throw ToleranceFailure("lemma: defect exceeded its bound");
  return 0;
}

int run_corollary(const std::string& map_arg, const std::string& u_name, int kmin,
                  int kmax, int grid, const CommonOpts& c) {
  ordered_json spec = load_json_argument(map_arg);
  CircleMap map = map_from_json(spec, c.precision_bits);
  TestFunction u = test_function_by_name(u_name, map);
  ordered_json config{{"command", "corollary"}, {"map", spec}, {"u", u_name},
                      {"kmin", kmin},           {"kmax", kmax}, {"grid", grid},
                      {"tol_scale", c.tol_scale}};
  auto reports = corollary_experiment(map, u, kmin, kmax, grid);
  std::vector<std::vector<std::string>> rows;
  double max_dev = 0.0;
  bool envelope_ok = true;
  for (const auto& r : reports) {
    rows.push_back({std::to_string(r.k), std::to_string(r.q),
                    format_double(r.sup_deviation)});
    max_dev = std::max(max_dev, r.sup_deviation);
    if (u.var_bound &&
        r.sup_deviation > (*u.var_bound + r.q * r.mu_error_bound + 1e-9) * c.tol_scale)
      envelope_ok = false;
  }
  emit(c, csv_report(config, "k,q,sup_deviation", rows));
  if (!envelope_ok)
    throw ToleranceFailure("corollary: classical envelope exceeded");
  if (reports.back().sup_deviation > 0.2 * max_dev * c.tol_scale)
    throw ToleranceFailure("corollary: deviations do not decay");
  return 0;
}

int run_herman(const std::string& map_arg, int kmin, int kmax, int grid,
               const CommonOpts& c) {
  ordered_json spec = load_json_argument(map_arg);
  CircleMap map = map_from_json(spec, c.precision_bits);
  ordered_json config{{"command", "herman"}, {"map", spec}, {"kmin", kmin},
                      {"kmax", kmax},        {"grid", grid}, {"tol_scale", c.tol_scale}};
  auto table = herman_check(map, kmin, kmax, grid);
  std::vector<std::vector<std::string>> rows;
  bool ok = true;
  double ev = map.var_log_df() ? std::exp(*map.var_log_df()) : 0.0;
  for (const auto& r : table) {
    rows.push_back({std::to_string(r.k), std::to_string(r.q), format_double(r.c0_dev),
                    format_double(r.c1_dev)});
    if (map.var_log_df() && r.c1_dev > (ev - 1.0 + 1e-9) * c.tol_scale) ok = false;
  }
  emit(c, csv_report(config, "k,q,c0_dev,c1_dev", rows));
  if (!ok) throw ToleranceFailure("herman: C1 deviation exceeded exp(V) - 1");
  // decay is only demanded where the column starts above the roundoff floor
  bool c0_decays = table.front().c0_dev < 1e-12 ||
                   table.back().c0_dev < table.front().c0_dev;
  bool c1_decays = table.front().c1_dev < 1e-12 ||
                   table.back().c1_dev < table.front().c1_dev;
  if (!c0_decays || !c1_decays)
    throw ToleranceFailure("herman: no convergence toward the identity");
  return 0;
}

int run_denjoy_build(const std::string& angle_spec, long long M, const CommonOpts& c) {
  AnglePtr rho = angle_from_spec(angle_spec, IrrationalAngle::kDefaultDepth,
                                 c.precision_bits);
  DenjoyMap dj = DenjoyMap::build(rho, M);
  emit(c, denjoy_to_json(dj).dump(2));
  return 0;
}

int run_denjoy_nu(const std::string& map_arg, const CommonOpts& c) {
  ordered_json spec = load_json_argument(map_arg);
  DenjoyPtr dj = denjoy_from_json(spec);
  AtomicMeasure nu = orbit_weights(*dj);
  ordered_json j;
  j["config"] = ordered_json{{"command", "denjoy nu"},
                             {"angle", dj->rho().name()},
                             {"M", dj->truncation()}};
  j["S"] = nu.S;
  j["tail"] = nu.tail_bound;
  ordered_json pts = ordered_json::array();
  for (const Atom& a : nu.atoms) {
    ordered_json rec;
    rec["n"] = a.n;
    rec["x"] = a.x;
    rec["w"] = a.w;
    pts.push_back(rec);
  }
  j["points"] = pts;
  emit(c, j.dump(2));
  return 0;
}

int run_distribution(const std::string& map_arg, const std::string& tests_csv,
                     long long M_expect, const CommonOpts& c) {
  ordered_json spec = load_json_argument(map_arg);
  DenjoyPtr dj = denjoy_from_json(spec);
  if (M_expect > 0 && dj->truncation() != M_expect)
    throw ConfigInvalid("--M does not match the truncation stored in the map file");
  CircleMap f = make_circle_map(dj);
  AtomicMeasure nu = orbit_weights(*dj);
  InvariantDistribution L{nu};
  const Gap& g0 = dj->gap(0);

  bool want_gap = tests_csv.find("gap") != std::string::npos;
  bool want_fourier = tests_csv.find("fourier") != std::string::npos;
  if (!want_gap && !want_fourier)
    throw ConfigInvalid("--tests must name at least one of: gap, fourier");

  ordered_json config{{"command", "distribution"}, {"map_angle", dj->rho().name()},
                      {"M", dj->truncation()},     {"tests", tests_csv},
                      {"tol_scale", c.tol_scale}};
  ordered_json j;
  j["config"] = config;
  j["S"] = nu.S;
  j["tail"] = nu.tail_bound;

  std::vector<TestFunction> c1_family;
  ordered_json lvals;
  double calibrated_L = 1.0;
  if (want_gap) {
    TestFunction cal = tf_gap_bump_antisymmetric(g0.a, g0.len, nu.S);
    calibrated_L = L(cal);
    lvals["gap_calibrated"] = calibrated_L;
    lvals["gap_calibrated_mu"] = cantor_witness(*dj, cal);
    TestFunction sym = tf_gap_bump_symmetric(g0.a, g0.len, 1.0);
    lvals["gap_symmetric"] = L(sym);
    c1_family.push_back(cal);
    c1_family.push_back(sym);
  }
  if (want_fourier) {
    for (auto [name, m, cosine] :
         {std::tuple{"sin1", 1, false}, {"cos1", 1, true}, {"sin2", 2, false}}) {
      TestFunction t = tf_fourier(m, cosine);
      lvals[name] = L(t);
      c1_family.push_back(t);
    }
  }
  j["L_values"] = lvals;

  InvarianceReport inv = invariance_check(L, f, c1_family);
  j["invariance_defect"] = inv.max_defect;

  std::vector<TestFunction> phi_family{tf_constant(1.0),
                                       tf_fourier(1, true),
                                       tf_fourier(1, false),
                                       tf_fourier(2, true),
                                       tf_fourier(2, false),
                                       tf_gap_bump_symmetric(g0.a, g0.len, 1.0)};
  AutomorphicReport aut = automorphic_defect(f, nu, 1.0, phi_family);
  double boundary = GapLaw::length(dj->truncation());
  double aut_bound = 2.0 * std::max(nu.tail_bound, boundary);  // sup|phi| <= 1 family
  j["automorphic_defect"] = aut.max_defect;
  j["automorphic_bound"] = aut_bound;

  std::vector<TestFunction> nl_tests{tf_constant(1.0), tf_fourier(1, true),
                                     tf_gap_bump_symmetric(g0.a, g0.len, 1.0)};
  double nl = nu_vs_lambda(nu, nl_tests);
  double witness = 0.5 * GapLaw::length(0);  // bump: nu mass l_0 vs area l_0/2
  j["nu_vs_lambda"] = nl;
  j["nu_vs_lambda_witness"] = witness;

  emit(c, j.dump(2));
  if (std::abs(calibrated_L - 1.0) > 1e-8 * c.tol_scale)
    throw ToleranceFailure("distribution: calibrated bump missed L(u) = 1");
  if (aut.max_defect > aut_bound * c.tol_scale)
    throw ToleranceFailure("distribution: automorphic defect exceeded its bound");
  if (nl < witness * (1.0 - 1e-3) / c.tol_scale)
    throw ToleranceFailure("distribution: nu-vs-lambda witness not attained");
  return 0;
}

int run_solve(const std::string& map_arg, const std::string& u_name, int modes,
              int grid, const CommonOpts& c) {
  ordered_json spec = load_json_argument(map_arg);
  CircleMap map = map_from_json(spec, c.precision_bits);
  TestFunction u = test_function_by_name(u_name, map);
  if (!u.has_derivative()) throw ConfigInvalid("solve needs a C1 test function");
  ConjugatedSolveResult sol = solve_conjugated_coboundary(map, u.u, modes, grid);
  C1Function uc{u.u, u.du};
  CoboundaryDefect d = coboundary_defect_C1(map, sol.v, uc, grid);
  ordered_json j;
  j["config"] = ordered_json{{"command", "solve"}, {"map", spec}, {"u", u_name},
                             {"modes", modes},     {"grid", grid},
                             {"tol_scale", c.tol_scale}};
  j["mu_constant"] = sol.mu_constant;
  j["tail_bound"] = sol.tail_bound;
  j["defect_c0"] = d.c0;
  j["defect_c1"] = d.c1;
  j["centering_c"] = d.centering_c;
  emit(c, j.dump(2));
  if (d.max() > 1e-6 * c.tol_scale)
    throw ToleranceFailure("solve: coboundary defect above 1e-6");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for circle diffeomorphism cohomology"};
  app.require_subcommand(1);

  // cf
  auto* cf = app.add_subcommand("cf", "continued fraction and convergents of an angle");
  std::string cf_angle;
  int cf_depth = 10;
  CommonOpts cf_c;
  cf->add_option("--angle", cf_angle, "golden | sqrt2m1 | decimal")->required();
  cf->add_option("--depth", cf_depth, "number of partial quotients");
  add_common(cf, cf_c);

  // rotnum
  auto* rn = app.add_subcommand("rotnum", "certified rotation number interval of a map");
  std::string rn_map;
  int rn_depth = 20;
  long long rn_qcap = 400000;
  CommonOpts rn_c;
  rn->add_option("--map", rn_map, "map spec (JSON or file)")->required();
  rn->add_option("--depth", rn_depth, "maximum convergents to certify");
  rn->add_option("--q-cap", rn_qcap, "largest denominator tested");
  add_common(rn, rn_c);

  // tune
  auto* tn = app.add_subcommand("tune", "tune the Arnold offset to a target angle");
  std::string tn_angle = "golden";
  double tn_eps = 0.5;
  int tn_depth = 18, tn_samples = 8;
  long long tn_qcap = 400000;
  CommonOpts tn_c;
  tn->add_option("--angle", tn_angle, "target angle");
  tn->add_option("--eps", tn_eps, "coupling in [0,1)");
  tn->add_option("--depth", tn_depth, "certificate depth K");
  tn->add_option("--samples", tn_samples, "grid samples per sign test");
  tn->add_option("--q-cap", tn_qcap, "largest denominator tested");
  add_common(tn, tn_c);

  // lemma
  auto* lm = app.add_subcommand("lemma", "corrector identity residual and defect table");
  std::string lm_map, lm_k = "4..10";
  int lm_grid = 1024;
  CommonOpts lm_c;
  lm->add_option("--map", lm_map)->required();
  lm->add_option("--k", lm_k, "convergent index range A..B");
  lm->add_option("--grid", lm_grid);
  add_common(lm, lm_c);

  // corollary
  auto* co = app.add_subcommand("corollary", "Birkhoff sup-deviation decay table");
  std::string co_map, co_u = "cos";
  int co_kmin = 4, co_kmax = 12, co_grid = 512;
  CommonOpts co_c;
  co->add_option("--map", co_map)->required();
  co->add_option("--u", co_u, "test function (cos, sin, cos2, sin2, one, logdf)");
  co->add_option("--kmin", co_kmin);
  co->add_option("--kmax", co_kmax);
  co->add_option("--grid", co_grid);
  add_common(co, co_c);

  // herman
  auto* he = app.add_subcommand("herman", "C0/C1 distance of f^{q_k} from the identity");
  std::string he_map;
  int he_kmin = 3, he_kmax = 12, he_grid = 512;
  CommonOpts he_c;
  he->add_option("--map", he_map)->required();
  he->add_option("--kmin", he_kmin);
  he->add_option("--kmax", he_kmax);
  he->add_option("--grid", he_grid);
  add_common(he, he_c);

  // denjoy build / nu
  auto* dj = app.add_subcommand("denjoy", "Denjoy counterexample construction");
  dj->require_subcommand(1);
  auto* djb = dj->add_subcommand("build", "construct and serialize the gap table");
  std::string djb_angle = "golden";
  long long djb_M = 64;
  CommonOpts djb_c;
  djb->add_option("--angle", djb_angle);
  djb->add_option("--M", djb_M, "truncation: gaps placed for |n| <= M");
  add_common(djb, djb_c);
  auto* djn = dj->add_subcommand("nu", "atomic 1-automorphic measure of a built map");
  std::string djn_map;
  CommonOpts djn_c;
  djn->add_option("--map", djn_map)->required();
  add_common(djn, djn_c);

  // distribution
  auto* ds = app.add_subcommand("distribution",
                                "invariant 1-distribution experiments on a Denjoy map");
  std::string ds_map, ds_tests = "gap,fourier";
  long long ds_M = 0;
  CommonOpts ds_c;
  ds->add_option("--map", ds_map)->required();
  ds->add_option("--tests", ds_tests, "comma list: gap, fourier");
  ds->add_option("--M", ds_M, "expected truncation (cross-checked against the file)");
  add_common(ds, ds_c);

  // solve
  auto* sv = app.add_subcommand("solve", "constructive coboundary solution and defect");
  std::string sv_map, sv_u = "cos";
  int sv_modes = 64, sv_grid = 4096;
  CommonOpts sv_c;
  sv->add_option("--map", sv_map)->required();
  sv->add_option("--u", sv_u);
  sv->add_option("--modes", sv_modes, "Fourier cutoff");
  sv->add_option("--grid", sv_grid);
  add_common(sv, sv_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (cf->parsed()) return run_cf(cf_angle, cf_depth, cf_c);
    if (rn->parsed()) return run_rotnum(rn_map, rn_depth, rn_qcap, rn_c);
    if (tn->parsed()) return run_tune(tn_angle, tn_eps, tn_depth, tn_samples, tn_qcap, tn_c);
    if (lm->parsed()) return run_lemma(lm_map, lm_k, lm_grid, lm_c);
    if (co->parsed()) return run_corollary(co_map, co_u, co_kmin, co_kmax, co_grid, co_c);
    if (he->parsed()) return run_herman(he_map, he_kmin, he_kmax, he_grid, he_c);
    if (djb->parsed()) return run_denjoy_build(djb_angle, djb_M, djb_c);
    if (djn->parsed()) return run_denjoy_nu(djn_map, djn_c);
    if (ds->parsed()) return run_distribution(ds_map, ds_tests, ds_M, ds_c);
    if (sv->parsed()) return run_solve(sv_map, sv_u, sv_modes, sv_grid, sv_c);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const ToleranceFailure& e) {
    std::cerr << "tolerance failure: " << e.what() << "\n";
    return 1;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}
