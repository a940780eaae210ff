#include "tunefree/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace tunefree {

namespace fs = std::filesystem;
using nlohmann::json;

double theta_confidence(double T, double delta) {
  return std::log(60.0 * std::log(6.0 * T) / delta);
}

double polylog_budget(BudgetSetting setting, const Hints& hints,
                      const TrueParams& truth, long long T, double delta) {
  if (!hints.D) throw std::invalid_argument("polylog_budget: D hints required");
  const double Td = static_cast<double>(T);
  const double theta = theta_confidence(Td, delta);
  const double D = truth.D;
  switch (setting) {
    case BudgetSetting::bounded_smooth_dog: {
      const double lg = std::log(2.0 * D / hints.D->lo);
      return 64.0 * lg * lg * truth.L * D * D / Td +
             320.0 * lg * lg * theta * truth.sigma * D / std::sqrt(Td);
    }
    case BudgetSetting::bounded_smooth_dowg: {
      const double lg = log_plus(hints.D->ratio());
      return 700.0 * theta * lg *
             (truth.L * D * D / Td + truth.sigma * D / std::sqrt(Td));
    }
    case BudgetSetting::bounded_nonsmooth_dowg: {
      const double lg = log_plus(hints.D->ratio());
      return 748.0 * D * truth.G * theta / std::sqrt(Td) * lg;
    }
  }
  throw std::logic_error("unknown budget setting");
}

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3)
    throw std::invalid_argument("fit_loglog_slope: need at least 3 pairs");
  const int n = static_cast<int>(pairs.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [T, err] : pairs) {
    if (!(T > 0.0) || !(err > 0.0))
      throw std::invalid_argument("fit_loglog_slope: inputs must be positive");
    sx += std::log(T);
    sy += std::log(err);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [T, err] : pairs) {
    const double dx = std::log(T) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(err) - my);
  }
  if (sxx <= 0.0)
    throw std::invalid_argument("fit_loglog_slope: degenerate T values");

  SlopeFit fit;
  fit.slope = sxy / sxx;
  double ssr = 0.0;
  for (const auto& [T, err] : pairs) {
    const double pred = my + fit.slope * (std::log(T) - mx);
    const double r = std::log(err) - pred;
    ssr += r * r;
  }
  const int df = n - 2;
  static const double t975[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447,
                                2.365,  2.306, 2.262, 2.228, 2.201, 2.179,
                                2.160,  2.145, 2.131, 2.120, 2.110, 2.101,
                                2.093,  2.086};
  const double tq = df <= 20 ? t975[df - 1] : 1.96;
  fit.ci95 = tq * std::sqrt(ssr / df / sxx);
  return fit;
}

std::vector<double> baseline_grid_from_hints(const Hints& hints) {
  if (!hints.L)
    throw std::invalid_argument("baseline grid: L hints required");
  const double lo = std::pow(2.0, -10.0) / hints.L->hi;
  const double hi = std::pow(2.0, 5.0) / hints.L->lo;
  std::vector<double> grid(16);
  const double ratio = std::pow(hi / lo, 1.0 / 15.0);
  double eta = lo;
  for (int i = 0; i < 16; ++i) {
    grid[i] = eta;
    eta *= ratio;
  }
  return grid;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

}  // namespace

TuneResult tune_sgd_baseline(const std::function<Oracle()>& oracle_factory,
                             const Vec& x0, int T,
                             const std::vector<double>& grid, int trials,
                             TuneMetric metric, RngStream& rng) {
  if (grid.empty()) throw std::invalid_argument("tune_sgd_baseline: empty grid");
  if (trials < 1) throw std::invalid_argument("tune_sgd_baseline: trials must be >= 1");

  TuneResult res;
  res.err_star = std::numeric_limits<double>::infinity();
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double eta = grid[gi];
    std::vector<double> errs;
    errs.reserve(static_cast<std::size_t>(trials));
    for (int trial = 0; trial < trials; ++trial) {
      Oracle oracle = oracle_factory();
      RngStream run_rng = rng.child(gi * 10'000 + static_cast<std::uint64_t>(trial));
      const Trajectory traj = run_sgd(oracle, x0, eta, T, run_rng);
      double err;
      if (metric == TuneMetric::f_gap) {
        const Problem& p = oracle.problem();
        err = std::numeric_limits<double>::infinity();
        for (auto kind : {CandidateKind::last_iterate, CandidateKind::weighted_average,
                          CandidateKind::best_prefix_average}) {
          const Vec c = select_candidate(traj, kind, WeightKind::uniform, p);
          err = std::min(err, p.value(c) - p.f_star);
        }
      } else {
        double sum = 0.0;
        for (const StepRecord& s : traj.steps) sum += s.grad_true_norm_sq;
        err = sum / static_cast<double>(traj.steps.size());
      }
      errs.push_back(err);
    }
    const double med = median_of(errs);
    res.grid_errs.emplace_back(eta, med);
    if (med < res.err_star) {
      res.err_star = med;
      res.eta_star = eta;
    }
  }
  return res;
}

Trajectory run_bounded_adaptive(Variant variant, Oracle& oracle, const Vec& x0,
                                const Hints& hints, int T,
                                const std::optional<Ball>& projection,
                                RngStream& rng) {
  if (!hints.D)
    throw std::invalid_argument("run_bounded_adaptive: D hints required");
  if (static_cast<double>(T) < 4.0 * log_plus(hints.D->ratio())) {
    // Horizon too short for the adaptive guarantees: return x0 unmoved.
    Trajectory traj;
    traj.x0 = x0;
    traj.last = x0;
    traj.T = 1;
    traj.iterates.push_back(x0);
    traj.rbar_hist.push_back(hints.D->lo);
    traj.prefix_uniform.push_back({1, x0});
    traj.prefix_rbar.push_back({1, x0});
    traj.prefix_rbar_sq.push_back({1, x0});
    StepRecord rec;
    rec.t = 0;
    rec.r_bar = hints.D->lo;
    const Problem& p = oracle.problem();
    if (p.x_star) rec.f_gap = p.value(x0) - p.f_star;
    rec.grad_true_norm_sq = norm_sq(p.grad(x0));
    traj.steps.push_back(rec);
    return traj;
  }
  return run_adaptive(variant, oracle, x0, hints.D->lo, T, projection, rng);
}

ConflictResult lb_conflict_check(LbKind kind, long long T, double iota,
                                 double c) {
  if (T < 2) throw std::invalid_argument("lb_conflict_check: T must be >= 2");
  if (!(iota > 0.0) || !(c > 0.0))
    throw std::invalid_argument("lb_conflict_check: iota and c must be positive");
  const double Td = static_cast<double>(T);
  ConflictResult r;
  switch (kind) {
    case LbKind::smooth: {
      // u = T^2 + 1, v = T^2, |u - v| = 1.
      const double s = std::sqrt(2.0 * c * iota);
      r.lower = (Td * Td + 1.0) -
                s * (std::pow(Td, -0.5) + std::pow(Td, -0.75) +
                     std::pow(Td, 0.25) * std::sqrt(Td * Td + 1.0));
      r.upper = s * (std::pow(Td, 1.5) + std::pow(Td, 1.25));
      break;
    }
    case LbKind::nonsmooth: {
      // u = 1 - 1/T, x0 = 1.
      r.lower = 1.0 - 1.0 / Td - c * iota / std::sqrt(Td);
      r.upper = c * iota / std::sqrt(Td);
      break;
    }
    case LbKind::nonconvex: {
      const double s = std::sqrt(c * iota);
      r.lower = (Td * Td + 1.0) -
                s * (1.0 / std::sqrt(Td) +
                     std::pow(Td, 0.25) * std::sqrt(Td * Td + 1.0) +
                     1.0 / std::sqrt(Td));
      r.upper = s * (std::sqrt(Td) + std::pow(Td, 1.5));
      break;
    }
  }
  r.conflict = r.lower > r.upper;
  return r;
}

long long lb_conflict_threshold(LbKind kind,
                                const std::function<double(long long)>& iota_fn,
                                double c, long long T_max) {
  auto conflicts = [&](long long T) {
    return lb_conflict_check(kind, T, iota_fn(T), c).conflict;
  };
  if (conflicts(2)) return 2;
  long long lo = 2, hi = 4;
  while (!conflicts(hi)) {
    lo = hi;
    if (hi > T_max / 2)
      throw std::runtime_error("lb_conflict_threshold: no conflict below T_max");
    hi *= 2;
  }
  while (lo + 1 < hi) {
    const long long mid = lo + (hi - lo) / 2;
    if (conflicts(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

namespace {

bool trajectories_bit_identical(const Trajectory& a, const Trajectory& b) {
  if (a.iterates.size() != b.iterates.size()) return false;
  for (std::size_t i = 0; i < a.iterates.size(); ++i) {
    const Vec& xa = a.iterates[i];
    const Vec& xb = b.iterates[i];
    if (xa.size() != xb.size()) return false;
    if (std::memcmp(xa.data(), xb.data(), xa.size() * sizeof(double)) != 0)
      return false;
  }
  return true;
}

}  // namespace

ConfusionResult run_confusion_experiment(const LowerBoundFamily& fam,
                                         const ConfusionConfig& algo_cfg,
                                         long long trials, RngStream& rng) {
  if (trials < 1)
    throw std::invalid_argument("confusion: trials must be >= 1");

  double r_eps = algo_cfg.r_eps;
  if (r_eps <= 0.0)
    r_eps = fam.hint_table.D ? fam.hint_table.D->lo : 1.0;
  if (r_eps <= 0.0) r_eps = 1.0;

  const Vec x0{fam.v};
  ConfusionResult res;
  res.T = fam.T;
  res.trials = trials;
  res.closed_form_p = std::pow(1.0 - 1.0 / fam.T, fam.T);

  for (long long trial = 0; trial < trials; ++trial) {
    RngStream trial_rng = rng.child(static_cast<std::uint64_t>(trial));
    RngStream stream_rng = trial_rng.child(0);
    const BranchSequence stream =
        make_coupled_branch_stream(stream_rng, fam.T, 1.0 / fam.T);

    const bool all2 =
        std::none_of(stream->begin(), stream->end(), [](int b) { return b == 1; });
    if (all2) ++res.all_branch2_trials;

    Oracle f_oracle = make_family_f_oracle(fam);
    Oracle h_oracle = make_family_h_oracle(fam);
    f_oracle.set_branch_sequence(stream);
    h_oracle.set_branch_sequence(stream);

    // Identical RNG for both runs: the coupling leaves the branch draws as
    // the only randomness, and those come from the shared stream.
    RngStream rng_f = trial_rng.child(1);
    RngStream rng_h = trial_rng.child(1);
    const Trajectory traj_f =
        run_adaptive(algo_cfg.algo, f_oracle, x0, r_eps, fam.T, {}, rng_f);
    const Trajectory traj_h =
        run_adaptive(algo_cfg.algo, h_oracle, x0, r_eps, fam.T, {}, rng_h);

    if (all2 && !trajectories_bit_identical(traj_f, traj_h))
      res.coupled_trajectories_identical = false;
  }
  res.empirical_p =
      static_cast<double>(res.all_branch2_trials) / static_cast<double>(trials);
  return res;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// ---------------------------------------------------------------------------
// Config-driven experiment runner
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k = {
      {"problem",
       {"name", "dim", "L", "G", "a", "center", "sigma", "T", "u", "v", "x0",
        "domain_radius"}},
      {"noise", {"kind", "sigma", "branch_prob"}},
      {"algo", {"name", "eta", "r_eps", "proj_center", "proj_radius"}},
      {"experiment", {"T_grid", "seeds", "trials", "delta", "plots", "baseline"}},
      {"hints",
       {"D_lo", "D_hi", "sigma_lo", "sigma_hi", "L_lo", "L_hi", "G_lo", "G_hi",
        "Delta_lo", "Delta_hi"}},
      {"ve", {"b", "theta", "beta", "c"}},
      {"restarted",
       {"delta", "T_total", "L_lo", "L_hi", "R_lo", "R_hi", "Delta_lo",
        "Delta_hi"}},
  };
  return k;
}

void validate_keys(const IniFile& ini) {
  const auto& known = known_keys();
  for (const std::string& sec : ini.sections()) {
    auto it = known.find(sec);
    if (it == known.end())
      throw ConfigError("unknown section [" + sec + "]");
    for (const std::string& key : ini.keys(sec))
      if (!it->second.count(key))
        throw ConfigError("unknown key '" + key + "' in [" + sec + "]");
  }
}

Vec parse_point(const IniFile& ini, const std::string& sec,
                const std::string& key, int dim) {
  const std::vector<double> vals = ini.get_doubles(sec, key);
  if (static_cast<int>(vals.size()) == dim) return vals;
  if (vals.size() == 1) return Vec(static_cast<std::size_t>(dim), vals[0]);
  throw ConfigError("key '" + key + "' in [" + sec + "]: expected 1 or " +
                    std::to_string(dim) + " values");
}

struct ProblemSetup {
  Problem problem;
  Vec x0;
  std::optional<Ball> ball;
  std::optional<LowerBoundFamily> family;
  NoiseModel noise;
};

ProblemSetup build_problem(const IniFile& ini) {
  if (!ini.has("problem", "name"))
    throw ConfigError("missing problem.name");
  const std::string name = ini.get("problem", "name");

  ProblemSetup setup;
  if (name == "quadratic") {
    const int dim = static_cast<int>(ini.get_int_or("problem", "dim", 1));
    const Vec center = ini.has("problem", "center")
                           ? parse_point(ini, "problem", "center", dim)
                           : zeros(static_cast<std::size_t>(dim));
    setup.problem = make_quadratic(ini.get_double("problem", "L"), center, dim);
  } else if (name == "absloss") {
    setup.problem = make_abs_loss(ini.get_double("problem", "G"),
                                  ini.get_double_or("problem", "center", 0.0));
  } else if (name == "sinbump") {
    setup.problem = make_sinbump(ini.get_double("problem", "a"),
                                 static_cast<int>(ini.get_int_or("problem", "dim", 1)));
  } else if (name == "lb-smooth" || name == "lb-nonsmooth" ||
             name == "lb-nonconvex") {
    const LbKind kind = name == "lb-smooth"
                            ? LbKind::smooth
                            : (name == "lb-nonsmooth" ? LbKind::nonsmooth
                                                      : LbKind::nonconvex);
    const int T = static_cast<int>(ini.get_int("problem", "T"));
    double u, v;
    if (kind == LbKind::nonsmooth) {
      u = ini.get_double_or("problem", "u", 1.0 - 1.0 / T);
      v = ini.get_double_or("problem", "v", 1.0);
    } else {
      v = ini.get_double_or("problem", "v", static_cast<double>(T) * T);
      u = ini.get_double_or("problem", "u", v + 1.0);
    }
    std::optional<double> G;
    if (kind == LbKind::nonsmooth) G = ini.get_double_or("problem", "G", 1.0);
    setup.family = make_lb_family(kind, ini.get_double_or("problem", "sigma", 1.0),
                                  T, u, v, G);
    setup.problem = setup.family->f;
    setup.x0 = Vec{v};
  } else {
    throw ConfigError("unknown problem name '" + name + "'");
  }

  if (setup.family) {
    if (ini.has("problem", "x0"))
      throw ConfigError("lb-* problems pin x0 = v; drop problem.x0");
  } else {
    if (!ini.has("problem", "x0")) throw ConfigError("missing problem.x0");
    setup.x0 = parse_point(ini, "problem", "x0", setup.problem.dim);
  }

  if (ini.has("problem", "domain_radius")) {
    setup.problem.domain_radius = ini.get_double("problem", "domain_radius");
    setup.ball = setup.problem.domain_ball();
  }

  // Noise.
  const std::string kind = ini.get_or("noise", "kind",
                                      setup.family ? "lb_mixture" : "none");
  if (kind == "none") {
    setup.noise = NoiseModel::None();
  } else if (kind == "gaussian_spherical") {
    setup.noise = NoiseModel::GaussianSpherical(ini.get_double("noise", "sigma"));
  } else if (kind == "bernoulli_sign") {
    setup.noise = NoiseModel::BernoulliSign(ini.get_double("noise", "sigma"));
  } else if (kind == "lb_mixture") {
    if (!setup.family)
      throw ConfigError("noise.kind lb_mixture requires an lb-* problem");
    setup.noise = NoiseModel::LbMixture(
        ini.get_double_or("noise", "branch_prob", 1.0 / setup.family->T));
  } else {
    throw ConfigError("unknown noise kind '" + kind + "'");
  }
  return setup;
}

Hints build_hints(const IniFile& ini) {
  Hints h;
  auto read = [&](const char* lo, const char* hi) -> std::optional<Bound> {
    const bool has_lo = ini.has("hints", lo), has_hi = ini.has("hints", hi);
    if (has_lo != has_hi)
      throw ConfigError(std::string("hints: need both ") + lo + " and " + hi);
    if (!has_lo) return std::nullopt;
    return Bound{ini.get_double("hints", lo), ini.get_double("hints", hi)};
  };
  h.D = read("D_lo", "D_hi");
  h.sigma_or_R = read("sigma_lo", "sigma_hi");
  h.L = read("L_lo", "L_hi");
  h.G = read("G_lo", "G_hi");
  h.Delta = read("Delta_lo", "Delta_hi");
  h.validate();
  return h;
}

// Hint validity against the configured problem, where the truth is known.
// Small relative slack absorbs roundoff in derived truths.
void validate_hints_against_problem(const Hints& h, const ProblemSetup& setup) {
  const Problem& p = setup.problem;
  auto fail = [](const std::string& what) {
    throw ConfigError("hints: " + what + " not within the declared bounds");
  };
  auto contains = [](const Bound& b, double v) {
    const double slack = 1e-9 * std::max(1.0, std::abs(v));
    return b.lo - slack <= v && v <= b.hi + slack;
  };
  if (h.L && p.smooth_L && !contains(*h.L, *p.smooth_L)) fail("true L");
  if (h.G && p.lipschitz_G && !contains(*h.G, *p.lipschitz_G)) fail("true G");
  if (h.sigma_or_R && setup.noise.kind != NoiseKind::none &&
      setup.noise.kind != NoiseKind::lb_mixture &&
      !contains(*h.sigma_or_R, setup.noise.sigma))
    fail("true sigma");
  if (h.D) {
    const double D_true = setup.ball ? 2.0 * setup.ball->radius
                                     : (p.x_star ? dist(setup.x0, *p.x_star)
                                                 : -1.0);
    if (D_true >= 0.0 && !contains(*h.D, D_true)) fail("true D");
  }
  if (h.Delta && p.x_star) {
    const double d = p.value(setup.x0) - p.f_star;
    if (!contains(*h.Delta, d)) fail("true Delta");
  }
}

struct ExperimentPlan {
  std::vector<std::string> algos;
  std::vector<long long> T_grid;
  std::vector<long long> seeds;
  int trials = 5;
  double delta = 0.1;
  bool plots = false;
  bool baseline = false;
};

ExperimentPlan build_plan(const IniFile& ini) {
  ExperimentPlan plan;
  if (ini.has("algo", "name"))
    plan.algos = ini.get_strings("algo", "name");
  if (ini.has("experiment", "T_grid"))
    for (double t : ini.get_doubles("experiment", "T_grid"))
      plan.T_grid.push_back(static_cast<long long>(t));
  if (ini.has("experiment", "seeds")) {
    const std::vector<std::string> parts = ini.get_strings("experiment", "seeds");
    if (parts.size() == 1) {
      const long long n = std::stoll(parts[0]);
      for (long long s = 0; s < n; ++s) plan.seeds.push_back(s);
    } else {
      for (const std::string& p : parts) plan.seeds.push_back(std::stoll(p));
    }
  }
  plan.trials = static_cast<int>(ini.get_int_or("experiment", "trials", 5));
  plan.delta = ini.get_double_or("experiment", "delta", 0.1);
  plan.plots = ini.get_bool_or("experiment", "plots", false);
  plan.baseline = ini.get_bool_or("experiment", "baseline", false);

  static const std::set<std::string> valid_algos = {
      "sgd",   "dog",     "dowg",    "tdog",          "tdowg",
      "polyak", "tdog-ve", "tdowg-ve", "restarted-sgd"};
  for (const std::string& a : plan.algos)
    if (!valid_algos.count(a)) throw ConfigError("unknown algo '" + a + "'");

  if (plan.algos.empty() || plan.T_grid.empty() || plan.seeds.empty())
    throw ConfigError("no experiments declared");
  return plan;
}

std::optional<Variant> adaptive_variant(const std::string& algo) {
  if (algo == "dog") return Variant::dog;
  if (algo == "dowg") return Variant::dowg;
  if (algo == "tdog") return Variant::tdog;
  if (algo == "tdowg") return Variant::tdowg;
  return std::nullopt;
}

struct RunOutput {
  std::vector<std::pair<std::string, Vec>> candidates;  // (kind, point)
  std::int64_t oracle_calls = 0;
};

Oracle make_run_oracle(const ProblemSetup& setup) {
  if (setup.family && setup.noise.kind == NoiseKind::lb_mixture)
    return Oracle(setup.family->f, setup.family->f1, setup.family->f2,
                  setup.noise.branch_prob);
  return Oracle(setup.problem, setup.noise);
}

RunOutput run_one(const std::string& algo, const ProblemSetup& setup,
                  const Hints& hints, const ExperimentPlan& plan,
                  const IniFile& ini, long long T, RngStream& rng) {
  RunOutput out;
  Oracle oracle = make_run_oracle(setup);
  const Problem& p = setup.problem;

  auto push_standard_candidates = [&](const Trajectory& traj, WeightKind w) {
    out.candidates.emplace_back("last_iterate", traj.last);
    out.candidates.emplace_back("weighted_average", traj.weighted_average(w));
    out.candidates.emplace_back("best_prefix_average",
                                best_prefix_average(traj, w, p));
    out.oracle_calls = traj.oracle_calls;
  };

  if (algo == "sgd") {
    if (!ini.has("algo", "eta")) throw ConfigError("sgd requires algo.eta");
    const Trajectory traj = run_sgd(oracle, setup.x0, ini.get_double("algo", "eta"),
                                    static_cast<int>(T), rng);
    push_standard_candidates(traj, WeightKind::uniform);
  } else if (auto variant = adaptive_variant(algo)) {
    std::optional<Ball> ball = setup.ball;
    if (ini.has("algo", "proj_radius")) {
      Ball b;
      b.radius = ini.get_double("algo", "proj_radius");
      b.center = ini.has("algo", "proj_center")
                     ? parse_point(ini, "algo", "proj_center", p.dim)
                     : zeros(static_cast<std::size_t>(p.dim));
      ball = b;
    }
    Trajectory traj;
    if (hints.D) {
      Hints h = hints;
      if (ini.has("algo", "r_eps"))
        h.D->lo = ini.get_double("algo", "r_eps");
      traj = run_bounded_adaptive(*variant, oracle, setup.x0, h,
                                  static_cast<int>(T), ball, rng);
    } else {
      double r_eps;
      if (ini.has("algo", "r_eps"))
        r_eps = ini.get_double("algo", "r_eps");
      else if (setup.family && setup.family->hint_table.D)
        r_eps = setup.family->hint_table.D->lo;  // r_eps = D_lo convention
      else
        throw ConfigError(algo + " requires algo.r_eps or D hints");
      traj = run_adaptive(*variant, oracle, setup.x0, r_eps,
                          static_cast<int>(T), ball, rng);
    }
    push_standard_candidates(traj, natural_weights(*variant));
  } else if (algo == "tdog-ve" || algo == "tdowg-ve") {
    if (!ini.has("ve", "b") || !ini.has("ve", "theta"))
      throw ConfigError(algo + " requires ve.b and ve.theta");
    std::optional<double> beta;
    if (ini.has("ve", "beta") && ini.get("ve", "beta") != "T")
      beta = ini.get_double("ve", "beta");
    const VEConfig cfg =
        make_ve_config(static_cast<int>(ini.get_int("ve", "b")),
                       ini.get_double("ve", "theta"), plan.delta,
                       static_cast<int>(T), beta);
    double r_eps;
    if (ini.has("algo", "r_eps"))
      r_eps = ini.get_double("algo", "r_eps");
    else if (hints.D)
      r_eps = hints.D->lo;
    else
      throw ConfigError(algo + " requires algo.r_eps or D hints");
    const Trajectory traj = run_ve_adaptive(
        algo == "tdog-ve" ? VeVariant::tdog_ve : VeVariant::tdowg_ve, oracle,
        setup.x0, r_eps, cfg, rng);
    push_standard_candidates(traj, algo == "tdog-ve" ? WeightKind::rbar
                                                     : WeightKind::rbar_sq);
  } else if (algo == "polyak") {
    if (setup.noise.kind != NoiseKind::none)
      throw ConfigError("polyak requires a deterministic oracle (noise.kind = none)");
    if (!hints.D) throw ConfigError("polyak requires D hints");
    const PolyakResult res =
        run_polyak_adaptive(p, setup.x0, hints.D->hi, static_cast<int>(T));
    out.candidates.emplace_back("returned", res.point);
    out.oracle_calls = res.trajectory.oracle_calls;
  } else if (algo == "restarted-sgd") {
    for (const char* key : {"L_lo", "L_hi", "R_lo", "R_hi", "Delta_lo", "Delta_hi"})
      if (!ini.has("restarted", key))
        throw ConfigError(std::string("restarted-sgd requires restarted.") + key);
    NonconvexHints nh;
    nh.L_lo = ini.get_double("restarted", "L_lo");
    nh.L_hi = ini.get_double("restarted", "L_hi");
    nh.R_lo = ini.get_double("restarted", "R_lo");
    nh.R_hi = ini.get_double("restarted", "R_hi");
    nh.Delta_lo = ini.get_double("restarted", "Delta_lo");
    nh.Delta_hi = ini.get_double("restarted", "Delta_hi");
    const double delta = ini.get_double_or("restarted", "delta", plan.delta);
    const long long T_total = ini.get_int_or("restarted", "T_total", T);
    const RestartedSgdResult res =
        restarted_sgd(oracle, setup.x0, delta, nh, T_total, rng);
    out.candidates.emplace_back("returned", res.y_bar);
    out.oracle_calls = res.calls;
  } else {
    throw ConfigError("unknown algo '" + algo + "'");
  }
  return out;
}

double run_error_metric(const Problem& p, const std::vector<RunRecord>& rows,
                        std::size_t begin, std::size_t end) {
  // Convex experiments score the best candidate's true gap; nonconvex ones
  // the squared gradient norm of the returned point.
  const bool nonconvex = p.name == "sinbump";
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = begin; i < end; ++i) {
    const double v = nonconvex ? rows[i].grad_norm_sq : rows[i].f_gap;
    if (std::isfinite(v)) best = std::min(best, v);
  }
  return best;
}

void write_svg_plot(const fs::path& path, const std::string& title,
                    const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 2) return;
  double lx_min = 1e300, lx_max = -1e300, ly_min = 1e300, ly_max = -1e300;
  std::vector<std::pair<double, double>> lp;
  for (const auto& [x, y] : pts) {
    if (!(x > 0.0) || !(y > 0.0)) return;
    lp.emplace_back(std::log10(x), std::log10(y));
    lx_min = std::min(lx_min, lp.back().first);
    lx_max = std::max(lx_max, lp.back().first);
    ly_min = std::min(ly_min, lp.back().second);
    ly_max = std::max(ly_max, lp.back().second);
  }
  if (lx_max <= lx_min) return;
  if (ly_max <= ly_min) ly_max = ly_min + 1.0;

  const double W = 640, H = 420, m = 60;
  auto sx = [&](double lx) { return m + (lx - lx_min) / (lx_max - lx_min) * (W - 2 * m); };
  auto sy = [&](double ly) { return H - m - (ly - ly_min) / (ly_max - ly_min) * (H - 2 * m); };

  std::ofstream out(path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='"
      << H << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='14'>"
      << title << " (log-log)</text>\n";
  out << "<line x1='" << m << "' y1='" << H - m << "' x2='" << W - m << "' y2='"
      << H - m << "' stroke='black'/>\n";
  out << "<line x1='" << m << "' y1='" << m << "' x2='" << m << "' y2='" << H - m
      << "' stroke='black'/>\n";
  out << "<text x='" << W - m << "' y='" << H - m + 30
      << "' text-anchor='end' font-size='11'>T</text>\n";
  out << "<text x='" << m << "' y='" << m - 8 << "' font-size='11'>err</text>\n";
  out << "<polyline fill='none' stroke='steelblue' stroke-width='1.5' points='";
  for (const auto& [lx, ly] : lp) out << sx(lx) << "," << sy(ly) << " ";
  out << "'/>\n";
  for (const auto& [lx, ly] : lp)
    out << "<circle cx='" << sx(lx) << "' cy='" << sy(ly)
        << "' r='3' fill='steelblue'/>\n";
  out << "</svg>\n";
}

}  // namespace

ExecuteResult execute_config(const std::string& config_path,
                             const std::string& out_dir) {
  const IniFile ini = IniFile::parse_file(config_path);
  validate_keys(ini);

  const ProblemSetup setup = build_problem(ini);
  const Hints hints = build_hints(ini);
  validate_hints_against_problem(hints, setup);
  const ExperimentPlan plan = build_plan(ini);

  fs::create_directories(out_dir);

  ExecuteResult result;
  std::vector<RunRecord>& records = result.records;
  // (algo, T) -> per-seed run errors, in deterministic cell order.
  std::map<std::string, std::map<long long, std::vector<double>>> errors;

  for (std::size_t ai = 0; ai < plan.algos.size(); ++ai) {
    const std::string& algo = plan.algos[ai];
    for (std::size_t ti = 0; ti < plan.T_grid.size(); ++ti) {
      const long long T = plan.T_grid[ti];
      for (const long long seed : plan.seeds) {
        RngStream rng =
            RngStream(static_cast<std::uint64_t>(seed)).child(ai).child(ti);
        const auto t0 = std::chrono::steady_clock::now();
        const RunOutput out = run_one(algo, setup, hints, plan, ini, T, rng);
        const auto t1 = std::chrono::steady_clock::now();
        const std::int64_t wall_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();

        const std::size_t row_begin = records.size();
        for (const auto& [kind, point] : out.candidates) {
          RunRecord rec;
          rec.run_id = "r" + std::to_string(records.size());
          rec.algo = algo;
          rec.problem = setup.problem.name;
          rec.noise = to_string(setup.noise.kind);
          rec.T = T;
          rec.seed = seed;
          rec.candidate_kind = kind;
          rec.f_gap = setup.problem.x_star
                          ? setup.problem.value(point) - setup.problem.f_star
                          : std::numeric_limits<double>::quiet_NaN();
          rec.grad_norm_sq = norm_sq(setup.problem.grad(point));
          rec.oracle_calls = out.oracle_calls;
          rec.wall_ms = wall_ms;
          records.push_back(std::move(rec));
        }
        errors[algo][T].push_back(
            run_error_metric(setup.problem, records, row_begin, records.size()));
      }
    }
  }

  // runs.csv
  const fs::path csv_path = fs::path(out_dir) / "runs.csv";
  {
    std::ofstream csv(csv_path);
    csv << kRunsCsvHeader << "\n";
    for (const RunRecord& r : records) {
      csv << csv_escape(r.run_id) << ',' << csv_escape(r.algo) << ','
          << csv_escape(r.problem) << ',' << csv_escape(r.noise) << ',' << r.T
          << ',' << r.seed << ',' << csv_escape(r.candidate_kind) << ','
          << fmt_double(r.f_gap) << ',' << fmt_double(r.grad_norm_sq) << ','
          << r.oracle_calls << ',' << r.wall_ms << "\n";
    }
  }
  result.runs_csv_path = csv_path.string();

  // report.json
  json report;
  report["schema_version"] = 1;
  report["slopes"] = json::object();
  report["ratios"] = json::object();
  report["confusion"] = nullptr;
  report["conflict"] = nullptr;

  std::map<std::string, std::vector<std::pair<double, double>>> medians;
  for (const auto& [algo, byT] : errors) {
    for (const auto& [T, errs] : byT)
      medians[algo].emplace_back(static_cast<double>(T), median_of(errs));
    bool positive = medians[algo].size() >= 3;
    for (const auto& [T, e] : medians[algo])
      if (!(e > 0.0) || !std::isfinite(e)) positive = false;
    if (positive) {
      const SlopeFit fit = fit_loglog_slope(medians[algo]);
      report["slopes"][algo] = {{"slope", fit.slope}, {"ci95", fit.ci95}};
    }
  }

  if (plan.baseline) {
    const long long T_max =
        *std::max_element(plan.T_grid.begin(), plan.T_grid.end());
    const std::vector<double> grid = baseline_grid_from_hints(hints);
    RngStream tune_rng = RngStream(0xBA5E11u);
    const TuneMetric metric = setup.problem.name == "sinbump"
                                  ? TuneMetric::grad_norm_sq
                                  : TuneMetric::f_gap;
    auto factory = [&setup]() { return make_run_oracle(setup); };
    const TuneResult tuned =
        tune_sgd_baseline(factory, setup.x0, static_cast<int>(T_max), grid,
                          plan.trials, metric, tune_rng);
    report["baseline"] = {{"eta_star", tuned.eta_star},
                          {"err_star", tuned.err_star}};

    TrueParams truth;
    truth.D = setup.ball ? 2.0 * setup.ball->radius
                         : (setup.problem.x_star
                                ? dist(setup.x0, *setup.problem.x_star)
                                : 0.0);
    truth.L = setup.problem.smooth_L.value_or(0.0);
    truth.G = setup.problem.lipschitz_G.value_or(0.0);
    truth.sigma = setup.noise.sigma;

    for (const auto& [algo, pts] : medians) {
      double err_at_Tmax = std::numeric_limits<double>::quiet_NaN();
      for (const auto& [T, e] : pts)
        if (static_cast<long long>(T) == T_max) err_at_Tmax = e;
      json entry;
      entry["ratio"] = tuned.err_star > 0.0 ? err_at_Tmax / tuned.err_star
                                            : std::numeric_limits<double>::quiet_NaN();
      entry["budget"] = nullptr;
      if (hints.D && setup.ball) {
        std::optional<BudgetSetting> bs;
        if (algo == "dog" && setup.problem.smooth_L)
          bs = BudgetSetting::bounded_smooth_dog;
        if (algo == "dowg" && setup.problem.smooth_L)
          bs = BudgetSetting::bounded_smooth_dowg;
        if (algo == "dowg" && !setup.problem.smooth_L && setup.problem.lipschitz_G)
          bs = BudgetSetting::bounded_nonsmooth_dowg;
        if (bs)
          entry["budget"] = polylog_budget(*bs, hints, truth, T_max, plan.delta);
        entry["err"] = err_at_Tmax;
      }
      report["ratios"][algo] = entry;
    }
  }

  const fs::path report_path = fs::path(out_dir) / "report.json";
  {
    std::ofstream out(report_path);
    out << report.dump(2) << "\n";
  }
  result.report_json_path = report_path.string();

  if (plan.plots) {
    const fs::path plot_dir = fs::path(out_dir) / "plots";
    fs::create_directories(plot_dir);
    for (const auto& [algo, pts] : medians)
      write_svg_plot(plot_dir / (algo + ".svg"), algo, pts);
  }
  return result;
}

BaselineOutcome tune_baseline_from_config(const std::string& config_path,
                                          const std::string& out_dir) {
  const IniFile ini = IniFile::parse_file(config_path);
  validate_keys(ini);
  const ProblemSetup setup = build_problem(ini);
  const Hints hints = build_hints(ini);
  validate_hints_against_problem(hints, setup);

  if (!ini.has("experiment", "T_grid"))
    throw ConfigError("tune-baseline: experiment.T_grid required");
  long long T_max = 0;
  for (double t : ini.get_doubles("experiment", "T_grid"))
    T_max = std::max(T_max, static_cast<long long>(t));
  if (T_max < 1) throw ConfigError("tune-baseline: empty T_grid");
  const int trials = static_cast<int>(ini.get_int_or("experiment", "trials", 5));

  const std::vector<double> grid = baseline_grid_from_hints(hints);
  RngStream rng = RngStream(0xBA5E11u);
  const TuneMetric metric = setup.problem.name == "sinbump"
                                ? TuneMetric::grad_norm_sq
                                : TuneMetric::f_gap;
  auto factory = [&setup]() { return make_run_oracle(setup); };
  const TuneResult tuned = tune_sgd_baseline(factory, setup.x0,
                                             static_cast<int>(T_max), grid,
                                             trials, metric, rng);

  BaselineOutcome out;
  out.eta_star = tuned.eta_star;
  out.err_star = tuned.err_star;
  out.T = T_max;
  out.trials = trials;

  fs::create_directories(out_dir);
  json j;
  j["eta_star"] = tuned.eta_star;
  j["err_star"] = tuned.err_star;
  j["T"] = T_max;
  j["trials"] = trials;
  j["grid"] = json::array();
  for (const auto& [eta, err] : tuned.grid_errs)
    j["grid"].push_back({{"eta", eta}, {"err", err}});
  const fs::path path = fs::path(out_dir) / "baseline.json";
  std::ofstream f(path);
  f << j.dump(2) << "\n";
  out.baseline_json_path = path.string();
  return out;
}

}  // namespace tunefree
