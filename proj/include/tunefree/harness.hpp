#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tunefree/estimation.hpp"
#include "tunefree/hints.hpp"
#include "tunefree/ini.hpp"
#include "tunefree/nonconvex.hpp"
#include "tunefree/optimizers.hpp"
#include "tunefree/oracles.hpp"
#include "tunefree/problems.hpp"

namespace tunefree {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One row of runs.csv.
struct RunRecord {
  std::string run_id;
  std::string algo;
  std::string problem;
  std::string noise;
  long long T = 0;
  long long seed = 0;
  std::string candidate_kind;
  double f_gap = 0.0;
  double grad_norm_sq = 0.0;
  std::int64_t oracle_calls = 0;
  std::int64_t wall_ms = 0;
};

inline constexpr const char* kRunsCsvHeader =
    "run_id,algo,problem,noise,T,seed,candidate_kind,f_gap,grad_norm_sq,"
    "oracle_calls,wall_ms";

// theta_{T,delta} = ln(60 ln(6T) / delta), the confidence factor in the
// high-probability stepsize and budget constants.
double theta_confidence(double T, double delta);

enum class BudgetSetting {
  bounded_smooth_dog,
  bounded_smooth_dowg,
  bounded_nonsmooth_dowg,
};

// True problem parameters used by the budget formulas (the hint ratios only
// enter through the logarithms).
struct TrueParams {
  double D = 0.0;
  double L = 0.0;
  double G = 0.0;
  double sigma = 0.0;
};

// The explicit bounded-setting error budgets:
//   smooth DoG    64 ln^2(2D/D_lo) L D^2/T + 320 ln^2(2D/D_lo) theta sigma D/sqrt(T)
//   smooth DoWG   700 theta log_+(D_hi/D_lo) (L D^2/T + sigma D/sqrt(T))
//   nonsmooth DoWG  748 D G theta/sqrt(T) log_+(D_hi/D_lo)
double polylog_budget(BudgetSetting setting, const Hints& hints,
                      const TrueParams& truth, long long T, double delta);

struct SlopeFit {
  double slope = 0.0;
  double ci95 = 0.0;
};

// OLS fit of ln(err) against ln(T); the CI half-width comes from the
// residual variance.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs);

enum class TuneMetric { f_gap, grad_norm_sq };

struct TuneResult {
  double eta_star = 0.0;
  double err_star = 0.0;
  std::vector<std::pair<double, double>> grid_errs;  // (eta, median err)
};

// Grid search realizing the optimally tuned SGD comparator: for each
// stepsize, the median over `trials` seeded runs of the chosen metric
// (f_gap: best candidate's true gap; grad_norm_sq: trajectory mean of the
// true squared gradient norm). Ties go to the smaller stepsize.
TuneResult tune_sgd_baseline(const std::function<Oracle()>& oracle_factory,
                             const Vec& x0, int T,
                             const std::vector<double>& grid, int trials,
                             TuneMetric metric, RngStream& rng);

// Default comparator grid: 16 geometric stepsizes spanning
// 2^-10 / L_hi .. 2^5 / L_lo.
std::vector<double> baseline_grid_from_hints(const Hints& hints);

// Bounded-setting wrapper: when T < 4 log_+(D_hi/D_lo) the run is not long
// enough for the adaptive guarantees and the wrapper just returns x0
// (a trajectory of one step, zero movement); otherwise runs the variant
// with r_eps = D_lo.
Trajectory run_bounded_adaptive(Variant variant, Oracle& oracle, const Vec& x0,
                                const Hints& hints, int T,
                                const std::optional<Ball>& projection,
                                RngStream& rng);

struct ConflictResult {
  bool conflict = false;
  double lower = 0.0;  // forced lower bound on x_out
  double upper = 0.0;  // forced upper bound on x_out
};

// Evaluates the impossibility arguments' closed-form bounds on x_out with
// the proofs' substitutions (smooth/nonconvex: u = T^2 + 1, v = T^2;
// nonsmooth: u = 1 - 1/T, x0 = 1) and reports whether they contradict.
// iota is the polylog budget value at this T; c the absolute constant.
ConflictResult lb_conflict_check(LbKind kind, long long T, double iota,
                                 double c);

// Smallest T at which the conflict appears, for iota(T) supplied as a
// callable (default in the CLI: ln^2(T+1)).
long long lb_conflict_threshold(LbKind kind,
                                const std::function<double(long long)>& iota_fn,
                                double c, long long T_max = 1LL << 40);

struct ConfusionConfig {
  Variant algo = Variant::dog;
  double r_eps = 0.0;  // <= 0 means: use the family's D_lo hint
};

struct ConfusionResult {
  int T = 0;
  long long trials = 0;
  double empirical_p = 0.0;     // fraction of all-branch-2 trials
  double closed_form_p = 0.0;   // (1 - 1/T)^T
  bool coupled_trajectories_identical = true;
  long long all_branch2_trials = 0;
};

// Runs the configured optimizer against the coupled f- and h-oracles of a
// lower-bound family, one coupled branch stream per trial, and checks that
// the two runs are bit-identical whenever the stream never drew branch 1.
ConfusionResult run_confusion_experiment(const LowerBoundFamily& fam,
                                         const ConfusionConfig& algo_cfg,
                                         long long trials, RngStream& rng);

struct ExecuteResult {
  std::vector<RunRecord> records;
  std::string runs_csv_path;
  std::string report_json_path;
};

// Runs the experiment matrix (algos x T_grid x seeds) declared in an INI
// config and writes runs.csv plus report.json (and optional SVG plots)
// under out_dir. Unknown sections or keys are hard errors.
ExecuteResult execute_config(const std::string& config_path,
                             const std::string& out_dir);

struct BaselineOutcome {
  double eta_star = 0.0;
  double err_star = 0.0;
  long long T = 0;
  int trials = 0;
  std::string baseline_json_path;
};

// Tunes the SGD comparator for the problem/noise/hints of a config at the
// largest declared horizon; writes baseline.json under out_dir.
BaselineOutcome tune_baseline_from_config(const std::string& config_path,
                                          const std::string& out_dir);

// RFC-4180 field quoting.
std::string csv_escape(const std::string& field);

}  // namespace tunefree
