#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tunefree/oracles.hpp"
#include "tunefree/problems.hpp"
#include "tunefree/rng.hpp"
#include "tunefree/vec.hpp"

namespace tunefree {

enum class Variant { dog, dowg, tdog, tdowg };

const char* to_string(Variant v);

// Running state of the distance-over-gradients stepsize family.
//   r_bar = max over k <= t of (||x_k - x0||, r_eps)   (nondecreasing)
//   u     = sum of ||g_k||^2
//   v     = sum of r_bar_k^2 ||g_k||^2
// u0/v0 are the accumulator values after the first step; the T-variants
// divide by running log factors relative to them.
struct AdaptiveState {
  int t = 0;
  Vec x;
  Vec x0;
  double r_bar = 0.0;
  double u = 0.0;
  double v = 0.0;
  double u0 = 0.0;
  double v0 = 0.0;
  double r_eps = 0.0;
};

// log_+ x = ln x + 1.
inline double log_plus(double x) { return std::log(x) + 1.0; }

struct DegenerateStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stepsize formulas:
//   dog    r_bar / sqrt(u)
//   dowg   r_bar^2 / sqrt(v)
//   tdog   r_bar / (sqrt(u) * log_+(u/u0))
//   tdowg  r_bar^2 / (sqrt(v) * log_+(v/v0))
// Throws DegenerateStateError on a zero accumulator; the all-zero-gradient
// case is handled by the caller.
double adaptive_stepsize(Variant variant, const AdaptiveState& state);

struct StepRecord {
  int t = 0;
  double f_gap = std::numeric_limits<double>::quiet_NaN();
  double grad_true_norm_sq = std::numeric_limits<double>::quiet_NaN();
  double stepsize = 0.0;
  double r_bar = 0.0;
  double sigma_bar_sq = std::numeric_limits<double>::quiet_NaN();
  std::int64_t oracle_calls = 0;
};

struct PrefixAverage {
  int length = 0;  // prefix covers iterates x_0 .. x_{length-1}
  Vec point;
};

enum class WeightKind { uniform, rbar, rbar_sq };
enum class CandidateKind { last_iterate, weighted_average, best_prefix_average };

const char* to_string(WeightKind w);
const char* to_string(CandidateKind c);

// Full iterates are kept only up to this horizon; longer runs keep the
// geometric-prefix averages and per-step scalars, which is all the
// downstream consumers need.
inline constexpr int kFullIterateLimit = 10'000;

struct Trajectory {
  Vec x0;
  Vec last;
  int T = 0;
  std::int64_t oracle_calls = 0;
  std::vector<StepRecord> steps;   // diagnostics; never fed to the algorithm
  std::vector<Vec> iterates;       // x_0..x_{T-1}, empty past kFullIterateLimit
  std::vector<double> rbar_hist;   // r_bar_t for every step
  // Weighted prefix averages snapshotted at lengths 1,2,4,...,T.
  std::vector<PrefixAverage> prefix_uniform;
  std::vector<PrefixAverage> prefix_rbar;
  std::vector<PrefixAverage> prefix_rbar_sq;

  const std::vector<PrefixAverage>& prefixes(WeightKind w) const;
  Vec weighted_average(WeightKind w) const;  // full-horizon average
};

// Prefix averages over a geometric grid of prefix lengths. Recomputed from
// the stored iterates when available, otherwise the snapshots are returned.
std::vector<PrefixAverage> weighted_prefix_average(const Trajectory& traj,
                                                   WeightKind weights);

// Diagnostic output selection: argmin of the true objective over the prefix
// averages (uses the exact problem, never the oracle).
Vec best_prefix_average(const Trajectory& traj, WeightKind weights,
                        const Problem& problem);

// Natural averaging weights per variant (DoG averages with r_bar weights,
// DoWG with r_bar^2; SGD uses uniform).
WeightKind natural_weights(Variant v);

Vec select_candidate(const Trajectory& traj, CandidateKind kind,
                     WeightKind weights, const Problem& problem);

// DoG/DoWG/T-DoG/T-DoWG: x_{k+1} = x_k - eta_k g_k with the adaptive
// stepsizes, optionally projected onto a ball after every step. Makes
// exactly T oracle calls (fewer only if the very first gradient is zero,
// in which case the run terminates successfully at x0).
Trajectory run_adaptive(Variant variant, Oracle& oracle, const Vec& x0,
                        double r_eps, int T,
                        const std::optional<Ball>& projection, RngStream& rng);

// Fixed-stepsize SGD.
Trajectory run_sgd(Oracle& oracle, const Vec& x0, double eta, int T,
                   RngStream& rng);

struct PolyakResult {
  Vec point;         // best observed iterate by objective value
  double f_hat_0 = 0.0;
  double f_best = 0.0;
  Trajectory trajectory;
};

// Polyak-stepsize gradient descent with a fixed optimum surrogate f_hat:
// eta_t = (f(x_t) - f_hat) / ||grad f(x_t)||^2. Deterministic oracle only.
PolyakResult run_polyak_gd(const Problem& problem, const Vec& x0, double f_hat,
                           int T);

// Polyak GD with the lower-bound start f_hat_0 = f(x0) - ||grad f(x0)|| * D_upper
// and a doubling-on-stall schedule: the budget is split into ceil(log2 T)
// slices, and whenever a slice ends without halving the surrogate gap the
// estimate moves halfway up to the best observed value.
PolyakResult run_polyak_adaptive(const Problem& problem, const Vec& x0,
                                 double D_upper, int T);

}  // namespace tunefree
