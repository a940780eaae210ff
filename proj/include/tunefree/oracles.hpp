#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "tunefree/problems.hpp"
#include "tunefree/rng.hpp"
#include "tunefree/vec.hpp"

namespace tunefree {

enum class NoiseKind { none, gaussian_spherical, bernoulli_sign, lb_mixture };

const char* to_string(NoiseKind kind);

// Whether the scalar value estimate is exact f(x) or perturbed by the same
// noise class as the gradient. Nothing in this library consumes noisy values,
// so `exact` is the default and still satisfies unbiasedness trivially.
enum class ValueNoise { exact, matched };

struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  double sigma = 0.0;       // target sqrt(E||n||^2)
  double r_modulus = 0.0;   // sub-gaussian norm modulus of ||n||
  double branch_prob = 0.0; // lb_mixture: probability of branch 1
  ValueNoise value_noise = ValueNoise::exact;
  // bernoulli_sign direction phi(x), ||phi(x)|| = 1; defaults to e_1.
  std::function<Vec(const Vec&)> direction;

  static NoiseModel None();
  static NoiseModel GaussianSpherical(double sigma);
  static NoiseModel BernoulliSign(double sigma,
                                  std::function<Vec(const Vec&)> direction = {});
  static NoiseModel LbMixture(double branch_prob);
};

struct OracleSample {
  double value_est = 0.0;
  Vec grad_est;
  int branch = 0;  // 0 = n/a; 1 or 2 for lb_mixture
};

// Pre-drawn branch sequence shared between the two oracles of one
// lower-bound family. Realizes the coupling from the confusion argument:
// both oracles consume the same draws, so on the all-branch-2 event they
// return identical samples.
using BranchSequence = std::shared_ptr<const std::vector<int>>;

BranchSequence make_coupled_branch_stream(RngStream& rng, int T,
                                          double branch_prob);

// Stochastic first-order oracle: unbiased value/gradient estimates for a
// Problem under a NoiseModel. Holds a mutable call counter, so use one
// instance per worker; RNG substreams keep parallel trials independent.
class Oracle {
 public:
  Oracle(Problem problem, NoiseModel noise);

  // lb_mixture oracle over a branch pair whose mixture is `mean`.
  Oracle(Problem mean, Problem branch1, Problem branch2, double branch_prob);

  OracleSample sample(const Vec& x, RngStream& rng);

  // Supplies a coupled branch stream; each sample still consumes one RNG
  // draw so call accounting matches the uncoupled oracle.
  void set_branch_sequence(BranchSequence seq);

  const Problem& problem() const { return problem_; }
  const NoiseModel& noise() const { return noise_; }
  std::int64_t call_count() const { return calls_; }

 private:
  Problem problem_;
  NoiseModel noise_;
  std::optional<std::pair<Problem, Problem>> branches_;
  BranchSequence branch_seq_;
  std::size_t branch_cursor_ = 0;
  std::int64_t calls_ = 0;
};

// Oracles for the two sides of a lower-bound family.
Oracle make_family_f_oracle(const LowerBoundFamily& fam);
Oracle make_family_h_oracle(const LowerBoundFamily& fam);

struct NoiseStats {
  double mean_norm_sq = 0.0;
  double max_norm = 0.0;
  double ksnr_hat = 1.0;  // sqrt(mean_norm_sq) / max_norm; 1 for zero noise
};

// Samples m gradients at x and isolates the noise against the exact
// gradient.
NoiseStats estimate_noise_stats(Oracle& oracle, const Vec& x, int m,
                                RngStream& rng);

}  // namespace tunefree
