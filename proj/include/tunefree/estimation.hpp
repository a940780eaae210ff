#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tunefree/optimizers.hpp"
#include "tunefree/oracles.hpp"
#include "tunefree/rng.hpp"
#include "tunefree/vec.hpp"

namespace tunefree {

enum class VeVariant { tdog_ve, tdowg_ve };

const char* to_string(VeVariant v);

struct VarianceEstimate {
  Vec mu_hat;                 // minibatch mean
  double sigma_sq_hat = 0.0;  // (1/b) sum ||mu_i - mu_hat||^2, biased 1/b
  int b = 0;
  double running_max = 0.0;   // max over steps so far
};

// Biased (1/b) sample variance of a minibatch of gradient estimates.
VarianceEstimate sample_variance(const std::vector<Vec>& samples);

struct VEConfig {
  int b = 2;           // variance minibatch size, >= 2
  double theta = 1.0;  // noise-floor parameter in (0, 1]
  double delta = 0.1;  // confidence level
  int T = 1;           // step horizon
  double alpha = 0.0;  // 8^4 * ln(60 ln(6T)/delta) / theta
  double beta = 0.0;   // coefficient on the sigma_bar^2 stepsize term
};

// Computes alpha exactly from (T, delta, theta). beta defaults to T, which
// makes the beta * sigma_bar^2 term scale like the cumulative noise energy.
VEConfig make_ve_config(int b, double theta, double delta, int T,
                        std::optional<double> beta = {});

// Smallest minibatch size b >= 2 satisfying
//   c * [ sqrt(ln(2bT/delta)/b) + ln(2 max(b,d) T/delta)/b ] <= ksnr_sq - theta.
// Throws if ksnr_sq <= theta (no b exists) or none is found below 2^32.
std::int64_t min_batch_size(double ksnr_sq, double theta, double delta,
                            std::int64_t T, int d, double c);

// The variance-estimated stepsizes, exposed for pointwise checks:
//   tdog_ve:  r/(alpha sqrt(u + beta s2)) / log_+^2(1 + (u + s2)/(u0 + s2_0))
//   tdowg_ve: r^2/(alpha sqrt(v + beta r^2 s2)) / log_+^2(1 + (v + r^2 s2)/(v0 + r0^2 s2_0))
// where s2 is the running-max variance estimate.
double ve_stepsize(VeVariant variant, const AdaptiveState& state,
                   double sigma_bar_sq, double sigma_bar_sq_0,
                   const VEConfig& cfg);

// T-DoG / T-DoWG with per-step variance estimation. Every step draws b
// gradients for the estimator plus one fresh stepping gradient, so a full
// run makes exactly T * (b + 1) oracle calls. The estimator and the stepping
// gradient consume disjoint RNG substreams.
Trajectory run_ve_adaptive(VeVariant variant, Oracle& oracle, const Vec& x0,
                           double r_eps, const VEConfig& cfg, RngStream& rng);

}  // namespace tunefree
