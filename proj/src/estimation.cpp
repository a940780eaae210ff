#include "tunefree/estimation.hpp"

#include <cmath>
#include <stdexcept>

#include "trajectory_builder.hpp"

namespace tunefree {

const char* to_string(VeVariant v) {
  return v == VeVariant::tdog_ve ? "tdog-ve" : "tdowg-ve";
}

VarianceEstimate sample_variance(const std::vector<Vec>& samples) {
  if (samples.size() < 2)
    throw std::invalid_argument("sample_variance: need at least 2 samples");
  const int b = static_cast<int>(samples.size());
  Vec mu = zeros(samples.front().size());
  for (const Vec& s : samples) axpy(1.0, s, mu);
  for (double& c : mu) c /= b;

  double ss = 0.0;
  for (const Vec& s : samples) {
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double e = s[i] - mu[i];
      d += e * e;
    }
    ss += d;
  }
  VarianceEstimate est;
  est.mu_hat = std::move(mu);
  est.sigma_sq_hat = ss / b;
  est.b = b;
  est.running_max = est.sigma_sq_hat;
  return est;
}

VEConfig make_ve_config(int b, double theta, double delta, int T,
                        std::optional<double> beta) {
  if (b < 2) throw std::invalid_argument("ve config: b must be >= 2");
  if (!(theta > 0.0 && theta <= 1.0))
    throw std::invalid_argument("ve config: theta must be in (0,1]");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("ve config: delta must be in (0,1)");
  if (T < 1) throw std::invalid_argument("ve config: T must be >= 1");

  VEConfig cfg;
  cfg.b = b;
  cfg.theta = theta;
  cfg.delta = delta;
  cfg.T = T;
  cfg.alpha = 4096.0 * std::log(60.0 * std::log(6.0 * T) / delta) / theta;
  cfg.beta = beta ? *beta : static_cast<double>(T);
  return cfg;
}

namespace {

double batch_condition_lhs(double b, double T, double delta, int d, double c) {
  const double bd = std::max(b, static_cast<double>(d));
  return c * (std::sqrt(std::log(2.0 * b * T / delta) / b) +
              std::log(2.0 * bd * T / delta) / b);
}

}  // namespace

std::int64_t min_batch_size(double ksnr_sq, double theta, double delta,
                            std::int64_t T, int d, double c) {
  if (c <= 0.0) throw std::invalid_argument("min_batch_size: c must be positive");
  if (theta < 0.0 || ksnr_sq > 1.0 + 1e-12 || theta > ksnr_sq)
    throw std::invalid_argument("min_batch_size: need 0 <= theta <= ksnr_sq <= 1");
  const double rhs = ksnr_sq - theta;
  if (rhs <= 0.0)
    throw std::invalid_argument("min_batch_size: infeasible, ksnr_sq <= theta");

  const double Td = static_cast<double>(T);
  const std::int64_t cap = std::int64_t(1) << 32;

  // The LHS is eventually decreasing in b; scan the head, then gallop.
  const std::int64_t scan_limit = 1 << 16;
  for (std::int64_t b = 2; b <= scan_limit; ++b)
    if (batch_condition_lhs(static_cast<double>(b), Td, delta, d, c) <= rhs)
      return b;

  std::int64_t lo = scan_limit, hi = scan_limit;
  while (batch_condition_lhs(static_cast<double>(hi), Td, delta, d, c) > rhs) {
    lo = hi;
    hi *= 2;
    if (hi > cap)
      throw std::runtime_error("min_batch_size: no feasible b below 2^32");
  }
  while (lo + 1 < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (batch_condition_lhs(static_cast<double>(mid), Td, delta, d, c) <= rhs)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double ve_stepsize(VeVariant variant, const AdaptiveState& s,
                   double sigma_bar_sq, double sigma_bar_sq_0,
                   const VEConfig& cfg) {
  const double lp = [&] {
    if (variant == VeVariant::tdog_ve)
      return log_plus(1.0 + (s.u + sigma_bar_sq) / (s.u0 + sigma_bar_sq_0));
    const double r0_sq = s.r_eps * s.r_eps;
    return log_plus(1.0 + (s.v + s.r_bar * s.r_bar * sigma_bar_sq) /
                              (s.v0 + r0_sq * sigma_bar_sq_0));
  }();
  if (!std::isfinite(lp))
    throw DegenerateStateError("ve_stepsize: zero accumulators");

  if (variant == VeVariant::tdog_ve)
    return s.r_bar / (cfg.alpha * std::sqrt(s.u + cfg.beta * sigma_bar_sq)) /
           (lp * lp);
  return s.r_bar * s.r_bar /
         (cfg.alpha *
          std::sqrt(s.v + cfg.beta * s.r_bar * s.r_bar * sigma_bar_sq)) /
         (lp * lp);
}

Trajectory run_ve_adaptive(VeVariant variant, Oracle& oracle, const Vec& x0,
                           double r_eps, const VEConfig& cfg, RngStream& rng) {
  if (r_eps <= 0.0)
    throw std::invalid_argument("run_ve_adaptive: r_eps must be positive");
  if (cfg.T < 1) throw std::invalid_argument("run_ve_adaptive: T must be >= 1");
  if (cfg.b < 2) throw std::invalid_argument("run_ve_adaptive: b must be >= 2");

  // Disjoint substreams: the analysis needs the stepping gradient to be
  // independent of the variance minibatch.
  RngStream rng_batch = rng.child(1);
  RngStream rng_step = rng.child(2);

  const std::int64_t calls_before = oracle.call_count();
  detail::TrajectoryBuilder builder(x0, cfg.T, oracle.problem());

  AdaptiveState st;
  st.x = x0;
  st.x0 = x0;
  st.r_eps = r_eps;
  st.r_bar = r_eps;

  double sigma_bar_sq = 0.0;
  double sigma_bar_sq_0 = 0.0;

  std::vector<Vec> batch(static_cast<std::size_t>(cfg.b));
  for (int t = 0; t < cfg.T; ++t) {
    st.t = t;
    st.r_bar = std::max(st.r_bar, std::max(dist(st.x, x0), r_eps));

    for (int i = 0; i < cfg.b; ++i)
      batch[static_cast<std::size_t>(i)] = oracle.sample(st.x, rng_batch).grad_est;
    const VarianceEstimate ve = sample_variance(batch);
    sigma_bar_sq = std::max(sigma_bar_sq, ve.sigma_sq_hat);
    if (t == 0) sigma_bar_sq_0 = ve.sigma_sq_hat;

    const OracleSample s = oracle.sample(st.x, rng_step);
    const double g_sq = norm_sq(s.grad_est);
    st.u += g_sq;
    st.v += st.r_bar * st.r_bar * g_sq;
    if (t == 0) {
      st.u0 = st.u;
      st.v0 = st.v;
      if (st.u0 == 0.0 && sigma_bar_sq_0 == 0.0) {
        // Zero gradient and zero estimated noise at x0: stationary point.
        builder.record(0, x0, st.r_bar, 0.0, oracle.call_count() - calls_before,
                       sigma_bar_sq);
        return builder.finish(x0, oracle.call_count() - calls_before);
      }
    }

    const double eta = ve_stepsize(variant, st, sigma_bar_sq, sigma_bar_sq_0, cfg);
    builder.record(t, st.x, st.r_bar, eta, oracle.call_count() - calls_before,
                   sigma_bar_sq);
    axpy(-eta, s.grad_est, st.x);
  }
  return builder.finish(st.x, oracle.call_count() - calls_before);
}

}  // namespace tunefree
