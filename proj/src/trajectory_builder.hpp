#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include "tunefree/optimizers.hpp"

namespace tunefree::detail {

// Per-step bookkeeping shared by the run_* loops: iterate storage (with the
// long-horizon thinning policy), running weighted sums for the three prefix
// averagings, and out-of-band diagnostics against the exact problem.
class TrajectoryBuilder {
 public:
  TrajectoryBuilder(const Vec& x0, int T, const Problem& problem)
      : problem_(problem), T_(T) {
    traj_.x0 = x0;
    traj_.last = x0;
    store_iterates_ = T <= kFullIterateLimit;
    sum_uniform_ = zeros(x0.size());
    sum_rbar_ = zeros(x0.size());
    sum_rbar_sq_ = zeros(x0.size());
    gap_known_ = problem.x_star.has_value();
  }

  // Records iterate x_t (pre-step) with its r_bar weight and the stepsize
  // chosen at this step.
  void record(int t, const Vec& x_t, double r_bar, double stepsize,
              std::int64_t oracle_calls,
              double sigma_bar_sq = std::numeric_limits<double>::quiet_NaN()) {
    if (store_iterates_) traj_.iterates.push_back(x_t);
    traj_.rbar_hist.push_back(r_bar);

    axpy(1.0, x_t, sum_uniform_);
    w_uniform_ += 1.0;
    axpy(r_bar, x_t, sum_rbar_);
    w_rbar_ += r_bar;
    axpy(r_bar * r_bar, x_t, sum_rbar_sq_);
    w_rbar_sq_ += r_bar * r_bar;

    StepRecord rec;
    rec.t = t;
    rec.stepsize = stepsize;
    rec.r_bar = r_bar;
    rec.oracle_calls = oracle_calls;
    rec.sigma_bar_sq = sigma_bar_sq;
    if (gap_known_) rec.f_gap = problem_.value(x_t) - problem_.f_star;
    rec.grad_true_norm_sq = norm_sq(problem_.grad(x_t));
    if (store_steps(t)) traj_.steps.push_back(rec);

    if (t + 1 == next_snapshot_ || t + 1 == T_) {
      snapshot(t + 1);
      while (next_snapshot_ <= t + 1) next_snapshot_ *= 2;
    }
    traj_.T = t + 1;
  }

  Trajectory finish(const Vec& last, std::int64_t oracle_calls) {
    traj_.last = last;
    traj_.oracle_calls = oracle_calls;
    if (traj_.T > 0 && traj_.prefix_uniform.back().length != traj_.T)
      snapshot(traj_.T);
    return std::move(traj_);
  }

 private:
  bool store_steps(int t) const {
    if (T_ <= kFullIterateLimit) return true;
    return (t & (t - 1)) == 0 || t == T_ - 1;  // powers of two plus the tail
  }

  void snapshot(int length) {
    traj_.prefix_uniform.push_back({length, scaled(sum_uniform_, 1.0 / w_uniform_)});
    traj_.prefix_rbar.push_back({length, scaled(sum_rbar_, 1.0 / w_rbar_)});
    traj_.prefix_rbar_sq.push_back({length, scaled(sum_rbar_sq_, 1.0 / w_rbar_sq_)});
  }

  const Problem& problem_;
  Trajectory traj_;
  int T_;
  bool store_iterates_ = true;
  bool gap_known_ = true;
  Vec sum_uniform_, sum_rbar_, sum_rbar_sq_;
  double w_uniform_ = 0.0, w_rbar_ = 0.0, w_rbar_sq_ = 0.0;
  int next_snapshot_ = 1;
};

}  // namespace tunefree::detail
