#include "tunefree/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trajectory_builder.hpp"

namespace tunefree {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::dog: return "dog";
    case Variant::dowg: return "dowg";
    case Variant::tdog: return "tdog";
    case Variant::tdowg: return "tdowg";
  }
  return "?";
}

const char* to_string(WeightKind w) {
  switch (w) {
    case WeightKind::uniform: return "uniform";
    case WeightKind::rbar: return "rbar";
    case WeightKind::rbar_sq: return "rbar_sq";
  }
  return "?";
}

const char* to_string(CandidateKind c) {
  switch (c) {
    case CandidateKind::last_iterate: return "last_iterate";
    case CandidateKind::weighted_average: return "weighted_average";
    case CandidateKind::best_prefix_average: return "best_prefix_average";
  }
  return "?";
}

double adaptive_stepsize(Variant variant, const AdaptiveState& s) {
  switch (variant) {
    case Variant::dog:
      if (s.u <= 0.0) throw DegenerateStateError("dog: u accumulator is zero");
      return s.r_bar / std::sqrt(s.u);
    case Variant::dowg:
      if (s.v <= 0.0) throw DegenerateStateError("dowg: v accumulator is zero");
      return s.r_bar * s.r_bar / std::sqrt(s.v);
    case Variant::tdog:
      if (s.u <= 0.0 || s.u0 <= 0.0)
        throw DegenerateStateError("tdog: u accumulator is zero");
      return s.r_bar / (std::sqrt(s.u) * log_plus(s.u / s.u0));
    case Variant::tdowg:
      if (s.v <= 0.0 || s.v0 <= 0.0)
        throw DegenerateStateError("tdowg: v accumulator is zero");
      return s.r_bar * s.r_bar / (std::sqrt(s.v) * log_plus(s.v / s.v0));
  }
  throw std::logic_error("unknown variant");
}

WeightKind natural_weights(Variant v) {
  switch (v) {
    case Variant::dog:
    case Variant::tdog: return WeightKind::rbar;
    case Variant::dowg:
    case Variant::tdowg: return WeightKind::rbar_sq;
  }
  return WeightKind::uniform;
}

const std::vector<PrefixAverage>& Trajectory::prefixes(WeightKind w) const {
  switch (w) {
    case WeightKind::uniform: return prefix_uniform;
    case WeightKind::rbar: return prefix_rbar;
    case WeightKind::rbar_sq: return prefix_rbar_sq;
  }
  return prefix_uniform;
}

Vec Trajectory::weighted_average(WeightKind w) const {
  const auto& ps = prefixes(w);
  if (ps.empty()) throw std::logic_error("trajectory: empty run has no average");
  return ps.back().point;
}

std::vector<PrefixAverage> weighted_prefix_average(const Trajectory& traj,
                                                   WeightKind weights) {
  if (traj.T == 0) throw std::invalid_argument("weighted_prefix_average: empty trajectory");
  if (traj.iterates.empty()) return traj.prefixes(weights);

  std::vector<PrefixAverage> out;
  Vec sum = zeros(traj.x0.size());
  double wsum = 0.0;
  int next_snapshot = 1;
  const int T = static_cast<int>(traj.iterates.size());
  for (int t = 0; t < T; ++t) {
    double w = 1.0;
    if (weights == WeightKind::rbar) w = traj.rbar_hist[t];
    if (weights == WeightKind::rbar_sq) w = traj.rbar_hist[t] * traj.rbar_hist[t];
    axpy(w, traj.iterates[t], sum);
    wsum += w;
    if (t + 1 == next_snapshot || t + 1 == T) {
      out.push_back({t + 1, scaled(sum, 1.0 / wsum)});
      while (next_snapshot <= t + 1) next_snapshot *= 2;
    }
  }
  return out;
}

Vec best_prefix_average(const Trajectory& traj, WeightKind weights,
                        const Problem& problem) {
  const auto& ps = traj.prefixes(weights);
  if (ps.empty()) throw std::invalid_argument("best_prefix_average: empty trajectory");
  const PrefixAverage* best = &ps.front();
  double best_f = problem.value(best->point);
  for (const auto& p : ps) {
    const double f = problem.value(p.point);
    if (f < best_f) {
      best_f = f;
      best = &p;
    }
  }
  return best->point;
}

Vec select_candidate(const Trajectory& traj, CandidateKind kind,
                     WeightKind weights, const Problem& problem) {
  switch (kind) {
    case CandidateKind::last_iterate: return traj.last;
    case CandidateKind::weighted_average: return traj.weighted_average(weights);
    case CandidateKind::best_prefix_average:
      return best_prefix_average(traj, weights, problem);
  }
  throw std::logic_error("unknown candidate kind");
}

using detail::TrajectoryBuilder;

Trajectory run_adaptive(Variant variant, Oracle& oracle, const Vec& x0,
                        double r_eps, int T,
                        const std::optional<Ball>& projection, RngStream& rng) {
  if (r_eps <= 0.0) throw std::invalid_argument("run_adaptive: r_eps must be positive");
  if (T < 1) throw std::invalid_argument("run_adaptive: T must be >= 1");

  const std::int64_t calls_before = oracle.call_count();
  TrajectoryBuilder builder(x0, T, oracle.problem());

  AdaptiveState st;
  st.x = x0;
  st.x0 = x0;
  st.r_eps = r_eps;
  st.r_bar = r_eps;

  for (int t = 0; t < T; ++t) {
    st.t = t;
    st.r_bar = std::max(st.r_bar, std::max(dist(st.x, x0), r_eps));
    const double prev_r_bar = st.r_bar;

    const OracleSample s = oracle.sample(st.x, rng);
    const double g_sq = norm_sq(s.grad_est);
    st.u += g_sq;
    st.v += st.r_bar * st.r_bar * g_sq;
    if (t == 0) {
      st.u0 = st.u;
      st.v0 = st.v;
      if (st.u0 == 0.0) {
        // Exact stationary point at x0; the stepsize is 0/0, so stop here.
        builder.record(0, x0, st.r_bar, 0.0, oracle.call_count() - calls_before,
                       std::numeric_limits<double>::quiet_NaN());
        return builder.finish(x0, oracle.call_count() - calls_before);
      }
    }

    const double eta = adaptive_stepsize(variant, st);
    builder.record(t, st.x, st.r_bar, eta, oracle.call_count() - calls_before,
                   std::numeric_limits<double>::quiet_NaN());

    axpy(-eta, s.grad_est, st.x);
    if (projection) st.x = project_ball(st.x, *projection);

    // Single-step growth bound on the distance estimator.
    const double r_next = std::max(prev_r_bar, dist(st.x, x0));
    if (r_next > 2.0 * prev_r_bar * (1.0 + 1e-12))
      throw std::logic_error("run_adaptive: r_bar growth bound violated");
  }
  return builder.finish(st.x, oracle.call_count() - calls_before);
}

Trajectory run_sgd(Oracle& oracle, const Vec& x0, double eta, int T,
                   RngStream& rng) {
  if (eta <= 0.0) throw std::invalid_argument("run_sgd: eta must be positive");
  if (T < 1) throw std::invalid_argument("run_sgd: T must be >= 1");

  const std::int64_t calls_before = oracle.call_count();
  TrajectoryBuilder builder(x0, T, oracle.problem());

  Vec x = x0;
  for (int t = 0; t < T; ++t) {
    const OracleSample s = oracle.sample(x, rng);
    builder.record(t, x, 1.0, eta, oracle.call_count() - calls_before,
                   std::numeric_limits<double>::quiet_NaN());
    axpy(-eta, s.grad_est, x);
  }
  return builder.finish(x, oracle.call_count() - calls_before);
}

PolyakResult run_polyak_gd(const Problem& problem, const Vec& x0, double f_hat,
                           int T) {
  if (T < 1) throw std::invalid_argument("run_polyak_gd: T must be >= 1");
  TrajectoryBuilder builder(x0, T, problem);

  PolyakResult res;
  res.f_hat_0 = f_hat;
  res.point = x0;
  res.f_best = problem.value(x0);

  Vec x = x0;
  std::int64_t calls = 0;
  for (int t = 0; t < T; ++t) {
    const double f = problem.value(x);
    const Vec g = problem.grad(x);
    ++calls;
    if (f < res.f_best) {
      res.f_best = f;
      res.point = x;
    }
    const double g_sq = norm_sq(g);
    if (g_sq == 0.0) {
      builder.record(t, x, 1.0, 0.0, calls, std::numeric_limits<double>::quiet_NaN());
      res.point = x;
      res.f_best = f;
      break;
    }
    const double eta = (f - f_hat) / g_sq;
    builder.record(t, x, 1.0, eta, calls, std::numeric_limits<double>::quiet_NaN());
    axpy(-eta, g, x);
  }
  res.trajectory = builder.finish(x, calls);
  return res;
}

PolyakResult run_polyak_adaptive(const Problem& problem, const Vec& x0,
                                 double D_upper, int T) {
  if (D_upper <= 0.0)
    throw std::invalid_argument("run_polyak_adaptive: D_upper must be positive");
  if (T < 1) throw std::invalid_argument("run_polyak_adaptive: T must be >= 1");

  const double f0 = problem.value(x0);
  const Vec g0 = problem.grad(x0);
  const double f_hat_0 = f0 - norm(g0) * D_upper;

  TrajectoryBuilder builder(x0, T, problem);
  PolyakResult res;
  res.f_hat_0 = f_hat_0;
  res.point = x0;
  res.f_best = f0;

  const int slices = std::max(1, static_cast<int>(std::ceil(std::log2(std::max(2, T)))));
  const int slice_len = (T + slices - 1) / slices;

  double f_hat = f_hat_0;
  Vec x = x0;
  std::int64_t calls = 0;
  int t = 0;
  bool stationary = false;
  while (t < T && !stationary) {
    const double gap_at_slice_start = res.f_best - f_hat;
    const int slice_end = std::min(T, t + slice_len);
    for (; t < slice_end; ++t) {
      const double f = problem.value(x);
      const Vec g = problem.grad(x);
      ++calls;
      if (f < res.f_best) {
        res.f_best = f;
        res.point = x;
      }
      const double g_sq = norm_sq(g);
      if (g_sq == 0.0) {
        builder.record(t, x, 1.0, 0.0, calls, std::numeric_limits<double>::quiet_NaN());
        res.point = x;
        res.f_best = f;
        stationary = true;
        ++t;
        break;
      }
      const double eta = (f - f_hat) / g_sq;
      builder.record(t, x, 1.0, eta, calls, std::numeric_limits<double>::quiet_NaN());
      axpy(-eta, g, x);
    }
    // Stalled slice: the surrogate gap did not halve, so the estimate was
    // too pessimistic. Move it halfway toward the best value seen.
    if (!stationary && res.f_best - f_hat > 0.5 * gap_at_slice_start)
      f_hat = 0.5 * (f_hat + res.f_best);
  }
  res.trajectory = builder.finish(x, calls);
  return res;
}

}  // namespace tunefree
