#include "tunefree/nonconvex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tunefree {

namespace {

// Iterates past this magnitude are clamped; epochs whose stepsize ladder
// overshoots 1/L may diverge, and their leader estimates then naturally
// lose the final argmin.
constexpr double kIterateClamp = 1e150;

void clamp_iterate(Vec& x) {
  for (double& c : x) {
    if (c > kIterateClamp) c = kIterateClamp;
    if (c < -kIterateClamp) c = -kIterateClamp;
    if (std::isnan(c)) c = kIterateClamp;
  }
}

}  // namespace

void NonconvexHints::validate() const {
  auto check = [](double lo, double hi, const char* name) {
    if (!(lo > 0.0) || !(hi > 0.0) || lo > hi)
      throw std::invalid_argument(std::string("nonconvex hints: bad ") + name);
  };
  check(L_lo, L_hi, "L");
  check(R_lo, R_hi, "R");
  check(Delta_lo, Delta_hi, "Delta");
}

int leader_sample_count(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("find_leader: delta must be in (0,1)");
  return std::max(1, static_cast<int>(std::ceil(std::log(1.0 / delta))));
}

LeaderResult find_leader(const std::vector<Vec>& V, double delta, int K,
                         Oracle& oracle, RngStream& rng) {
  if (V.empty()) throw std::invalid_argument("find_leader: V must be nonempty");
  if (K < 1) throw std::invalid_argument("find_leader: K must be >= 1");
  const int M = leader_sample_count(delta);
  const std::size_t P = V.size();

  // Sampling weights 1/sqrt(i+1) over chronological order, i = 1..P.
  std::vector<double> cdf(P);
  double total = 0.0;
  for (std::size_t i = 0; i < P; ++i) {
    total += 1.0 / std::sqrt(static_cast<double>(i) + 2.0);
    cdf[i] = total;
  }

  LeaderResult res;
  res.sampled_indices.reserve(static_cast<std::size_t>(M));
  bool have_leader = false;
  for (int m = 0; m < M; ++m) {
    const double roll = rng.uniform() * total;
    const std::size_t idx = static_cast<std::size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), roll) - cdf.begin());
    const std::size_t i = std::min(idx, P - 1);
    res.sampled_indices.push_back(static_cast<int>(i));

    Vec g_sum = zeros(V[i].size());
    for (int k = 0; k < K; ++k)
      axpy(1.0, oracle.sample(V[i], rng).grad_est, g_sum);
    const Vec g_hat = scaled(g_sum, 1.0 / K);
    const double h = norm(g_hat);
    if (!have_leader || h < res.h_min) {
      have_leader = true;
      res.h_min = h;
      res.leader = V[i];
      res.g_hat = g_hat;
    }
  }
  return res;
}

int compute_epochs_N(const NonconvexHints& hints, std::int64_t T) {
  hints.validate();
  if (T < 1) throw std::invalid_argument("compute_epochs_N: T must be >= 1");
  const double Td = static_cast<double>(T);
  const double num =
      std::min(hints.L_hi, std::sqrt(5.0 * Td * hints.R_hi * hints.R_hi /
                                     (2.0 * hints.Delta_lo)));
  const double den = std::max(
      hints.L_lo, std::sqrt(5.0 * Td * hints.R_lo * hints.R_lo / hints.Delta_hi));
  const double raw = 1.0 + std::ceil(std::log(num / den));
  return std::max(1, static_cast<int>(raw));
}

RestartedSgdResult restarted_sgd(Oracle& oracle, const Vec& y0, double delta,
                                 const NonconvexHints& hints,
                                 std::int64_t T_total, RngStream& rng) {
  hints.validate();
  if (T_total < 1)
    throw std::invalid_argument("restarted_sgd: T_total must be >= 1");

  RestartedSgdResult res;
  res.N = compute_epochs_N(hints, T_total);
  if (T_total < res.N) {
    res.y_bar = y0;
    res.degenerate = true;
    return res;
  }

  const std::int64_t T = (T_total + res.N - 1) / res.N;
  res.T = static_cast<int>(T);
  res.eta0 = std::min(1.0 / hints.L_hi,
                      std::sqrt(2.0 * hints.Delta_lo /
                                (5.0 * static_cast<double>(T) * hints.R_hi * hints.R_hi)));

  const std::int64_t calls_before = oracle.call_count();
  double best_h = 0.0;
  for (int n = 1; n <= res.N; ++n) {
    const double eta = res.eta0 * std::pow(2.0, n);
    res.epoch_etas.push_back(eta);

    RngStream rng_epoch = rng.child(static_cast<std::uint64_t>(n));
    RngStream rng_sgd = rng_epoch.child(1);
    RngStream rng_leader = rng_epoch.child(2);

    std::vector<Vec> iterates;
    iterates.reserve(static_cast<std::size_t>(T));
    Vec x = y0;
    for (std::int64_t t = 0; t < T; ++t) {
      const OracleSample s = oracle.sample(x, rng_sgd);
      axpy(-eta, s.grad_est, x);
      clamp_iterate(x);
      iterates.push_back(x);
    }

    LeaderResult lead =
        find_leader(iterates, delta, static_cast<int>(T), oracle, rng_leader);
    if (res.per_epoch.empty() || lead.h_min < best_h) {
      best_h = lead.h_min;
      res.y_bar = lead.leader;
    }
    res.per_epoch.push_back(std::move(lead));
  }
  res.calls = oracle.call_count() - calls_before;
  return res;
}

}  // namespace tunefree
