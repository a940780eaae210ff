#pragma once

#include <cstdint>
#include <vector>

#include "tunefree/oracles.hpp"
#include "tunefree/rng.hpp"
#include "tunefree/vec.hpp"

namespace tunefree {

// Bound pairs on the parameters the restart schedule needs: smoothness L,
// noise bound R, and initial gap Delta = f(x0) - f*.
struct NonconvexHints {
  double L_lo = 0.0, L_hi = 0.0;
  double R_lo = 0.0, R_hi = 0.0;
  double Delta_lo = 0.0, Delta_hi = 0.0;

  void validate() const;
};

struct LeaderResult {
  Vec leader;                       // selected point
  Vec g_hat;                        // averaged stochastic gradient there
  double h_min = 0.0;               // ||g_hat|| of the leader
  std::vector<int> sampled_indices; // the M sampled positions in V
};

// Subsampling selection: draws M = max(1, ceil(ln(1/delta))) indices i.i.d.
// with replacement, P(i) proportional to 1/sqrt(i+1) over the chronological
// order of V, averages K fresh stochastic gradients at each sampled point,
// and returns the point with the smallest averaged-gradient norm. Consumes
// exactly M*K oracle calls.
LeaderResult find_leader(const std::vector<Vec>& V, double delta, int K,
                         Oracle& oracle, RngStream& rng);

int leader_sample_count(double delta);  // M

// Epoch count N = 1 + ceil(ln( min(L_hi, sqrt(5 T R_hi^2 / (2 Delta_lo))) /
//                              max(L_lo, sqrt(5 T R_lo^2 / Delta_hi)) )),
// clamped to at least 1. Natural logarithm.
int compute_epochs_N(const NonconvexHints& hints, std::int64_t T);

struct RestartedSgdResult {
  Vec y_bar;                           // argmin over epochs of ||g_hat||
  std::vector<LeaderResult> per_epoch;
  std::vector<double> epoch_etas;
  std::int64_t calls = 0;              // N * T * (1 + M)
  int N = 0;
  int T = 0;                           // per-epoch budget
  double eta0 = 0.0;
  bool degenerate = false;             // T_total < N path: returned y0
};

// Restarted SGD: N epochs of fixed-stepsize SGD from y0 with a doubling
// stepsize ladder eta_n = eta0 * 2^n, each epoch followed by find_leader
// over its iterates with per-point budget K = T; the final answer is the
// epoch leader with the smallest estimated gradient norm (ties toward the
// smaller stepsize).
RestartedSgdResult restarted_sgd(Oracle& oracle, const Vec& y0, double delta,
                                 const NonconvexHints& hints,
                                 std::int64_t T_total, RngStream& rng);

}  // namespace tunefree
