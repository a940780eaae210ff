#include <cmath>
#include <map>

#include "doctest.h"
#include "tunefree/nonconvex.hpp"

using namespace tunefree;

TEST_CASE("leader sample count") {
  CHECK(leader_sample_count(std::exp(-2.0)) == 2);
  CHECK(leader_sample_count(0.5) == 1);
  CHECK(leader_sample_count(0.1) == 3);
}

TEST_CASE("find_leader with one point returns it") {
  const Problem p = make_quadratic(1.0, Vec{0.0}, 1);
  Oracle oracle(p, NoiseModel::BernoulliSign(1.0));
  RngStream rng(1);
  const LeaderResult res = find_leader({Vec{3.0}}, 0.1, 4, oracle, rng);
  CHECK(res.leader[0] == 3.0);
  CHECK(res.sampled_indices.size() == 3);  // M = ceil(ln 10)
  CHECK(oracle.call_count() == 3 * 4);     // M * K
}

TEST_CASE("find_leader sampling distribution for P = 3") {
  const Problem p = make_quadratic(1.0, Vec{0.0}, 1);
  const std::vector<Vec> V = {Vec{1.0}, Vec{2.0}, Vec{3.0}};
  // Unnormalized weights 1/sqrt(2), 1/sqrt(3), 1/sqrt(4).
  const double z = 1.0 / std::sqrt(2.0) + 1.0 / std::sqrt(3.0) + 0.5;
  const double expect[3] = {1.0 / std::sqrt(2.0) / z, 1.0 / std::sqrt(3.0) / z,
                            0.5 / z};
  CHECK(expect[0] == doctest::Approx(0.39627).epsilon(1e-4));
  CHECK(expect[1] == doctest::Approx(0.32355).epsilon(1e-4));
  CHECK(expect[2] == doctest::Approx(0.28018).epsilon(1e-4));

  int counts[3] = {0, 0, 0};
  RngStream rng(7);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    Oracle oracle(p, NoiseModel::None());
    RngStream r = rng.child(i);
    // delta = 0.5 gives M = 1, a single draw per call.
    const LeaderResult res = find_leader(V, 0.5, 1, oracle, r);
    ++counts[res.sampled_indices[0]];
  }
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(counts[i] / double(draws) - expect[i]) < 0.01);
}

TEST_CASE("find_leader with exact gradients picks argmin over sampled set") {
  const Problem p = make_quadratic(1.0, Vec{0.0}, 1);
  const std::vector<Vec> V = {Vec{5.0}, Vec{-2.0}, Vec{0.5}, Vec{4.0}};
  RngStream rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    Oracle oracle(p, NoiseModel::None());
    RngStream r = rng.child(rep);
    const LeaderResult res = find_leader(V, 0.05, 1, oracle, r);  // M = 3
    double best = 1e300;
    for (int idx : res.sampled_indices)
      best = std::min(best, norm(p.grad(V[size_t(idx)])));
    CHECK(res.h_min == doctest::Approx(best));
    CHECK(norm(p.grad(res.leader)) == doctest::Approx(best));
  }
  CHECK_THROWS_AS(
      [&] {
        Oracle oracle(p, NoiseModel::None());
        RngStream r(1);
        find_leader({}, 0.1, 1, oracle, r);
      }(),
      std::invalid_argument);
}

TEST_CASE("epoch count formula") {
  // Tight hints collapse the ratio to at most 1: N clamps to 1.
  NonconvexHints tight;
  tight.L_lo = tight.L_hi = 2.0;
  tight.R_lo = tight.R_hi = 1.0;
  tight.Delta_lo = tight.Delta_hi = 3.0;
  CHECK(compute_epochs_N(tight, 100) == 1);

  NonconvexHints wide;
  wide.L_lo = 0.01;
  wide.L_hi = 100.0;
  wide.R_lo = 0.001;
  wide.R_hi = 1.0;
  wide.Delta_lo = wide.Delta_hi = 1.0;
  // num = min(100, sqrt(250)) ~ 15.81, den = max(0.01, sqrt(5e-4)) ~ 0.02236,
  // ratio ~ 707.1, N = 1 + ceil(6.561) = 8.
  CHECK(compute_epochs_N(wide, 100) == 8);

  NonconvexHints bad = wide;
  bad.L_lo = -1.0;
  CHECK_THROWS_AS(compute_epochs_N(bad, 100), std::invalid_argument);
}

TEST_CASE("restarted sgd: degenerate budget returns y0") {
  NonconvexHints hints;
  hints.L_lo = 1e-9;
  hints.L_hi = 1e9;
  hints.R_lo = 1e-9;
  hints.R_hi = 1e9;
  hints.Delta_lo = 1e-9;
  hints.Delta_hi = 1e9;
  const Problem p = make_sinbump(1.0, 2);
  Oracle oracle(p, NoiseModel::BernoulliSign(1.0));
  RngStream rng(3);
  REQUIRE(compute_epochs_N(hints, 2) > 2);
  const RestartedSgdResult res = restarted_sgd(oracle, Vec{1.0, 1.0}, 0.1, hints, 2, rng);
  CHECK(res.degenerate);
  CHECK(res.y_bar == Vec{1.0, 1.0});
  CHECK(res.calls == 0);
}

TEST_CASE("restarted sgd: budget accounting is exact") {
  // Hints engineered so N = 3; with T_total = 300, T = 100; delta = e^-2
  // gives M = 2, hence 3 * 100 * (1 + 2) = 900 calls.
  NonconvexHints hints;
  hints.L_lo = 1.0;
  hints.L_hi = std::exp(1.5);
  hints.R_lo = 1e-6;
  hints.R_hi = 10.0;
  hints.Delta_lo = 1.0;
  hints.Delta_hi = 1.0;
  REQUIRE(compute_epochs_N(hints, 300) == 3);

  const Problem p = make_sinbump(1.0, 2);
  Oracle oracle(p, NoiseModel::BernoulliSign(1.0));
  RngStream rng(5);
  const RestartedSgdResult res =
      restarted_sgd(oracle, Vec{1.0, -1.0}, std::exp(-2.0), hints, 300, rng);
  CHECK(res.N == 3);
  CHECK(res.T == 100);
  CHECK(res.calls == 900);
  CHECK(oracle.call_count() == 900);
}

TEST_CASE("restarted sgd stepsize ladder") {
  // eta0 = min(1/L_hi, sqrt(2 Delta_lo / (5 T R_hi^2))) with T = 1000:
  // min(0.1, 0.02) = 0.02; ladder 0.04, 0.08.
  NonconvexHints hints;
  hints.L_lo = 5.0;
  hints.L_hi = 10.0;
  hints.R_lo = 1e-9;
  hints.R_hi = 1.0;
  hints.Delta_lo = 1.0;
  hints.Delta_hi = 1.0;
  REQUIRE(compute_epochs_N(hints, 2000) == 2);

  const Problem p = make_sinbump(1.0, 2);
  Oracle oracle(p, NoiseModel::BernoulliSign(1.0));
  RngStream rng(11);
  const RestartedSgdResult res =
      restarted_sgd(oracle, Vec{1.0, 1.0}, 0.1, hints, 2000, rng);
  CHECK(res.T == 1000);
  CHECK(res.eta0 == doctest::Approx(0.02));
  REQUIRE(res.epoch_etas.size() == 2);
  CHECK(res.epoch_etas[0] == doctest::Approx(0.04));
  CHECK(res.epoch_etas[1] == doctest::Approx(0.08));
}

TEST_CASE("doubling ladder covers the optimal stepsize") {
  RngStream rng(13);
  for (int i = 0; i < 2000; ++i) {
    const double eta0 = std::pow(10.0, rng.uniform(-6.0, 0.0));
    const double eta_star = eta0 * std::pow(10.0, rng.uniform(0.0, 4.0));
    const int N = static_cast<int>(std::ceil(std::log2(eta_star / eta0)));
    bool covered = false;
    for (int k = 0; k <= N; ++k) {
      const double eta = eta0 * std::pow(2.0, k);
      if (eta >= eta_star / 2.0 && eta <= eta_star * (1 + 1e-12)) covered = true;
    }
    CHECK(covered);
  }
}

TEST_CASE("restarted sgd: noiseless N=1 reduces to sgd + exact selection") {
  // Tight hints force N = 1; with exact gradients the leader is the argmin
  // of the true gradient norm over the sampled epoch iterates.
  NonconvexHints hints;
  hints.L_lo = hints.L_hi = 3.0;
  hints.R_lo = hints.R_hi = 1.0;
  hints.Delta_lo = hints.Delta_hi = 5.0;
  REQUIRE(compute_epochs_N(hints, 400) == 1);

  const Problem p = make_sinbump(1.0, 4);
  Oracle oracle(p, NoiseModel::None());
  RngStream rng(17);
  const Vec y0(4, 1.0);
  const RestartedSgdResult res = restarted_sgd(oracle, y0, 0.1, hints, 400, rng);
  CHECK(res.N == 1);
  REQUIRE(res.per_epoch.size() == 1);
  CHECK(norm_sq(p.grad(res.y_bar)) ==
        doctest::Approx(res.per_epoch[0].h_min * res.per_epoch[0].h_min));
  CHECK(norm_sq(p.grad(res.y_bar)) < norm_sq(p.grad(y0)));
}

TEST_CASE("restarted sgd determinism per seed") {
  NonconvexHints hints;
  hints.L_lo = 1.0;
  hints.L_hi = 10.0;
  hints.R_lo = 0.1;
  hints.R_hi = 2.0;
  hints.Delta_lo = 0.5;
  hints.Delta_hi = 50.0;
  const Problem p = make_sinbump(1.0, 3);
  Oracle o1(p, NoiseModel::BernoulliSign(1.0));
  Oracle o2(p, NoiseModel::BernoulliSign(1.0));
  RngStream r1(21, 2), r2(21, 2);
  const Vec y0{1.0, 0.5, -1.0};
  const RestartedSgdResult a = restarted_sgd(o1, y0, 0.1, hints, 600, r1);
  const RestartedSgdResult b = restarted_sgd(o2, y0, 0.1, hints, 600, r2);
  CHECK(a.y_bar == b.y_bar);
  CHECK(a.calls == b.calls);
}
