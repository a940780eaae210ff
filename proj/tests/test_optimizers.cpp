#include <cmath>

#include "doctest.h"
#include "tunefree/harness.hpp"
#include "tunefree/optimizers.hpp"

using namespace tunefree;

TEST_CASE("adaptive stepsize formulas") {
  AdaptiveState s;
  s.r_bar = 1.0;
  s.u = 4.0;
  s.u0 = 4.0;
  CHECK(adaptive_stepsize(Variant::dog, s) == doctest::Approx(0.5));
  CHECK(adaptive_stepsize(Variant::tdog, s) == doctest::Approx(0.5));  // log_+(1) = 1

  s.r_bar = 2.0;
  s.v = 16.0;
  s.v0 = 16.0;
  CHECK(adaptive_stepsize(Variant::dowg, s) == doctest::Approx(1.0));

  s.r_bar = 1.0;
  s.v0 = 1.0;
  s.v = std::exp(1.0);
  // divisor log_+(e) = 2, so eta = 1/(2 sqrt(e))
  CHECK(adaptive_stepsize(Variant::tdowg, s) ==
        doctest::Approx(1.0 / (2.0 * std::sqrt(std::exp(1.0)))));
  CHECK(adaptive_stepsize(Variant::tdowg, s) == doctest::Approx(0.30326).epsilon(1e-4));

  AdaptiveState z;
  z.r_bar = 1.0;
  CHECK_THROWS_AS(adaptive_stepsize(Variant::dog, z), DegenerateStateError);
  CHECK_THROWS_AS(adaptive_stepsize(Variant::tdowg, z), DegenerateStateError);
}

TEST_CASE("tdog/tdowg never exceed dog/dowg once accumulators pass their start") {
  RngStream rng(3);
  for (int i = 0; i < 1000; ++i) {
    AdaptiveState s;
    s.r_bar = rng.uniform(1e-3, 10.0);
    s.u0 = rng.uniform(1e-6, 10.0);
    s.u = s.u0 * rng.uniform(1.0, 100.0);
    s.v0 = rng.uniform(1e-6, 10.0);
    s.v = s.v0 * rng.uniform(1.0, 100.0);
    CHECK(adaptive_stepsize(Variant::tdog, s) <=
          adaptive_stepsize(Variant::dog, s) * (1 + 1e-12));
    CHECK(adaptive_stepsize(Variant::tdowg, s) <=
          adaptive_stepsize(Variant::dowg, s) * (1 + 1e-12));
  }
}

TEST_CASE("single-step hand computations") {
  const Problem p = make_quadratic(2.0, Vec{0.0}, 1);

  // DoG: g0 = 2, r_bar0 = 0.01, u0 = 4, eta0 = 0.005, x1 = 0.99.
  {
    Oracle oracle(p, NoiseModel::None());
    RngStream rng(1);
    const Trajectory traj = run_adaptive(Variant::dog, oracle, Vec{1.0}, 0.01, 1, {}, rng);
    CHECK(traj.steps[0].stepsize == doctest::Approx(0.005));
    CHECK(traj.last[0] == doctest::Approx(0.99));
    CHECK(traj.oracle_calls == 1);
  }
  // DoWG coincides with DoG at t = 0.
  {
    Oracle oracle(p, NoiseModel::None());
    RngStream rng(1);
    const Trajectory traj = run_adaptive(Variant::dowg, oracle, Vec{1.0}, 0.01, 1, {}, rng);
    CHECK(traj.steps[0].stepsize == doctest::Approx(0.005));
    CHECK(traj.last[0] == doctest::Approx(0.99));
  }
}

TEST_CASE("projection keeps iterates in the ball") {
  const Problem p = make_quadratic(1.0, Vec{0.0, 0.0}, 2);
  Oracle oracle(p, NoiseModel::GaussianSpherical(2.0));
  RngStream rng(9);
  const Ball ball{Vec{0.0, 0.0}, 0.5};
  for (Variant v : {Variant::dog, Variant::dowg, Variant::tdog, Variant::tdowg}) {
    Oracle o(p, NoiseModel::GaussianSpherical(2.0));
    RngStream r = rng.child(static_cast<int>(v));
    const Trajectory traj = run_adaptive(v, o, Vec{0.4, 0.0}, 0.01, 200, ball, r);
    for (const Vec& x : traj.iterates) CHECK(norm(x) <= 0.5 + 1e-12);
    CHECK(norm(traj.last) <= 0.5 + 1e-12);
  }
}

TEST_CASE("projection is nonexpansive") {
  RngStream rng(41);
  const Ball ball{Vec{0.5, -0.5}, 2.0};
  for (int i = 0; i < 200; ++i) {
    Vec x{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    Vec y{rng.uniform(-2, 2), rng.uniform(-2, 2)};  // inside-ish
    const Vec py = project_ball(y, ball);
    const Vec px = project_ball(x, ball);
    if (dist(y, ball.center) <= ball.radius)
      CHECK(dist(px, y) <= dist(x, y) + 1e-12);
    CHECK(dist(px, ball.center) <= ball.radius + 1e-12);
    CHECK(dist(py, ball.center) <= ball.radius + 1e-12);
  }
}

TEST_CASE("sgd hand computations and conditional mean") {
  const Problem p = make_quadratic(1.0, Vec{0.0}, 1);
  {
    Oracle oracle(p, NoiseModel::None());
    RngStream rng(1);
    const Trajectory traj = run_sgd(oracle, Vec{5.0}, 1.0, 1, rng);
    CHECK(traj.last[0] == doctest::Approx(0.0));
  }
  {
    Oracle oracle(p, NoiseModel::None());
    RngStream rng(1);
    const Trajectory traj = run_sgd(oracle, Vec{3.0}, 2.0, 6, rng);
    // eta = 2/L oscillates: x_{t+1} = -x_t.
    for (int t = 0; t < 6; ++t)
      CHECK(traj.iterates[t][0] == doctest::Approx(t % 2 == 0 ? 3.0 : -3.0));
  }
  {
    // E[x1 | x0] = (1 - eta L) x0 under unbiased noise.
    const double eta = 0.1, x0 = 2.0, sigma = 1.0;
    double sum = 0.0;
    const int trials = 10000;
    RngStream rng(12);
    for (int i = 0; i < trials; ++i) {
      Oracle oracle(p, NoiseModel::BernoulliSign(sigma));
      RngStream r = rng.child(i);
      const Trajectory traj = run_sgd(oracle, Vec{x0}, eta, 1, r);
      sum += traj.last[0];
    }
    const double se = eta * sigma / std::sqrt(double(trials));
    CHECK(std::abs(sum / trials - (1.0 - eta) * x0) <= 3.0 * se);
  }
}

TEST_CASE("zero first gradient terminates at x0") {
  const Problem p = make_quadratic(1.0, Vec{2.0}, 1);
  Oracle oracle(p, NoiseModel::None());
  RngStream rng(1);
  const Trajectory traj = run_adaptive(Variant::dog, oracle, Vec{2.0}, 0.1, 50, {}, rng);
  CHECK(traj.T == 1);
  CHECK(traj.last[0] == 2.0);
  CHECK(traj.oracle_calls == 1);
}

TEST_CASE("r_bar stays monotone with bounded growth") {
  const Problem p = make_quadratic(1.0, Vec{0.0, 0.0, 0.0}, 3);
  Oracle oracle(p, NoiseModel::GaussianSpherical(1.0));
  RngStream rng(77);
  const Trajectory traj =
      run_adaptive(Variant::dog, oracle, Vec{1.0, 1.0, 1.0}, 1e-3, 500, {}, rng);
  for (std::size_t t = 1; t < traj.rbar_hist.size(); ++t) {
    CHECK(traj.rbar_hist[t] >= traj.rbar_hist[t - 1]);
    CHECK(traj.rbar_hist[t] <= 2.0 * traj.rbar_hist[t - 1] * (1 + 1e-12));
    CHECK(traj.rbar_hist[t] >= 1e-3);
  }
}

TEST_CASE("weighted prefix averages") {
  Trajectory traj;
  traj.x0 = Vec{0.0};
  traj.T = 2;
  traj.iterates = {Vec{0.0}, Vec{2.0}};
  traj.rbar_hist = {1.0, 3.0};

  const auto uniform = weighted_prefix_average(traj, WeightKind::uniform);
  CHECK(uniform.back().point[0] == doctest::Approx(1.0));

  const auto rbar = weighted_prefix_average(traj, WeightKind::rbar);
  CHECK(rbar.back().point[0] == doctest::Approx((0.0 * 1.0 + 2.0 * 3.0) / 4.0));

  // Constant trajectory: every average is the constant.
  Trajectory c;
  c.x0 = Vec{5.0};
  c.T = 4;
  c.iterates = {Vec{5.0}, Vec{5.0}, Vec{5.0}, Vec{5.0}};
  c.rbar_hist = {1.0, 2.0, 2.0, 2.0};
  for (WeightKind w : {WeightKind::uniform, WeightKind::rbar, WeightKind::rbar_sq})
    for (const auto& pa : weighted_prefix_average(c, w))
      CHECK(pa.point[0] == doctest::Approx(5.0));
}

TEST_CASE("deterministic DoG/DoWG best prefix decays about like 1/T") {
  const Problem p = make_quadratic(1.0, zeros(3), 3);
  for (Variant v : {Variant::dog, Variant::dowg}) {
    std::vector<std::pair<double, double>> pts;
    for (int T : {100, 1000, 10000}) {
      Oracle oracle(p, NoiseModel::None());
      RngStream rng(1);
      const Trajectory traj =
          run_adaptive(v, oracle, Vec{1.0, 1.0, 1.0}, 1e-2, T, {}, rng);
      const Vec best = best_prefix_average(traj, natural_weights(v), p);
      pts.emplace_back(T, std::max(p.value(best) - p.f_star, 1e-300));
    }
    const SlopeFit fit = fit_loglog_slope(pts);
    CHECK(fit.slope <= -0.8);
  }
}

TEST_CASE("replay determinism of runs") {
  const Problem p = make_quadratic(1.0, zeros(2), 2);
  for (int variant = 0; variant < 4; ++variant) {
    Oracle o1(p, NoiseModel::GaussianSpherical(1.0));
    Oracle o2(p, NoiseModel::GaussianSpherical(1.0));
    RngStream r1(5, 9), r2(5, 9);
    const Trajectory t1 =
        run_adaptive(static_cast<Variant>(variant), o1, Vec{1.0, 2.0}, 0.1, 100, {}, r1);
    const Trajectory t2 =
        run_adaptive(static_cast<Variant>(variant), o2, Vec{1.0, 2.0}, 0.1, 100, {}, r2);
    REQUIRE(t1.iterates.size() == t2.iterates.size());
    for (std::size_t i = 0; i < t1.iterates.size(); ++i)
      CHECK(t1.iterates[i] == t2.iterates[i]);
  }
}

TEST_CASE("polyak with exact optimum value contracts monotonically") {
  const Problem p = make_quadratic(2.0, Vec{0.0, 0.0}, 2);
  const PolyakResult res = run_polyak_gd(p, Vec{3.0, -4.0}, 0.0, 30);
  // Exact Polyak on a quadratic halves the iterate each step; distances to
  // the optimum strictly decrease while away from it.
  double prev = 5.0;
  for (const Vec& x : res.trajectory.iterates) {
    const double d = norm(x);
    if (d > 1e-12) CHECK(d <= prev + 1e-15);
    prev = d;
  }
  CHECK(res.f_best <= 1e-10);
}

TEST_CASE("polyak f_hat_0 is a valid lower bound") {
  const Problem p = make_quadratic(1.0, Vec{0.0}, 1);
  const PolyakResult res = run_polyak_adaptive(p, Vec{1.0}, 1.0, 10);
  CHECK(res.f_hat_0 == doctest::Approx(-0.5));  // 0.5 - 1*1
  CHECK(res.f_hat_0 <= p.f_star);
}

TEST_CASE("polyak zero gradient returns immediately") {
  const Problem p = make_quadratic(1.0, Vec{2.0}, 1);
  const PolyakResult res = run_polyak_adaptive(p, Vec{2.0}, 5.0, 100);
  CHECK(res.point[0] == 2.0);
  CHECK(res.f_best == 0.0);
}

TEST_CASE("adaptive polyak gap within slack of the exact-Polyak guarantee") {
  const Problem p = make_quadratic(1.0, Vec{0.0}, 1);
  const int T = 200;
  const double D_star = 1.0;
  const PolyakResult res = run_polyak_adaptive(p, Vec{1.0}, 10.0 * D_star, T);
  const double gap = res.f_best - p.f_star;
  const double scale = 1.0 * D_star * D_star / T;  // L D*^2 / T
  const double bound = scale * log_plus((p.f_star - res.f_hat_0) / scale);
  CHECK(gap >= 0.0);
  CHECK(gap <= 50.0 * bound);
}
