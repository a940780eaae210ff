#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "tunefree/problems.hpp"
#include "tunefree/rng.hpp"

using namespace tunefree;

namespace {

// Independent gradient oracle: central finite differences on value().
Vec fd_grad(const Problem& p, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vec hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (p.value(hi) - p.value(lo)) / (2.0 * h);
  }
  return g;
}

void check_grad_matches_fd(const Problem& p, const Vec& x, double rel = 1e-5) {
  const Vec g = p.grad(x);
  const Vec g_fd = fd_grad(p, x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double scale = std::max({1.0, std::abs(g[i]), std::abs(g_fd[i])});
    CHECK(std::abs(g[i] - g_fd[i]) <= rel * scale);
  }
}

}  // namespace

TEST_CASE("quadratic values and gradients") {
  const Problem p = make_quadratic(2.0, Vec{0.0}, 1);
  CHECK(p.value(Vec{3.0}) == doctest::Approx(9.0));
  CHECK(p.grad(Vec{3.0})[0] == doctest::Approx(6.0));

  const Problem q = make_quadratic(1.0, Vec{1.0, 1.0}, 2);
  CHECK(q.value(Vec{1.0, 1.0}) == 0.0);
  CHECK(*q.x_star == Vec{1.0, 1.0});

  const Problem lb = make_quadratic(1.0 * 100, Vec{0.0}, 1);  // sigma*T, sigma=1, T=100
  CHECK(*lb.smooth_L == doctest::Approx(100.0));

  CHECK_THROWS_AS(make_quadratic(0.0, Vec{0.0}, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_quadratic(1.0, Vec{}, 0), std::invalid_argument);
}

TEST_CASE("absolute loss values, kink convention") {
  const Problem p = make_abs_loss(3.0, 0.0);
  CHECK(p.value(Vec{-2.0}) == doctest::Approx(6.0));
  CHECK(p.grad(Vec{-2.0})[0] == doctest::Approx(-3.0));
  CHECK(p.value(Vec{0.0}) == 0.0);
  CHECK(p.grad(Vec{0.0})[0] == 0.0);  // subgradient at the kink

  const int T = 4;
  const Problem q = make_abs_loss(1.0, 1.0 - 1.0 / T);
  CHECK((*q.x_star)[0] == doctest::Approx(0.75));

  CHECK_THROWS_AS(make_abs_loss(-1.0, 0.0), std::invalid_argument);
}

TEST_CASE("sinbump values, gradient, derived smoothness") {
  const Problem flat = make_sinbump(0.0, 1);
  const Problem quad = make_quadratic(1.0, Vec{0.0}, 1);
  for (double x : {-2.0, -0.3, 0.0, 1.7}) {
    CHECK(flat.value(Vec{x}) == doctest::Approx(quad.value(Vec{x})));
    CHECK(flat.grad(Vec{x})[0] == doctest::Approx(quad.grad(Vec{x})[0]));
  }

  const Problem p = make_sinbump(1.0, 1);
  const double pi = 3.14159265358979323846;
  CHECK(p.value(Vec{pi / 2}) == doctest::Approx(pi * pi / 8 + 1.0));
  CHECK(p.grad(Vec{pi / 2})[0] == doctest::Approx(pi / 2));

  // Independent oracle for the smoothness constant: max |f''| over a dense
  // grid, f''(x) = 1 + 2a cos(2x).
  const double a = 1.0;
  double max_curv = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double x = -10.0 + 20.0 * i / 200000.0;
    max_curv = std::max(max_curv, std::abs(1.0 + 2.0 * a * std::cos(2.0 * x)));
  }
  CHECK(*p.smooth_L == doctest::Approx(max_curv).epsilon(1e-6));
  CHECK(*p.smooth_L == doctest::Approx(3.0));
}

TEST_CASE("gradients match finite differences at random points") {
  RngStream rng(31);
  std::vector<Problem> probs;
  probs.push_back(make_quadratic(2.5, Vec{0.3, -1.0}, 2));
  probs.push_back(make_sinbump(1.0, 3));
  probs.push_back(make_abs_loss(2.0, 0.5));
  const LowerBoundFamily fam = make_lb_family(LbKind::smooth, 1.0, 10, 2.0, 1.0);
  probs.push_back(fam.f1);
  probs.push_back(fam.f2);
  probs.push_back(fam.h1);

  for (const Problem& p : probs) {
    int checked = 0;
    while (checked < 100) {
      Vec x(p.dim);
      for (double& c : x) c = rng.uniform(-5.0, 5.0);
      if (p.name == "absloss" && std::abs(x[0] - 0.5) <= 1e-3) continue;
      checked++;
      check_grad_matches_fd(p, x);
    }
  }

  // Nonsmooth family members: skip both kink neighborhoods.
  const LowerBoundFamily nfam =
      make_lb_family(LbKind::nonsmooth, 0.0, 10, 0.9, 1.0, 2.0);
  for (const Problem* p : {&nfam.f1, &nfam.f2, &nfam.h1}) {
    int checked = 0;
    while (checked < 100) {
      Vec x{rng.uniform(-5.0, 5.0)};
      if (std::abs(x[0]) <= 1e-3 || std::abs(x[0] - 0.9) <= 1e-3) continue;
      checked++;
      check_grad_matches_fd(*p, x);
    }
  }
}

TEST_CASE("declared regularity constants hold on random pairs") {
  RngStream rng(53);
  std::vector<Problem> smooth;
  smooth.push_back(make_quadratic(2.5, Vec{0.3, -1.0}, 2));
  smooth.push_back(make_sinbump(1.0, 3));
  smooth.push_back(make_lb_family(LbKind::smooth, 1.0, 10, 2.0, 1.0).f);
  for (const Problem& p : smooth) {
    REQUIRE(p.smooth_L.has_value());
    for (int i = 0; i < 300; ++i) {
      Vec x(p.dim), y(p.dim);
      for (double& c : x) c = rng.uniform(-5.0, 5.0);
      for (double& c : y) c = rng.uniform(-5.0, 5.0);
      CHECK(norm(sub(p.grad(x), p.grad(y))) <=
            *p.smooth_L * dist(x, y) * (1 + 1e-12) + 1e-12);
    }
  }

  const Problem abs = make_abs_loss(2.0, 0.5);
  REQUIRE(abs.lipschitz_G.has_value());
  for (int i = 0; i < 300; ++i) {
    const Vec x{rng.uniform(-5.0, 5.0)}, y{rng.uniform(-5.0, 5.0)};
    CHECK(std::abs(abs.value(x) - abs.value(y)) <=
          *abs.lipschitz_G * dist(x, y) * (1 + 1e-12) + 1e-12);
  }
}

TEST_CASE("gradient vanishes at known minimizers") {
  std::vector<Problem> probs;
  probs.push_back(make_quadratic(2.5, Vec{0.3, -1.0}, 2));
  probs.push_back(make_sinbump(1.0, 3));
  const LowerBoundFamily fam = make_lb_family(LbKind::smooth, 1.0, 10, 2.0, 1.0);
  probs.push_back(fam.f);
  probs.push_back(fam.h);
  for (const Problem& p : probs) {
    REQUIRE(p.x_star.has_value());
    CHECK(norm(p.grad(*p.x_star)) <= 1e-10);
    CHECK(std::abs(p.value(*p.x_star) - p.f_star) <= 1e-12 * std::max(1.0, std::abs(p.f_star)));
  }
}

TEST_CASE("lower-bound family construction and parameters") {
  // sigma=1, T=10 gives L = 10 and f1(x) = 5x^2 + x.
  const LowerBoundFamily fam = make_lb_family(LbKind::smooth, 1.0, 10, 101.0, 100.0);
  CHECK(fam.L == doctest::Approx(10.0));
  CHECK(fam.f1.value(Vec{2.0}) == doctest::Approx(5.0 * 4.0 + 2.0));
  CHECK(fam.f1.grad(Vec{2.0})[0] == doctest::Approx(10.0 * 2.0 + 1.0));

  CHECK(fam.hint_table.L->lo == doctest::Approx(10.0));
  CHECK(fam.hint_table.L->hi == doctest::Approx(10.0));
  CHECK(fam.hint_table.D->lo == doctest::Approx(1.0));    // min(v, |u-v|)
  CHECK(fam.hint_table.D->hi == doctest::Approx(100.0));  // max(v, |u-v|)
  CHECK(fam.hint_table.sigma_or_R->lo == doctest::Approx(1.0));
  CHECK(fam.hint_table.sigma_or_R->hi == doctest::Approx(1.0 + 10.0 * 10.0 * 101.0));

  const LowerBoundFamily nc = make_lb_family(LbKind::nonconvex, 1.0, 10, 101.0, 100.0);
  CHECK(nc.hint_table.Delta->lo == doctest::Approx(0.5 * 10.0 * 1.0));
  CHECK(nc.hint_table.Delta->hi == doctest::Approx(0.5 * 10.0 * 100.0));
  CHECK(!nc.hint_table.D.has_value());

  CHECK_THROWS_AS(make_lb_family(LbKind::smooth, 1.0, 1, 1.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_lb_family(LbKind::nonsmooth, 1.0, 10, 1.0, 1.0),
                  std::invalid_argument);  // missing G
  CHECK_THROWS_AS(make_lb_family(LbKind::smooth, 1.0, 10, 1.0, 1.0, 3.0),
                  std::invalid_argument);  // G with smooth kind
}

TEST_CASE("f2 and h2 agree with the expanded h2 formula") {
  // h2's member callable aliases f2; this checks both against the expanded
  // expression (L/2)(x-u)^2 + Lux - sigma/(T-1) x - (L/2)u^2 from the
  // construction, which is algebraically the same function.
  const double sigma = 1.0, u = 101.0, v = 100.0;
  const int T = 10;
  const LowerBoundFamily fam = make_lb_family(LbKind::smooth, sigma, T, u, v);
  const double L = fam.L;
  auto h2_formula = [&](double x) {
    return 0.5 * L * (x - u) * (x - u) + L * u * x - sigma / (T - 1.0) * x -
           0.5 * L * u * u;
  };
  auto h2_grad_formula = [&](double x) {
    return L * (x - u) + L * u - sigma / (T - 1.0);
  };

  RngStream rng(7);
  for (int i = 0; i < 100000; ++i) {
    const double x = rng.uniform(-1e6, 1e6);
    const double f2 = fam.f2.value(Vec{x});
    const double h2 = fam.h2.value(Vec{x});
    CHECK(f2 == h2);  // aliased: identical at every x
    CHECK(std::abs(h2_formula(x) - f2) <= 1e-9 * std::max(1.0, std::abs(f2)));
    const double g2 = fam.f2.grad(Vec{x})[0];
    CHECK(fam.h2.grad(Vec{x})[0] == g2);
    CHECK(std::abs(h2_grad_formula(x) - g2) <= 1e-9 * std::max(1.0, std::abs(g2)));
  }
}

TEST_CASE("mixture identities hold for all kinds") {
  RngStream rng(11);
  for (LbKind kind : {LbKind::smooth, LbKind::nonsmooth, LbKind::nonconvex}) {
    const LowerBoundFamily fam =
        kind == LbKind::nonsmooth
            ? make_lb_family(kind, 0.0, 10, 0.9, 1.0, 2.0)
            : make_lb_family(kind, 1.0, 10, 101.0, 100.0);
    const double w1 = 1.0 / fam.T, w2 = 1.0 - 1.0 / fam.T;
    for (int i = 0; i < 20000; ++i) {
      const Vec x{rng.uniform(-100.0, 100.0)};
      const double mix_f = w1 * fam.f1.value(x) + w2 * fam.f2.value(x);
      const double fx = fam.f.value(x);
      CHECK(std::abs(mix_f - fx) <= 1e-9 * std::max(1.0, std::abs(fx)));
      const double mix_h = w1 * fam.h1.value(x) + w2 * fam.h2.value(x);
      const double hx = fam.h.value(x);
      CHECK(std::abs(mix_h - hx) <= 1e-9 * std::max(1.0, std::abs(hx)));

      const double mix_fg = w1 * fam.f1.grad(x)[0] + w2 * fam.f2.grad(x)[0];
      const double fg = fam.f.grad(x)[0];
      CHECK(std::abs(mix_fg - fg) <= 1e-9 * std::max(1.0, std::abs(fg)));
      const double mix_hg = w1 * fam.h1.grad(x)[0] + w2 * fam.h2.grad(x)[0];
      const double hg = fam.h.grad(x)[0];
      CHECK(std::abs(mix_hg - hg) <= 1e-9 * std::max(1.0, std::abs(hg)));
    }
  }
}

TEST_CASE("branch noise magnitudes in the smooth family") {
  const double sigma = 1.5;
  const int T = 10;
  const LowerBoundFamily fam = make_lb_family(LbKind::smooth, sigma, T, 3.0, 2.0);
  RngStream rng(13);
  for (int i = 0; i < 1000; ++i) {
    const Vec x{rng.uniform(-50.0, 50.0)};
    const double g = fam.f.grad(x)[0];
    CHECK(std::abs(fam.f1.grad(x)[0] - g) == doctest::Approx(sigma));
    CHECK(std::abs(fam.f2.grad(x)[0] - g) == doctest::Approx(sigma / (T - 1.0)));
  }
}
