#pragma once

#include <functional>
#include <optional>
#include <string>

#include "tunefree/hints.hpp"
#include "tunefree/vec.hpp"

namespace tunefree {

// A differentiable (or subdifferentiable) objective with whatever regularity
// constants are known for it. Problems are immutable after construction and
// all evaluation is pure, so instances can be shared freely across threads.
struct Problem {
  int dim = 1;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  double f_star = 0.0;
  std::optional<Vec> x_star;          // empty when the minimizer is unknown
  std::optional<double> smooth_L;     // empty = not smooth / unknown
  std::optional<double> lipschitz_G;  // empty = not Lipschitz / unknown
  std::optional<double> domain_radius;  // half-diameter of the feasible ball
  Vec domain_center;                    // reference center of that ball
  std::string name;

  Ball domain_ball() const {
    if (!domain_radius) throw std::logic_error(name + ": unbounded domain");
    return Ball{domain_center, *domain_radius};
  }
};

// f(x) = (L/2) ||x - center||^2, the d-dimensional quadratic.
Problem make_quadratic(double L, const Vec& center, int dim);

// f(x) = G |x - center|, one-dimensional; subgradient at the kink is 0.
Problem make_abs_loss(double G, double center);

// f(x) = sum_i [x_i^2 / 2 + a sin^2(x_i)]; smooth with constant 1 + 2a,
// nonconvex as soon as a > 1/2. Test function for the nonconvex experiments.
Problem make_sinbump(double a, int dim);

enum class LbKind { smooth, nonsmooth, nonconvex };

const char* to_string(LbKind kind);

// The two-function adversarial family used by the impossibility arguments:
// a base pair (f, h) whose stochastic oracles are branch mixtures over
// (f1, f2) and (h1, h2), rigged so that h2 and f2 are the same function and
// the mixtures are unbiased for f and h respectively. All members are 1-D.
struct LowerBoundFamily {
  LbKind kind = LbKind::smooth;
  double sigma = 0.0;  // noise scale of the f-oracle's rare branch
  int T = 2;           // horizon the family is parameterized by
  double u = 0.0;      // minimizer shift of h
  double v = 0.0;      // initialization x0
  double G = 0.0;      // Lipschitz scale (nonsmooth kind only)
  double L = 0.0;      // sigma * T for the smooth/nonconvex kinds

  Problem f, f1, f2;
  Problem h, h1, h2;  // h2 shares f2's callables: the identity is exact
  Hints hint_table;
};

// Builds all six members plus the common hint table. For smooth/nonconvex
// kinds sigma drives the construction (L = sigma * T); for the nonsmooth
// kind G must be supplied and sigma is ignored.
LowerBoundFamily make_lb_family(LbKind kind, double sigma, int T, double u,
                                double v, std::optional<double> G = {});

}  // namespace tunefree
