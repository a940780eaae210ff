#include "tunefree/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace tunefree {

namespace {

double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_dim(const Vec& x, int dim, const char* who) {
  if (static_cast<int>(x.size()) != dim)
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

}  // namespace

Problem make_quadratic(double L, const Vec& center, int dim) {
  if (L <= 0.0) throw std::invalid_argument("make_quadratic: L must be positive");
  if (dim < 1) throw std::invalid_argument("make_quadratic: dim must be >= 1");
  if (static_cast<int>(center.size()) != dim)
    throw std::invalid_argument("make_quadratic: center size != dim");

  Problem p;
  p.dim = dim;
  p.name = "quadratic";
  p.f_star = 0.0;
  p.x_star = center;
  p.smooth_L = L;
  p.domain_center = center;
  p.value = [L, center, dim](const Vec& x) {
    check_dim(x, dim, "quadratic");
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double d = x[i] - center[i];
      s += d * d;
    }
    return 0.5 * L * s;
  };
  p.grad = [L, center, dim](const Vec& x) {
    check_dim(x, dim, "quadratic");
    Vec g(dim);
    for (int i = 0; i < dim; ++i) g[i] = L * (x[i] - center[i]);
    return g;
  };
  return p;
}

Problem make_abs_loss(double G, double center) {
  if (G <= 0.0) throw std::invalid_argument("make_abs_loss: G must be positive");

  Problem p;
  p.dim = 1;
  p.name = "absloss";
  p.f_star = 0.0;
  p.x_star = Vec{center};
  p.lipschitz_G = G;
  p.domain_center = Vec{center};
  p.value = [G, center](const Vec& x) {
    check_dim(x, 1, "absloss");
    return G * std::abs(x[0] - center);
  };
  p.grad = [G, center](const Vec& x) {
    check_dim(x, 1, "absloss");
    return Vec{G * sign0(x[0] - center)};
  };
  return p;
}

Problem make_sinbump(double a, int dim) {
  if (a < 0.0) throw std::invalid_argument("make_sinbump: a must be >= 0");
  if (dim < 1) throw std::invalid_argument("make_sinbump: dim must be >= 1");

  Problem p;
  p.dim = dim;
  p.name = "sinbump";
  p.f_star = 0.0;
  p.x_star = zeros(dim);
  p.smooth_L = 1.0 + 2.0 * a;
  p.domain_center = zeros(dim);
  p.value = [a, dim](const Vec& x) {
    check_dim(x, dim, "sinbump");
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double si = std::sin(x[i]);
      s += 0.5 * x[i] * x[i] + a * si * si;
    }
    return s;
  };
  p.grad = [a, dim](const Vec& x) {
    check_dim(x, dim, "sinbump");
    Vec g(dim);
    for (int i = 0; i < dim; ++i) g[i] = x[i] + a * std::sin(2.0 * x[i]);
    return g;
  };
  return p;
}

const char* to_string(LbKind kind) {
  switch (kind) {
    case LbKind::smooth: return "smooth";
    case LbKind::nonsmooth: return "nonsmooth";
    case LbKind::nonconvex: return "nonconvex";
  }
  return "?";
}

namespace {

Problem scalar_problem(std::string name, std::function<double(double)> val,
                       std::function<double(double)> der) {
  Problem p;
  p.dim = 1;
  p.name = std::move(name);
  p.f_star = 0.0;
  p.x_star.reset();
  p.value = [val = std::move(val)](const Vec& x) {
    check_dim(x, 1, "lb-member");
    return val(x[0]);
  };
  p.grad = [der = std::move(der)](const Vec& x) {
    check_dim(x, 1, "lb-member");
    return Vec{der(x[0])};
  };
  return p;
}

}  // namespace

LowerBoundFamily make_lb_family(LbKind kind, double sigma, int T, double u,
                                double v, std::optional<double> G) {
  if (T < 2) throw std::invalid_argument("make_lb_family: T must be >= 2");
  if (kind == LbKind::nonsmooth) {
    if (!G || *G <= 0.0)
      throw std::invalid_argument("make_lb_family: nonsmooth kind needs G > 0");
  } else {
    if (sigma <= 0.0)
      throw std::invalid_argument("make_lb_family: sigma must be positive");
    if (G) throw std::invalid_argument("make_lb_family: G only valid for nonsmooth");
  }

  LowerBoundFamily fam;
  fam.kind = kind;
  fam.sigma = sigma;
  fam.T = T;
  fam.u = u;
  fam.v = v;

  const double Tr = static_cast<double>(T);

  if (kind == LbKind::nonsmooth) {
    const double g = *G;
    fam.G = g;
    fam.sigma = g;  // the f-oracle's almost-sure noise bound

    fam.f = make_abs_loss(g, 0.0);
    fam.f.name = "lb-nonsmooth-f";
    fam.f1 = scalar_problem(
        "lb-nonsmooth-f1", [g](double x) { return g * std::abs(x) + g * x; },
        [g](double x) { return g * sign0(x) + g; });
    fam.f2 = scalar_problem(
        "lb-nonsmooth-f2",
        [g, Tr](double x) { return g * std::abs(x) - g / (Tr - 1.0) * x; },
        [g, Tr](double x) { return g * sign0(x) - g / (Tr - 1.0); });

    fam.h = make_abs_loss(g, u);
    fam.h.name = "lb-nonsmooth-h";
    // Rare branch of the h-oracle, pinned by unbiasedness:
    // h1 = T*h - (T-1)*h2, nonconvex as a standalone function.
    fam.h1 = scalar_problem(
        "lb-nonsmooth-h1",
        [g, Tr, u](double x) {
          return Tr * g * std::abs(x - u) - (Tr - 1.0) * g * std::abs(x) + g * x;
        },
        [g, Tr, u](double x) {
          return Tr * g * sign0(x - u) - (Tr - 1.0) * g * sign0(x) + g;
        });

    fam.hint_table.G = Bound{g, g};
    fam.hint_table.D = Bound{std::min(v, std::abs(u - v)), std::max(v, std::abs(u - v))};
    fam.hint_table.sigma_or_R = Bound{g, g + Tr * g * u};
  } else {
    const double L = sigma * Tr;
    fam.L = L;

    fam.f = make_quadratic(L, Vec{0.0}, 1);
    fam.f.name = kind == LbKind::smooth ? "lb-smooth-f" : "lb-nonconvex-f";
    fam.f1 = scalar_problem(
        "lb-f1", [L, sigma](double x) { return 0.5 * L * x * x + sigma * x; },
        [L, sigma](double x) { return L * x + sigma; });
    fam.f2 = scalar_problem(
        "lb-f2",
        [L, sigma, Tr](double x) { return 0.5 * L * x * x - sigma / (Tr - 1.0) * x; },
        [L, sigma, Tr](double x) { return L * x - sigma / (Tr - 1.0); });

    fam.h = make_quadratic(L, Vec{u}, 1);
    fam.h.name = kind == LbKind::smooth ? "lb-smooth-h" : "lb-nonconvex-h";
    fam.h1 = scalar_problem(
        "lb-h1",
        [L, sigma, Tr, u](double x) {
          return 0.5 * L * (x - u) * (x - u) + (sigma - (Tr - 1.0) * L * u) * x +
                 0.5 * (Tr - 1.0) * L * u * u;
        },
        [L, sigma, Tr, u](double x) {
          return L * (x - u) + sigma - (Tr - 1.0) * L * u;
        });

    const double d_lo = std::min(v, std::abs(u - v));
    const double d_hi = std::max(v, std::abs(u - v));
    fam.hint_table.L = Bound{L, L};
    fam.hint_table.sigma_or_R = Bound{sigma, sigma + Tr * L * u};
    if (kind == LbKind::nonconvex) {
      fam.hint_table.Delta = Bound{0.5 * L * d_lo, 0.5 * L * d_hi};
    } else {
      fam.hint_table.D = Bound{d_lo, d_hi};
    }
  }

  // h2 aliases f2: the common branch returns literally the same callables,
  // so coupled runs that only see branch 2 are bit-identical.
  fam.h2 = fam.f2;
  fam.h2.name = fam.f2.name + "-as-h2";
  return fam;
}

}  // namespace tunefree
