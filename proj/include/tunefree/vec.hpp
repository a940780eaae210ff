#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace tunefree {

// Dense point/gradient type. Problems in this library are low-dimensional,
// so a plain vector with free helpers beats a linear-algebra dependency.
using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& a) { return dot(a, a); }

inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

inline double dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// y += alpha * x
inline void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vec scaled(const Vec& x, double alpha) {
  Vec r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = alpha * x[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

inline bool all_finite(const Vec& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

// Euclidean ball used to realize bounded domains. Radius is half the
// domain diameter so that ||x - y|| <= D holds for any two feasible points.
struct Ball {
  Vec center;
  double radius = 0.0;
};

// Projection onto a ball; nonexpansive, identity for interior points.
inline Vec project_ball(const Vec& x, const Ball& ball) {
  if (x.size() != ball.center.size())
    throw std::invalid_argument("project_ball: dimension mismatch");
  const double d = dist(x, ball.center);
  if (d <= ball.radius) return x;
  Vec r(x.size());
  const double scale = ball.radius / d;
  for (std::size_t i = 0; i < x.size(); ++i)
    r[i] = ball.center[i] + scale * (x[i] - ball.center[i]);
  return r;
}

}  // namespace tunefree
