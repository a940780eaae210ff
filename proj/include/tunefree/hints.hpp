#pragma once

#include <optional>
#include <stdexcept>

namespace tunefree {

// Lower/upper bound pair on one problem parameter.
struct Bound {
  double lo = 0.0;
  double hi = 0.0;

  double ratio() const { return hi / lo; }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

// Hint set supplied to tuning-free algorithms in place of exact parameter
// knowledge. Each field is a bound pair on the corresponding optimal
// parameter; absent fields mean the parameter is not hinted.
struct Hints {
  std::optional<Bound> D;           // distance / domain diameter
  std::optional<Bound> sigma_or_R;  // noise scale (std dev or a.s. bound)
  std::optional<Bound> L;           // smoothness
  std::optional<Bound> G;           // Lipschitz constant
  std::optional<Bound> Delta;       // initial function gap

  static void check_bound(const std::optional<Bound>& b, const char* name) {
    if (b && !(b->lo <= b->hi))
      throw std::invalid_argument(std::string("hint ") + name + ": lo > hi");
  }

  void validate() const {
    check_bound(D, "D");
    check_bound(sigma_or_R, "sigma");
    check_bound(L, "L");
    check_bound(G, "G");
    check_bound(Delta, "Delta");
  }
};

}  // namespace tunefree
