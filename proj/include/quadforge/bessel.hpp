#pragma once

#include <vector>

#include "quadforge/errors.hpp"

namespace quadforge {

// Bessel order nu restricted to {0, 1/2, 1, 3/2}; these are the lower order
// (n-2)/2 and the upper order n/2 for space dimensions n in {2, 3}.
// Any other order is rejected at construction.
class BesselOrder {
 public:
  explicit BesselOrder(int twice_order);

  static BesselOrder lower(int dim);  // (n-2)/2
  static BesselOrder upper(int dim);  // n/2

  int twice() const { return twice_; }
  bool integer() const { return twice_ % 2 == 0; }
  double nu() const { return 0.5 * static_cast<double>(twice_); }

 private:
  int twice_;
};

// J_nu(x) for x >= 0.  Integer orders use a power series below x = 14 and the
// large-argument Hankel expansion above; half-integer orders use the exact
// trigonometric closed forms.  Absolute error <= 1e-12 on [0, 60].
double bessel_j(BesselOrder order, double x);

// Y_nu(x) for x > 0.  Same evaluation strategy; absolute error <= 1e-10 on
// [1e-3, 60].  Throws ValidationError for x <= 0 (singular at the origin).
double bessel_y(BesselOrder order, double x);

// First positive zero j_{nu,1} of J_nu, by bracketing and bisection.
double first_zero(BesselOrder order);

// First `count` positive zeros of J_nu, each to ~1e-12.
std::vector<double> bessel_j_zeros(BesselOrder order, int count);

// Fundamental tone of the ball B_R in dimension n: j_{(n-2)/2,1}^2 / R^2.
double fundamental_tone_ball(int dim, double radius);

}  // namespace quadforge
