#include "quadforge/bessel.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace quadforge {

namespace {

constexpr long double kPi = 3.141592653589793238462643383279502884L;
constexpr long double kEulerGamma = 0.577215664901532860606512090082402431L;

// Crossover between the power series and the Hankel asymptotic expansion for
// the integer orders.  Below 14 the series (accumulated in long double) keeps
// the absolute error under ~1e-14; above 14 the asymptotic series truncated at
// its smallest term is already below ~1e-13.
constexpr double kSeriesCrossover = 14.0;

// J_n(x) = sum_m (-1)^m (x/2)^{2m+n} / (m! (m+n)!), n in {0, 1}.
long double jn_series(int n, long double x) {
  const long double half = 0.5L * x;
  long double term = 1.0L;
  for (int i = 1; i <= n; ++i) term *= half / i;
  long double sum = term;
  const long double msq = -half * half;
  for (int m = 1; m <= 300; ++m) {
    term *= msq / (static_cast<long double>(m) * (m + n));
    sum += term;
    if (fabsl(term) < 1e-20L * (fabsl(sum) + 1e-30L)) break;
  }
  return sum;
}

// Y_0 and Y_1 power series (with the log term), n in {0, 1}.
long double yn_series(int n, long double x) {
  const long double half = 0.5L * x;
  const long double z = half * half;
  const long double logterm = logl(half);
  if (n == 0) {
    // Y_0 = (2/pi)[(ln(x/2)+gamma) J_0 + sum_{m>=1} (-1)^{m+1} H_m z^m/(m!)^2]
    long double sum = 0.0L;
    long double term = 1.0L;  // z^m / (m!)^2
    long double harmonic = 0.0L;
    long double sign = 1.0L;
    for (int m = 1; m <= 300; ++m) {
      term *= z / (static_cast<long double>(m) * m);
      harmonic += 1.0L / m;
      const long double add = sign * harmonic * term;
      sum += add;
      if (fabsl(add) < 1e-22L * (fabsl(sum) + 1e-30L)) break;
      sign = -sign;
    }
    return (2.0L / kPi) * ((logterm + kEulerGamma) * jn_series(0, x) + sum);
  }
  // Y_1 = (2/pi) ln(x/2) J_1 - 2/(pi x)
  //       - (x/(2 pi)) sum_m [psi(m+1)+psi(m+2)] (-z)^m / (m! (m+1)!)
  long double sum = 0.0L;
  long double term = 1.0L;  // z^m / (m! (m+1)!)
  long double psi_a = -kEulerGamma;         // psi(m+1)
  long double psi_b = 1.0L - kEulerGamma;   // psi(m+2)
  long double sign = 1.0L;
  for (int m = 0; m <= 300; ++m) {
    if (m > 0) {
      term *= z / (static_cast<long double>(m) * (m + 1));
      psi_a += 1.0L / m;
      psi_b += 1.0L / (m + 1);
    }
    const long double add = sign * (psi_a + psi_b) * term;
    sum += add;
    if (fabsl(add) < 1e-22L * (fabsl(sum) + 1e-30L)) break;
    sign = -sign;
  }
  return (2.0L / kPi) * logterm * jn_series(1, x) - 2.0L / (kPi * x) -
         (x / (2.0L * kPi)) * sum;
}

// Hankel large-argument expansion:
//   J_nu ~ sqrt(2/(pi x)) (P cos chi - Q sin chi),
//   Y_nu ~ sqrt(2/(pi x)) (P sin chi + Q cos chi),  chi = x - (2 nu + 1) pi/4.
// The series is truncated at its smallest term.
void hankel_pq(double nu, long double x, long double* p_out, long double* q_out) {
  const long double mu = 4.0L * nu * nu;
  long double p = 1.0L;
  long double q = 0.0L;
  long double c = 1.0L;
  long double prev_mag = std::numeric_limits<long double>::max();
  for (int k = 1; k <= 60; ++k) {
    const long double odd = 2.0L * k - 1.0L;
    c *= (mu - odd * odd) / (8.0L * x * k);
    const long double mag = fabsl(c);
    if (mag >= prev_mag) break;  // asymptotic tail starts to diverge
    prev_mag = mag;
    switch (k % 4) {
      case 1: q += c; break;
      case 2: p -= c; break;
      case 3: q -= c; break;
      default: p += c; break;
    }
    if (mag < 1e-19L) break;
  }
  *p_out = p;
  *q_out = q;
}

double jn_asymptotic(int n, double x) {
  long double p, q;
  hankel_pq(n, x, &p, &q);
  const long double chi = x - (2.0L * n + 1.0L) * kPi / 4.0L;
  return static_cast<double>(sqrtl(2.0L / (kPi * x)) *
                             (p * cosl(chi) - q * sinl(chi)));
}

double yn_asymptotic(int n, double x) {
  long double p, q;
  hankel_pq(n, x, &p, &q);
  const long double chi = x - (2.0L * n + 1.0L) * kPi / 4.0L;
  return static_cast<double>(sqrtl(2.0L / (kPi * x)) *
                             (p * sinl(chi) + q * cosl(chi)));
}

double sqrt_2_over_pix(double x) {
  return std::sqrt(2.0 / (static_cast<double>(kPi) * x));
}

// sin(x)/x - cos(x) with a series guard against cancellation near 0.
double sinx_over_x_minus_cosx(double x) {
  if (x < 0.5) {
    // sum_{m>=1} (-1)^{m+1} (2m) x^{2m} / (2m+1)!
    double term = x * x / 3.0;  // m = 1
    double sum = term;
    double x2 = x * x;
    for (int m = 2; m <= 12; ++m) {
      term *= -x2 * (2.0 * m) / ((2.0 * m + 1.0) * (2.0 * m) * (2.0 * m - 2.0));
      // term_m = (-1)^{m+1} 2m x^{2m} / (2m+1)!; ratio handled explicitly:
      sum += term;
      if (std::fabs(term) < 1e-18 * (std::fabs(sum) + 1e-30)) break;
    }
    return sum;
  }
  return std::sin(x) / x - std::cos(x);
}

}  // namespace

BesselOrder::BesselOrder(int twice_order) : twice_(twice_order) {
  if (twice_order < 0 || twice_order > 3) {
    throw ValidationError(
        "BesselOrder: twice_order must be in {0,1,2,3} (nu in {0, 1/2, 1, 3/2}), got " +
        std::to_string(twice_order));
  }
}

BesselOrder BesselOrder::lower(int dim) {
  if (dim != 2 && dim != 3) {
    throw ValidationError("BesselOrder::lower: dimension must be 2 or 3");
  }
  return BesselOrder(dim - 2);
}

BesselOrder BesselOrder::upper(int dim) {
  if (dim != 2 && dim != 3) {
    throw ValidationError("BesselOrder::upper: dimension must be 2 or 3");
  }
  return BesselOrder(dim);
}

double bessel_j(BesselOrder order, double x) {
  if (!(x >= 0.0)) {
    throw ValidationError("bessel_j: requires x >= 0");
  }
  switch (order.twice()) {
    case 0:
      if (x < kSeriesCrossover) return static_cast<double>(jn_series(0, x));
      return jn_asymptotic(0, x);
    case 2:
      if (x < kSeriesCrossover) return static_cast<double>(jn_series(1, x));
      return jn_asymptotic(1, x);
    case 1:  // J_{1/2} = sqrt(2/(pi x)) sin x
      if (x == 0.0) return 0.0;
      return sqrt_2_over_pix(x) * std::sin(x);
    default:  // J_{3/2} = sqrt(2/(pi x)) (sin x / x - cos x)
      if (x == 0.0) return 0.0;
      return sqrt_2_over_pix(x) * sinx_over_x_minus_cosx(x);
  }
}

double bessel_y(BesselOrder order, double x) {
  if (!(x > 0.0)) {
    throw ValidationError("bessel_y: requires x > 0 (singular at the origin)");
  }
  switch (order.twice()) {
    case 0:
      if (x < kSeriesCrossover) return static_cast<double>(yn_series(0, x));
      return yn_asymptotic(0, x);
    case 2:
      if (x < kSeriesCrossover) return static_cast<double>(yn_series(1, x));
      return yn_asymptotic(1, x);
    case 1:  // Y_{1/2} = -sqrt(2/(pi x)) cos x
      return -sqrt_2_over_pix(x) * std::cos(x);
    default:  // Y_{3/2} = -sqrt(2/(pi x)) (cos x / x + sin x)
      return -sqrt_2_over_pix(x) * (std::cos(x) / x + std::sin(x));
  }
}

std::vector<double> bessel_j_zeros(BesselOrder order, int count) {
  if (count <= 0) {
    throw ValidationError("bessel_j_zeros: count must be positive");
  }
  std::vector<double> zeros;
  zeros.reserve(count);
  // J_nu > 0 just right of the origin for all supported orders; successive
  // zeros are separated by at least ~pi, so a 0.05 scan cannot skip any.
  const double step = 0.05;
  double a = 0.05;
  double fa = bessel_j(order, a);
  while (static_cast<int>(zeros.size()) < count) {
    double b = a + step;
    if (b > 200.0) {
      throw NumericalError("bessel_j_zeros: scan exceeded range");
    }
    double fb = bessel_j(order, b);
    if ((fa < 0.0) != (fb < 0.0)) {
      double lo = a, hi = b, flo = fa;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = bessel_j(order, mid);
        if ((flo < 0.0) != (fm < 0.0)) {
          hi = mid;
        } else {
          lo = mid;
          flo = fm;
        }
        if (hi - lo < 1e-15 * hi) break;
      }
      zeros.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  return zeros;
}

double first_zero(BesselOrder order) { return bessel_j_zeros(order, 1)[0]; }

double fundamental_tone_ball(int dim, double radius) {
  if (!(radius > 0.0)) {
    throw ValidationError("fundamental_tone_ball: radius must be positive");
  }
  const double j1 = first_zero(BesselOrder::lower(dim));
  return j1 * j1 / (radius * radius);
}

}  // namespace quadforge
