#pragma once

#include <functional>
#include <string>
#include <vector>

#include "quadforge/errors.hpp"

namespace quadforge {

// Radially symmetric free-boundary problem on the ball B_R:
// source f = a*chi_{B_r1} - b with a > b > 0, coefficient lambda = k^2 below
// the fundamental tone of B_R, and a nondecreasing boundary-gradient profile
// g with g = 0 on [0, r1].
struct RadialParams {
  int n = 2;              // space dimension, 2 or 3
  double lambda = 0.0;    // k^2, in (0, fundamental tone of B_R)
  double a = 0.0;         // source amplitude on B_r1
  double b = 0.0;         // uniform sink amplitude, 0 < b < a
  double r1 = 0.0;        // source radius, 0 < r1 < R
  double R = 0.0;         // ambient ball radius
  std::function<double(double)> g;  // radial profile; nullptr means g == 0

  double g_at(double r) const { return g ? g(r) : 0.0; }
};

// Validates all RadialParams invariants (including the sampled monotonicity
// check of g). Throws ValidationError naming the violated condition.
RadialParams make_radial_params(int n, double lambda, double a, double b,
                                double r1, double R,
                                std::function<double(double)> g = nullptr);

// Closed-form radial minimizer: two-branch Bessel formula with free
// coefficient c1, support radius rho in (r1, Rprime], and the g == 0 support
// bound Rprime.
struct RadialSolution {
  RadialParams params;
  double c1 = 0.0;
  double rho = 0.0;
  double Rprime = 0.0;

  double u(double r) const;
  double du(double r) const;
};

// Largest rho in (r1, R] with b/a <= r1^{n/2} J_{n/2}(sqrt(lambda) r1) /
// (rho^{n/2} J_{n/2}(sqrt(lambda) rho)); equals R when the inequality still
// holds at the endpoint.  phi is strictly increasing on the bracket, so plain
// bisection is exact enough (root to ~1e-13).
double support_radius_gzero(const RadialParams& params);

// Solves for the support radius rho in (r1, Rprime] from the boundary
// condition u'(rho) = -g(rho), then recovers c1 from u(rho) = 0.
// Throws NumericalError("no-admissible-support...") when the bracket carries
// no sign change (g too large for a free boundary below Rprime).
RadialSolution radial_solve(const RadialParams& params);

// Mean-value constant for the Helmholtz ball average:
// integral over B_radius of w dx = c * w(0) for solutions of
// (Laplace + k^2) w = 0, valid while k*radius stays below the first nodal
// radius j_{(n-2)/2,1}.
double mvt_constant(int n, double k, double radius);

// Sufficient total-mass level: masses strictly above C_n * b0 * eps^n admit
// the mollified construction, with
// C_n = 2^n (3 pi)^{n/2} / Gamma(1+n/2) * J_{n/2}(j) / J_{n/2}(j/3),
// j = j_{(n-2)/2,1}.
double mass_threshold(int n, double b0, double eps);

// Wavenumber cap min{1/3, (C_{n,beta} b / mass)^{1/n}} with
// C_{n,beta} = (4 pi/3)^{n/2} beta^{n/2} J_{n/2}(beta)
//              * J_{n/2}((2/3) j) / J_{n/2}(j).
double frequency_threshold(int n, double beta, double b, double mass);

struct AdmissibilityClause {
  std::string name;
  bool pass = false;
  double slack = 0.0;  // positive means satisfied with that margin
};

struct AdmissibilityReport {
  std::vector<AdmissibilityClause> clauses;
  bool pass = false;
  // Support bounds produced by the single-radius formula, evaluated for the
  // outer pair (a, b, r2) and the inner pair (a0, b0, r1).  Both brackets are
  // reported because the two appear in the sandwich argument.
  double r_prime_outer = 0.0;
  double r_prime_inner = 0.0;
};

// Evaluates the parameter chain
//   r1^{n/2}J(s r1)/r2^{n/2}J(s r2) > b0/a0 >= b/a > r2^{n/2}J(s r2)/R^{n/2}J(s R)
// (s = sqrt(lambda), J = J_{n/2}) together with the ordering constraints.
// Failures are reported as data, not errors.
AdmissibilityReport check_admissibility(int n, double lambda, double a,
                                        double a0, double b, double b0,
                                        double r1, double r2, double R);

// First `count` radii r with J_{n/2}(k r) = 0 (count <= 8).
std::vector<double> null_quadrature_radii(int n, double k, int count);

}  // namespace quadforge
