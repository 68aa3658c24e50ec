#include "quadforge/radial.hpp"

#include <cmath>
#include <string>

#include "quadforge/bessel.hpp"

namespace quadforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

double gamma_half(int n) {  // Gamma(n/2) for n in {2, 3}
  return n == 2 ? 1.0 : 0.5 * std::sqrt(kPi);
}

double gamma_one_plus_half(int n) {  // Gamma(1 + n/2) for n in {2, 3}
  return n == 2 ? 1.0 : 0.75 * std::sqrt(kPi);
}

// r^{(2-n)/2}
double pow_lower(int n, double r) { return n == 2 ? 1.0 : 1.0 / std::sqrt(r); }

// r^{n/2}
double pow_upper(int n, double r) { return n == 2 ? r : r * std::sqrt(r); }

struct Kit {
  int n;
  double s;  // sqrt(lambda)
  BesselOrder lo;
  BesselOrder hi;
  Kit(int n_, double lambda)
      : n(n_), s(std::sqrt(lambda)), lo(BesselOrder::lower(n_)), hi(BesselOrder::upper(n_)) {}
  double Jlo(double r) const { return bessel_j(lo, s * r); }
  double Jhi(double r) const { return bessel_j(hi, s * r); }
  double Ylo(double r) const { return bessel_y(lo, s * r); }
  double Yhi(double r) const { return bessel_y(hi, s * r); }
};

// phi(rho) = b/a - r1^{n/2} J_{n/2}(s r1) / (rho^{n/2} J_{n/2}(s rho));
// strictly increasing on (0, R] while s R < j_{(n-2)/2,1}.
double phi(const Kit& k, double a, double b, double r1, double rho) {
  return b / a - pow_upper(k.n, r1) * k.Jhi(r1) / (pow_upper(k.n, rho) * k.Jhi(rho));
}

double bisect_phi_root(const Kit& k, double a, double b, double r1, double lo_in,
                       double hi_in) {
  double lo = lo_in, hi = hi_in;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi(k, a, b, r1, mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-14 * hi) break;
  }
  return 0.5 * (lo + hi);
}

// u'(rho) for the candidate support radius rho > r1, after eliminating c1
// with u(rho) = 0.
double boundary_slope(const Kit& k, double a, double b, double r1, double rho) {
  return (b * pow_upper(k.n, rho) * k.Jhi(rho) - a * pow_upper(k.n, r1) * k.Jhi(r1)) /
         (pow_upper(k.n, rho) * k.s * k.Jlo(rho));
}

}  // namespace

RadialParams make_radial_params(int n, double lambda, double a, double b,
                                double r1, double R,
                                std::function<double(double)> g) {
  if (n != 2 && n != 3) throw ValidationError("radial params: n must be 2 or 3");
  if (!(a > b && b > 0.0)) throw ValidationError("radial params: requires a > b > 0");
  if (!(0.0 < r1 && r1 < R)) throw ValidationError("radial params: requires 0 < r1 < R");
  const double tone = fundamental_tone_ball(n, R);
  if (!(0.0 < lambda && lambda < tone)) {
    throw ValidationError("radial params: requires 0 < lambda < fundamental tone " +
                          std::to_string(tone));
  }
  if (g) {
    // Sampled profile check: zero on [0, r1], nondecreasing, tolerance 1e-12.
    const int samples = 10000;
    double prev = 0.0;
    for (int i = 0; i <= samples; ++i) {
      const double r = R * i / samples;
      const double v = g(r);
      if (r <= r1 && std::fabs(v) > 1e-12) {
        throw ValidationError("radial params: g must vanish on [0, r1]");
      }
      if (v < -1e-12) throw ValidationError("radial params: g must be nonnegative");
      if (i > 0 && v < prev - 1e-12) {
        throw ValidationError("radial params: g must be nondecreasing");
      }
      prev = v;
    }
  }
  RadialParams p;
  p.n = n;
  p.lambda = lambda;
  p.a = a;
  p.b = b;
  p.r1 = r1;
  p.R = R;
  p.g = std::move(g);
  return p;
}

double RadialSolution::u(double r) const {
  const RadialParams& p = params;
  if (r >= rho) return 0.0;
  const Kit k(p.n, p.lambda);
  if (r == 0.0) {
    // Analytic limit of r^{(2-n)/2} J_{(n-2)/2}(s r) at the origin:
    // (s/2)^{(n-2)/2} / Gamma(n/2).
    const double lim = std::pow(0.5 * k.s, 0.5 * (p.n - 2)) / gamma_half(p.n);
    return (p.b - p.a) / p.lambda + c1 * lim;
  }
  double val = (p.b - p.a) / p.lambda + c1 * pow_lower(p.n, r) * k.Jlo(r);
  if (r > p.r1) {
    const double w = p.a * kPi * pow_upper(p.n, p.r1) / (2.0 * k.s);
    val += p.a / p.lambda +
           w * pow_lower(p.n, r) * (k.Yhi(p.r1) * k.Jlo(r) - k.Jhi(p.r1) * k.Ylo(r));
  }
  return val;
}

double RadialSolution::du(double r) const {
  const RadialParams& p = params;
  if (r > rho) return 0.0;
  const Kit k(p.n, p.lambda);
  double val = -c1 * k.s * pow_lower(p.n, r) * k.Jhi(r);
  if (r > p.r1) {
    const double w = p.a * kPi * pow_upper(p.n, p.r1) / 2.0;
    val -= w * pow_lower(p.n, r) * (k.Yhi(p.r1) * k.Jhi(r) - k.Jhi(p.r1) * k.Yhi(r));
  }
  return val;
}

double support_radius_gzero(const RadialParams& p) {
  const Kit k(p.n, p.lambda);
  if (phi(k, p.a, p.b, p.r1, p.R) <= 0.0) return p.R;
  // phi(r1) = (b-a)/a < 0 < phi(R): the root is interior.
  return bisect_phi_root(k, p.a, p.b, p.r1, p.r1, p.R);
}

RadialSolution radial_solve(const RadialParams& p) {
  const Kit k(p.n, p.lambda);
  const double Rp = support_radius_gzero(p);

  auto F = [&](double rho) { return boundary_slope(k, p.a, p.b, p.r1, rho) + p.g_at(rho); };

  double lo = p.r1 + 1e-9 * (Rp - p.r1);
  double hi = Rp;
  const double Flo = F(lo);
  const double Fhi = F(hi);
  // F(R') is zero analytically when R' < R; allow the rounding of that zero.
  const double endpoint_slack = 1e-9 * (p.a + p.b) / k.s;
  if (!(Flo < 0.0) || Fhi < -endpoint_slack) {
    throw NumericalError(
        "no-admissible-support: u'(rho) + g(rho) has no sign change on (r1, R']; "
        "the boundary profile g is too large for a free boundary below R'");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (F(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-15 * hi) break;
  }
  const double rho = 0.5 * (lo + hi);

  // c1 from u(rho) = 0 on the outer branch.
  const double w = p.a * kPi * pow_upper(p.n, p.r1) / (2.0 * k.s);
  const double outer =
      w * pow_lower(p.n, rho) * (k.Yhi(p.r1) * k.Jlo(rho) - k.Jhi(p.r1) * k.Ylo(rho));
  const double c1 = -(p.b / p.lambda + outer) / (pow_lower(p.n, rho) * k.Jlo(rho));

  RadialSolution sol;
  sol.params = p;
  sol.c1 = c1;
  sol.rho = rho;
  sol.Rprime = Rp;
  if (!(sol.c1 > 0.0)) {
    throw NumericalError("radial_solve: recovered c1 is not positive");
  }
  if (!(p.r1 < rho && rho <= Rp + 1e-12)) {
    throw NumericalError("radial_solve: support radius left (r1, R']");
  }
  return sol;
}

double mvt_constant(int n, double k, double radius) {
  if (n != 2 && n != 3) throw ValidationError("mvt_constant: n must be 2 or 3");
  if (!(k > 0.0) || !(radius > 0.0)) {
    throw ValidationError("mvt_constant: k and radius must be positive");
  }
  const double j1 = first_zero(BesselOrder::lower(n));
  if (!(k * radius < j1)) {
    throw ValidationError("mvt_constant: requires k*radius < j_{(n-2)/2,1}");
  }
  return std::pow(2.0 * kPi, 0.5 * n) * std::pow(k, -0.5 * n) * pow_upper(n, radius) *
         bessel_j(BesselOrder::upper(n), k * radius);
}

double mass_threshold(int n, double b0, double eps) {
  if (n != 2 && n != 3) throw ValidationError("mass_threshold: n must be 2 or 3");
  if (!(b0 > 0.0) || !(eps > 0.0)) {
    throw ValidationError("mass_threshold: b0 and eps must be positive");
  }
  const BesselOrder up = BesselOrder::upper(n);
  const double j1 = first_zero(BesselOrder::lower(n));
  const double cn = std::pow(2.0, n) * std::pow(3.0 * kPi, 0.5 * n) /
                    gamma_one_plus_half(n) * bessel_j(up, j1) / bessel_j(up, j1 / 3.0);
  return cn * b0 * std::pow(eps, n);
}

double frequency_threshold(int n, double beta, double b, double mass) {
  if (n != 2 && n != 3) throw ValidationError("frequency_threshold: n must be 2 or 3");
  const double j1 = first_zero(BesselOrder::lower(n));
  if (!(0.0 < beta && beta < j1)) {
    throw ValidationError("frequency_threshold: requires beta in (0, j_{(n-2)/2,1})");
  }
  if (!(b > 0.0) || !(mass > 0.0)) {
    throw ValidationError("frequency_threshold: b and mass must be positive");
  }
  const BesselOrder up = BesselOrder::upper(n);
  const double c = std::pow(4.0 * kPi / 3.0, 0.5 * n) * std::pow(beta, 0.5 * n) *
                   bessel_j(up, beta) * bessel_j(up, (2.0 / 3.0) * j1) / bessel_j(up, j1);
  return std::min(1.0 / 3.0, std::pow(c * b / mass, 1.0 / n));
}

AdmissibilityReport check_admissibility(int n, double lambda, double a, double a0,
                                        double b, double b0, double r1, double r2,
                                        double R) {
  AdmissibilityReport rep;
  auto clause = [&rep](const std::string& name, double slack) {
    rep.clauses.push_back({name, slack > 0.0, slack});
  };

  clause("b > 0", b);
  clause("b <= b0", b0 - b + 1e-300);          // non-strict
  clause("b0 < a0", a0 - b0);
  clause("a0 <= a", a - a0 + 1e-300);          // non-strict
  clause("0 < r1", r1);
  clause("r1 <= r2", r2 - r1 + 1e-300);        // non-strict
  clause("r2 < R", R - r2);
  clause("0 < lambda", lambda);
  const double tone = fundamental_tone_ball(n, R);
  clause("lambda < fundamental tone", tone - lambda);

  bool chain_ok = true;
  for (const auto& c : rep.clauses) chain_ok = chain_ok && c.pass;
  if (chain_ok) {
    const Kit k(n, lambda);
    const double m1 = pow_upper(n, r1) * k.Jhi(r1);
    const double m2 = pow_upper(n, r2) * k.Jhi(r2);
    const double mR = pow_upper(n, R) * k.Jhi(R);
    clause("r1-to-r2 ratio > b0/a0", m1 / m2 - b0 / a0);
    clause("b0/a0 >= b/a", b0 / a0 - b / a + 1e-300);
    clause("b/a > r2-to-R ratio", b / a - m2 / mR);
  } else {
    clause("r1-to-r2 ratio > b0/a0", -1.0);
    clause("b0/a0 >= b/a", -1.0);
    clause("b/a > r2-to-R ratio", -1.0);
  }

  rep.pass = true;
  for (const auto& c : rep.clauses) rep.pass = rep.pass && c.pass;

  if (rep.pass) {
    const Kit k(n, lambda);
    rep.r_prime_outer =
        phi(k, a, b, r2, R) <= 0.0 ? R : bisect_phi_root(k, a, b, r2, r2, R);
    rep.r_prime_inner =
        phi(k, a0, b0, r1, R) <= 0.0 ? R : bisect_phi_root(k, a0, b0, r1, r1, R);
  }
  return rep;
}

std::vector<double> null_quadrature_radii(int n, double k, int count) {
  if (n != 2 && n != 3) throw ValidationError("null_quadrature_radii: n must be 2 or 3");
  if (!(k > 0.0)) throw ValidationError("null_quadrature_radii: k must be positive");
  if (count <= 0 || count > 8) {
    throw ValidationError("null_quadrature_radii: count must be in [1, 8]");
  }
  std::vector<double> zeros = bessel_j_zeros(BesselOrder::upper(n), count);
  for (double& z : zeros) z /= k;
  return zeros;
}

}  // namespace quadforge
