#include "quadforge/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "quadforge/bessel.hpp"

namespace quadforge {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Adaptive Simpson with absolute tolerance.
template <typename F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

// 64-point Gauss-Legendre nodes/weights on [-1, 1] via Newton on Legendre
// polynomials (computed once).
struct Gauss64 {
  std::array<double, 64> x{}, w{};
  Gauss64() {
    const int n = 64;
    for (int i = 0; i < n / 2; ++i) {
      double xi = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double pp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = xi;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        pp = n * (xi * p1 - p0) / (xi * xi - 1.0);
        const double dx = p1 / pp;
        xi -= dx;
        if (std::fabs(dx) < 1e-16) break;
      }
      x[i] = -xi;
      x[n - 1 - i] = xi;
      w[i] = w[n - 1 - i] = 2.0 / ((1.0 - xi * xi) * pp * pp);
    }
  }
};

const Gauss64& gauss64() {
  static const Gauss64 g;
  return g;
}

// Angular average of Psi_k(|p - y|) over the circle/sphere |y| = s, for an
// exterior evaluation distance d > s.
double shell_average_psi(int n, double k, double d, double s) {
  if (n == 2) {
    const int N = 256;
    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
      const double th = 2.0 * kPi * i / N;
      const double r = std::sqrt(std::max(1e-300, d * d + s * s - 2.0 * d * s * std::cos(th)));
      sum += fundamental_solution(2, k, r);
    }
    return sum / N;  // mean over the circle
  }
  const auto& g = gauss64();
  double sum = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double t = g.x[i];  // cos of the polar angle
    const double r = std::sqrt(std::max(1e-300, d * d + s * s - 2.0 * d * s * t));
    sum += g.w[i] * fundamental_solution(3, k, r);
  }
  return 0.5 * sum;  // mean over the sphere
}

double shell_measure(int n, double s) {
  return n == 2 ? 2.0 * kPi * s : 4.0 * kPi * s * s;
}

}  // namespace

double fundamental_solution(int n, double k, double r) {
  if (!(r > 0.0)) {
    throw ValidationError("fundamental_solution: r must be positive (singular at 0)");
  }
  if (!(k > 0.0)) throw ValidationError("fundamental_solution: k must be positive");
  if (n == 2) return -0.25 * bessel_y(BesselOrder(0), k * r);
  if (n == 3) return std::cos(k * r) / (4.0 * kPi * r);
  throw ValidationError("fundamental_solution: n must be 2 or 3");
}

std::vector<double> volume_potential(const ScalarField& density, double k,
                                     const std::vector<Point2>& points) {
  const Grid& g = density.grid();
  const double w = g.h() * g.h();
  const double min_dist = 5.0 * g.h();
  std::vector<double> out(points.size(), 0.0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    double sum = 0.0;
    double nearest = std::numeric_limits<double>::max();
    for (int j = 0; j < g.m; ++j) {
      const double y = g.coord(j);
      for (int i = 0; i < g.m; ++i) {
        const double dv = density.at(i, j);
        if (dv == 0.0) continue;
        const double r = std::hypot(points[p][0] - g.coord(i), points[p][1] - y);
        nearest = std::min(nearest, r);
        if (r > 0.0) sum += fundamental_solution(2, k, r) * dv * w;
      }
    }
    if (nearest < min_dist) {
      throw ValidationError(
          "near-singular: volume_potential point closer than 5h to the density support");
    }
    out[p] = sum;
  }
  return out;
}

double volume_potential_radial(const RadialDensity& density, int n, double k,
                               double d) {
  if (!(d > density.outer())) {
    throw ValidationError("volume_potential_radial: exterior evaluation only");
  }
  double total = 0.0;
  double inner = 0.0;
  for (std::size_t p = 0; p < density.radii.size(); ++p) {
    const double outer = density.radii[p];
    const double val = density.values[p];
    if (val != 0.0 && outer > inner) {
      auto f = [&](double s) {
        return shell_measure(n, s) * shell_average_psi(n, k, d, s);
      };
      total += val * adaptive_simpson(f, inner, outer, 1e-12);
    }
    inner = outer;
  }
  return total;
}

std::vector<double> layer_potential(const BoundaryCurve& boundary,
                                    const std::vector<double>& g_seg, double k,
                                    int n, const std::vector<Point2>& points) {
  if (g_seg.size() != boundary.segments.size()) {
    throw ValidationError("layer_potential: one g value per segment required");
  }
  double max_len = 0.0;
  for (const auto& seg : boundary.segments) max_len = std::max(max_len, seg.len);
  std::vector<double> out(points.size(), 0.0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    double sum = 0.0;
    for (std::size_t s = 0; s < boundary.segments.size(); ++s) {
      const auto& seg = boundary.segments[s];
      const double r = std::hypot(points[p][0] - seg.mid[0], points[p][1] - seg.mid[1]);
      if (r < 5.0 * max_len) {
        throw ValidationError("near-singular: layer_potential point too close to the curve");
      }
      sum += fundamental_solution(n, k, r) * g_seg[s] * seg.len;
    }
    out[p] = sum;
  }
  return out;
}

std::vector<double> layer_potential_circle(const Point2& center, double radius,
                                           double g_const, double k, int n,
                                           int num_nodes,
                                           const std::vector<Point2>& points) {
  if (num_nodes < 8) throw ValidationError("layer_potential_circle: too few nodes");
  const double dl = 2.0 * kPi * radius / num_nodes;
  std::vector<double> out(points.size(), 0.0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    double sum = 0.0;
    for (int i = 0; i < num_nodes; ++i) {
      const double th = 2.0 * kPi * i / num_nodes;
      const double qx = center[0] + radius * std::cos(th);
      const double qy = center[1] + radius * std::sin(th);
      const double r = std::hypot(points[p][0] - qx, points[p][1] - qy);
      if (r < 5.0 * dl) {
        throw ValidationError("near-singular: circle layer point too close to the circle");
      }
      sum += fundamental_solution(n, k, r) * g_const * dl;
    }
    out[p] = sum;
  }
  return out;
}

double layer_potential_sphere_radial(int n, double k, double rho, double g_const,
                                     double d) {
  if (!(d > rho)) {
    throw ValidationError("layer_potential_sphere_radial: exterior evaluation only");
  }
  return g_const * shell_measure(n, rho) * shell_average_psi(n, k, d, rho);
}

QuadratureDomain make_quadrature_domain(std::vector<std::uint8_t> mask,
                                        BoundaryCurve boundary,
                                        std::vector<double> g_boundary,
                                        ScalarField h_volume, ScalarField mu) {
  const Grid& grid = h_volume.grid();
  if (!(mu.grid() == grid)) {
    throw ValidationError("quadrature domain: mu and h must share one grid");
  }
  if (mask.size() != grid.size()) {
    throw ValidationError("quadrature domain: mask size does not match the grid");
  }
  if (g_boundary.size() != boundary.segments.size()) {
    throw ValidationError("quadrature domain: one g value per boundary segment");
  }
  for (double gv : g_boundary) {
    if (gv < 0.0) throw ValidationError("quadrature domain: g must be nonnegative");
  }
  for (int j = 0; j < grid.m; ++j) {
    for (int i = 0; i < grid.m; ++i) {
      const std::size_t idx = grid.index(i, j);
      if (!mask[idx] && mu.at(i, j) != 0.0) {
        throw ValidationError("quadrature domain: mu must vanish outside the mask");
      }
      if (mask[idx] && h_volume.at(i, j) < 0.0) {
        throw ValidationError("quadrature domain: h must be nonnegative on the mask");
      }
    }
  }
  if (!boundary.closed) {
    throw ValidationError("quadrature domain: boundary must be closed");
  }
  QuadratureDomain qd;
  qd.mask = std::move(mask);
  qd.boundary = std::move(boundary);
  qd.g_boundary = std::move(g_boundary);
  qd.h_volume = std::move(h_volume);
  qd.mu = std::move(mu);
  return qd;
}

RadialHybridDomain make_radial_hybrid(const RadialSolution& sol) {
  RadialHybridDomain d;
  d.n = sol.params.n;
  d.k = std::sqrt(sol.params.lambda);
  d.r1 = sol.params.r1;
  d.rho = sol.rho;
  d.a = sol.params.a;
  d.b = sol.params.b;
  d.gval = sol.params.g_at(sol.rho);
  return d;
}

std::vector<std::array<double, 3>> circle_directions(int count) {
  std::vector<std::array<double, 3>> dirs;
  dirs.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double th = 2.0 * kPi * i / count;
    dirs.push_back({std::cos(th), std::sin(th), 0.0});
  }
  return dirs;
}

FarFieldSamples herglotz_integral(const ScalarField& volume_density,
                                  const BoundaryCurve* boundary,
                                  const std::vector<double>* g_seg, double k,
                                  const std::vector<std::array<double, 3>>& directions) {
  FarFieldSamples out;
  out.directions = directions;
  for (const auto& d : directions) {
    const double norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if (std::fabs(norm - 1.0) > 1e-12) {
      throw ValidationError("herglotz_integral: directions must be unit vectors");
    }
  }
  const Grid& g = volume_density.grid();
  const double w = g.h() * g.h();
  out.values.reserve(directions.size());
  for (const auto& dir : directions) {
    double re = 0.0, im = 0.0;
    for (int j = 0; j < g.m; ++j) {
      const double y = g.coord(j);
      for (int i = 0; i < g.m; ++i) {
        const double dv = volume_density.at(i, j);
        if (dv == 0.0) continue;
        const double phase = -k * (dir[0] * g.coord(i) + dir[1] * y);
        re += dv * w * std::cos(phase);
        im += dv * w * std::sin(phase);
      }
    }
    if (boundary && g_seg) {
      for (std::size_t s = 0; s < boundary->segments.size(); ++s) {
        const auto& seg = boundary->segments[s];
        const double phase = -k * (dir[0] * seg.mid[0] + dir[1] * seg.mid[1]);
        re += (*g_seg)[s] * seg.len * std::cos(phase);
        im += (*g_seg)[s] * seg.len * std::sin(phase);
      }
    }
    out.values.emplace_back(re, im);
  }
  return out;
}

std::complex<double> herglotz_radial(const RadialDensity& density, int n, double k,
                                     double surface_radius, double surface_g) {
  // Shell average of the plane wave e^{-i k x.y} over |y| = s is J_0(k s) in
  // the plane and sinc(k s) in space; the imaginary part vanishes by symmetry.
  auto shell_wave = [&](double s) {
    if (n == 2) return bessel_j(BesselOrder(0), k * s);
    const double z = k * s;
    return z < 1e-8 ? 1.0 - z * z / 6.0 : std::sin(z) / z;
  };
  double total = 0.0;
  double inner = 0.0;
  for (std::size_t p = 0; p < density.radii.size(); ++p) {
    const double outer = density.radii[p];
    const double val = density.values[p];
    if (val != 0.0 && outer > inner) {
      auto f = [&](double s) { return shell_measure(n, s) * shell_wave(s); };
      total += val * adaptive_simpson(f, inner, outer, 1e-12);
    }
    inner = outer;
  }
  if (surface_radius > 0.0 && surface_g != 0.0) {
    total += surface_g * shell_measure(n, surface_radius) * shell_wave(surface_radius);
  }
  return {total, 0.0};
}

double quadrature_identity_residual(const QuadratureDomain& qd, double k,
                                    int num_waves) {
  if (num_waves <= 0) return 0.0;
  const Grid& g = qd.h_volume.grid();
  const double w = g.h() * g.h();
  double worst = 0.0, scale = 0.0;
  for (int j = 0; j < num_waves; ++j) {
    const double ang = 2.0 * kPi * j / num_waves;
    const double dx = std::cos(ang), dy = std::sin(ang);
    for (int part = 0; part < 2; ++part) {  // cos and sin test waves
      double A = 0.0, B = 0.0, C = 0.0;
      for (int jj = 0; jj < g.m; ++jj) {
        const double y = g.coord(jj);
        for (int ii = 0; ii < g.m; ++ii) {
          const std::size_t idx = g.index(ii, jj);
          const double phase = k * (dx * g.coord(ii) + dy * y);
          const double wv = part == 0 ? std::cos(phase) : std::sin(phase);
          A += wv * qd.mu.at(ii, jj) * w;
          if (qd.mask[idx]) B += wv * qd.h_volume.at(ii, jj) * w;
        }
      }
      for (std::size_t s = 0; s < qd.boundary.segments.size(); ++s) {
        const auto& seg = qd.boundary.segments[s];
        const double phase = k * (dx * seg.mid[0] + dy * seg.mid[1]);
        const double wv = part == 0 ? std::cos(phase) : std::sin(phase);
        C += wv * qd.g_boundary[s] * seg.len;
      }
      worst = std::max(worst, std::fabs(A - B - C));
      scale = std::max(scale, std::fabs(A) + std::fabs(B) + 1e-30);
    }
  }
  return worst / scale;
}

double quadrature_identity_residual(const RadialHybridDomain& d, int num_waves) {
  if (num_waves <= 0) return 0.0;
  const double k = d.k;
  auto shell_wave = [&](double s) {
    if (d.n == 2) return bessel_j(BesselOrder(0), k * s);
    const double z = k * s;
    return z < 1e-8 ? 1.0 - z * z / 6.0 : std::sin(z) / z;
  };
  auto ball_integral = [&](double r) {
    auto f = [&](double s) { return shell_measure(d.n, s) * shell_wave(s); };
    return adaptive_simpson(f, 0.0, r, 1e-13);
  };
  // cos waves: identical for every direction by radial symmetry; sin waves
  // vanish identically on all three terms.
  const double A = d.a * ball_integral(d.r1);
  const double B = d.b * ball_integral(d.rho);
  const double C = d.gval * shell_measure(d.n, d.rho) * shell_wave(d.rho);
  const double scale = std::fabs(A) + std::fabs(B) + 1e-30;
  return std::fabs(A - B - C) / scale;
}

double potential_match_residual(const QuadratureDomain& qd, double k,
                                double ring_radius, int num_points) {
  const Grid& g = qd.h_volume.grid();
  const double w = g.h() * g.h();
  const double clearance = 5.0 * g.h();
  double worst = 0.0, scale = 0.0;
  for (int p = 0; p < num_points; ++p) {
    const double ang = 2.0 * kPi * p / num_points;
    const Point2 pt{ring_radius * std::cos(ang), ring_radius * std::sin(ang)};
    double pot_mu = 0.0, pot_h = 0.0, pot_g = 0.0;
    for (int jj = 0; jj < g.m; ++jj) {
      const double y = g.coord(jj);
      for (int ii = 0; ii < g.m; ++ii) {
        const std::size_t idx = g.index(ii, jj);
        const double mu_v = qd.mu.at(ii, jj);
        const double h_v = qd.mask[idx] ? qd.h_volume.at(ii, jj) : 0.0;
        if (mu_v == 0.0 && h_v == 0.0) continue;
        const double r = std::hypot(pt[0] - g.coord(ii), pt[1] - y);
        if (r < clearance) {
          throw ValidationError("potential_match_residual: ring violates 5h clearance");
        }
        const double psi = fundamental_solution(2, k, r);
        pot_mu += psi * mu_v * w;
        pot_h += psi * h_v * w;
      }
    }
    for (std::size_t s = 0; s < qd.boundary.segments.size(); ++s) {
      const auto& seg = qd.boundary.segments[s];
      const double r = std::hypot(pt[0] - seg.mid[0], pt[1] - seg.mid[1]);
      if (r < clearance) {
        throw ValidationError("potential_match_residual: ring violates 5h clearance");
      }
      pot_g += fundamental_solution(2, k, r) * qd.g_boundary[s] * seg.len;
    }
    worst = std::max(worst, std::fabs(pot_mu - pot_h - pot_g));
    scale = std::max(scale, std::fabs(pot_mu));
  }
  return worst / std::max(scale, 1e-300);
}

double potential_match_residual(const RadialHybridDomain& d, double ring_radius,
                                int num_points) {
  if (!(ring_radius > d.rho)) {
    throw ValidationError("potential_match_residual: ring must lie outside the domain");
  }
  RadialDensity mu_dens{{d.r1}, {d.a}};
  RadialDensity h_dens{{d.rho}, {d.b}};
  // All radial: one exterior distance represents every ring point.
  (void)num_points;
  const double pot_mu = volume_potential_radial(mu_dens, d.n, d.k, ring_radius);
  const double pot_h = volume_potential_radial(h_dens, d.n, d.k, ring_radius);
  const double pot_g =
      layer_potential_sphere_radial(d.n, d.k, d.rho, d.gval, ring_radius);
  return std::fabs(pot_mu - pot_h - pot_g) / std::max(std::fabs(pot_mu), 1e-300);
}

std::complex<double> gamma_constant(int n, double k) {
  if (n != 2 && n != 3) throw ValidationError("gamma_constant: n must be 2 or 3");
  if (!(k > 0.0)) throw ValidationError("gamma_constant: k must be positive");
  const double phase = -(n - 3) * kPi / 4.0;
  const double mag =
      std::pow(k, 0.5 * (n - 3)) / (2.0 * std::pow(2.0 * kPi, 0.5 * (n - 1)));
  return {mag * std::cos(phase), mag * std::sin(phase)};
}

}  // namespace quadforge
