#pragma once

#include <array>
#include <complex>
#include <vector>

#include "quadforge/field.hpp"
#include "quadforge/radial.hpp"

namespace quadforge {

using Point2 = std::array<double, 2>;

// Real fundamental solution of -(Laplacian + k^2):
// n = 2: -(1/4) Y_0(k r);  n = 3: cos(k r) / (4 pi r).
double fundamental_solution(int n, double k, double r);

// sum over nodes of Psi_k(|p - node|) * density * h^2, one value per point.
// Every point must stay at least 5h away from the density support.
std::vector<double> volume_potential(const ScalarField& density, double k,
                                     const std::vector<Point2>& points);

// Piecewise-constant radial density: value `values[i]` on the annulus
// [radii[i-1], radii[i]) with radii[-1] = 0; zero beyond radii.back().
struct RadialDensity {
  std::vector<double> radii;
  std::vector<double> values;

  double outer() const { return radii.empty() ? 0.0 : radii.back(); }
};

// Exterior volume potential of a radial density at distance d from the
// center, by adaptive radial quadrature with an angular trapezoid /
// Gauss-Legendre rule. Requires d > outer radius.
double volume_potential_radial(const RadialDensity& density, int n, double k,
                               double d);

// Single layer over a polyline boundary (midpoint rule).
std::vector<double> layer_potential(const BoundaryCurve& boundary,
                                    const std::vector<double>& g_seg, double k,
                                    int n, const std::vector<Point2>& points);

// Single layer over an exact circle (trapezoid rule on the parametrization).
std::vector<double> layer_potential_circle(const Point2& center, double radius,
                                           double g_const, double k, int n,
                                           int num_nodes,
                                           const std::vector<Point2>& points);

// Exterior single layer of a constant density over the sphere/circle of
// radius rho, evaluated at distance d > rho (radial reduction, any n in
// {2,3}).
double layer_potential_sphere_radial(int n, double k, double rho, double g_const,
                                     double d);

// Grid-backed hybrid quadrature-domain candidate.
struct QuadratureDomain {
  std::vector<std::uint8_t> mask;  // D as a node set (on h_volume's grid)
  BoundaryCurve boundary;
  std::vector<double> g_boundary;  // one value per boundary segment
  ScalarField h_volume;            // volume density on D
  ScalarField mu;                  // bounded density form of the distribution
};

QuadratureDomain make_quadrature_domain(std::vector<std::uint8_t> mask,
                                        BoundaryCurve boundary,
                                        std::vector<double> g_boundary,
                                        ScalarField h_volume, ScalarField mu);

// Exact radial description of the oracle-built hybrid domain: D = B_rho,
// mu = a chi_{B_r1}, h = b on D, constant boundary density gval on the
// sphere/circle of radius rho.
struct RadialHybridDomain {
  int n = 2;
  double k = 0.0;
  double r1 = 0.0;
  double rho = 0.0;
  double a = 0.0;
  double b = 0.0;
  double gval = 0.0;
};

RadialHybridDomain make_radial_hybrid(const RadialSolution& sol);

// Directions and Herglotz-type integral values of a compactly supported
// source; vanishing over all directions is the nonradiating criterion.
struct FarFieldSamples {
  std::vector<std::array<double, 3>> directions;  // unit vectors
  std::vector<std::complex<double>> values;
};

std::vector<std::array<double, 3>> circle_directions(int count);

// per direction xhat: integral of e^{-i k xhat.y} density(y) dy plus the
// boundary term integral of e^{-i k xhat.y} g dS (midpoint rule).
FarFieldSamples herglotz_integral(const ScalarField& volume_density,
                                  const BoundaryCurve* boundary,
                                  const std::vector<double>* g_seg, double k,
                                  const std::vector<std::array<double, 3>>& directions);

// Herglotz integral of a radial density (plus an optional constant surface
// density on the outer sphere); direction-independent by symmetry.
std::complex<double> herglotz_radial(const RadialDensity& density, int n, double k,
                                     double surface_radius = 0.0,
                                     double surface_g = 0.0);

// max_j |<mu, w_j> - int_D w_j h - int_dD w_j g| / max_j(|A_j| + |B_j| + 1e-30)
// over plane-wave pairs w_j = cos(k x.theta_j), sin(k x.theta_j).
double quadrature_identity_residual(const QuadratureDomain& qd, double k,
                                    int num_waves);
double quadrature_identity_residual(const RadialHybridDomain& d, int num_waves);

// max over ring points of |Psi*mu - Psi*(h chi_D) - SL(g)| / max |Psi*mu|.
double potential_match_residual(const QuadratureDomain& qd, double k,
                                double ring_radius, int num_points);
double potential_match_residual(const RadialHybridDomain& d, double ring_radius,
                                int num_points);

// Far-field normalization constant gamma_{n,k}.
std::complex<double> gamma_constant(int n, double k);

}  // namespace quadforge
