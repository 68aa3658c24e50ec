#pragma once

#include <vector>

#include "quadforge/field.hpp"
#include "quadforge/minimize.hpp"

namespace quadforge {

// Regular radial Helmholtz field normalized to 1 at the origin:
// u0(x) = Gamma(n/2) (2/(k|x|))^{(n-2)/2} J_{(n-2)/2}(k|x|); for the planar
// grid this is J_0(k|x|). Positive on the whole grid ball while
// k R < j_{(n-2)/2,1} (checked).
ScalarField incident_field(int n, double k, const Grid& grid);

// Glued total field and contrast for the non-scattering construction:
// v equals u0 outside the positivity set D, equals the perturbed total field
// v0 = u_* + u0 near the interface (band), and blends to the constant 1 deep
// inside D through a quintic smoothstep of the distance to the zero set.
// rho is -h/v0 on the band and -(Laplacian_h + k^2)v / v elsewhere in D.
struct ContrastResult {
  ScalarField rho;
  ScalarField v;
  double band_width = 0.0;                 // the construction width delta
  std::vector<std::uint8_t> band;          // D nodes with dist <= delta/3
  std::vector<std::uint8_t> domain;        // the positivity mask D
};

ContrastResult build_contrast(const MinimizeResult& result, const ScalarField& g,
                              const ScalarField& h_volume, const ScalarField& mu,
                              double k, const ScalarField& u0, double delta);

// max over directions of |herglotz integral of (-rho v on D) + (g on the
// interface)| normalized by the total source mass
// integral_D |rho v| + integral_dD |g| dS.  Zero in exact arithmetic for the
// glued construction; measures discretization error.
// `threads` parallelizes the independent per-direction integrals; results are
// deterministic and identical for any thread count.
double nonradiating_residual(const ContrastResult& cr, const BoundaryCurve& boundary,
                             const std::vector<double>& g_seg, double k,
                             int num_directions, int threads = 1);

// Mean relative deviation of the gradient jump across the interface from the
// per-segment density g: per segment, exterior minus interior one-sided
// normal derivatives by 3-point extrapolation at distances h, 2h, 3h.
// When all g vanish the mean absolute jump is returned instead.
double jump_relation_check(const ScalarField& u_total, const BoundaryCurve& boundary,
                           const std::vector<double>& g_seg);

// Residual of (Laplacian_h + k^2 + rho chi_D) v == surface distribution:
// interior nodes (deeper than the band edge by `margin` nodes) must give 0 to
// rounding; band totals tested against the surface integral of g elsewhere.
double gluing_interior_residual(const ContrastResult& cr, double k, int margin);

}  // namespace quadforge
