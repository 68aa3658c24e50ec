#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "quadforge/bessel.hpp"
#include "quadforge/minimize.hpp"
#include "quadforge/scattering.hpp"
#include "radial_cases.hpp"

using namespace quadforge;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Problem {
  EnergySpec spec;
  ScalarField h_vol;
  ScalarField mu;
  double k;
};

Problem radial_problem(int m, double lambda, double a, double b, double r1,
                       double gval) {
  const Grid grid(m, 1.0);
  ScalarField f = ScalarField::ball(grid);
  ScalarField g = ScalarField::ball(grid);
  ScalarField h_vol = ScalarField::box(grid, b);
  ScalarField mu = ScalarField::box(grid);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const double r = std::hypot(grid.coord(i), grid.coord(j));
      if (!f.masked(i, j)) {
        f.at(i, j) = (r < r1 ? a : 0.0) - b;
        if (gval > 0.0 && r > r1) g.at(i, j) = gval;
      }
      if (r < r1) mu.at(i, j) = a;
    }
  return {make_energy_spec(std::move(f), std::move(g), lambda), std::move(h_vol),
          std::move(mu), std::sqrt(lambda)};
}

}  // namespace

TEST_CASE("incident field: normalization, positivity, discrete residual order") {
  const double k = std::sqrt(2.0);
  double errs[2];
  int t = 0;
  for (int m : {129, 257}) {
    const Grid grid(m, 1.0);
    const ScalarField u0 = incident_field(2, k, grid);
    const int c = (m - 1) / 2;
    CHECK(u0.at(c, c) == 1.0);
    // positive on the grid ball
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        if (std::hypot(grid.coord(i), grid.coord(j)) <= grid.R)
          CHECK(u0.at(i, j) > 0.0);
    // discrete Helmholtz residual (interior nodes)
    double worst = 0.0;
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    for (int j = 2; j < m - 2; ++j)
      for (int i = 2; i < m - 2; ++i) {
        const double lap = (u0.at(i + 1, j) + u0.at(i - 1, j) + u0.at(i, j + 1) +
                            u0.at(i, j - 1) - 4.0 * u0.at(i, j)) *
                           inv_h2;
        worst = std::max(worst, std::fabs(lap + k * k * u0.at(i, j)));
      }
    errs[t++] = worst;
  }
  CHECK(std::log2(errs[0] / errs[1]) > 1.9);

  // positivity bound on the wavenumber is enforced
  const Grid grid(65, 1.0);
  CHECK_THROWS_AS(incident_field(2, 2.5, grid), ValidationError);
  // min over the grid ball stays positive right below the bound
  const double j0 = first_zero(BesselOrder(0));
  const ScalarField tight = incident_field(2, 0.9 * j0, grid);
  double mn = 1e300;
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.m; ++i)
      if (std::hypot(grid.coord(i), grid.coord(j)) <= grid.R)
        mn = std::min(mn, tight.at(i, j));
  CHECK(mn > 0.0);
}

TEST_CASE("contrast construction on the radial problem") {
  Problem prob = radial_problem(257, 2.0, 10.0, 1.0, 0.25, 0.0);
  const Grid& grid = prob.spec.f.grid();
  MinimizeOptions opt;
  opt.keep_log = false;
  const MinimizeResult res = minimize(prob.spec, opt);
  const ScalarField u0 = incident_field(2, prob.k, grid);
  const double delta = 10.0 * grid.h();
  const ContrastResult cr =
      build_contrast(res, prob.spec.g, prob.h_vol, prob.mu, prob.k, u0, delta);

  CHECK(cr.band_width == delta);
  // v equals the incident field at every node outside the domain
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.m; ++i)
      if (!cr.domain[grid.index(i, j)])
        CHECK(cr.v.at(i, j) == u0.at(i, j));
  // band nodes satisfy rho*v0 + h = 0 definitionally
  long band_count = 0;
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.m; ++i) {
      const std::size_t idx = grid.index(i, j);
      if (!cr.band[idx]) continue;
      ++band_count;
      const double v0 = res.u.at(i, j) + u0.at(i, j);
      CHECK(std::fabs(cr.rho.at(i, j) * v0 + prob.h_vol.at(i, j)) < 1e-10);
    }
  CHECK(band_count > 0);
  // band lower bound: |rho| >= 0.5 min_band(h/v0) within delta/2 of the edge
  double min_band = 1e300;
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.m; ++i) {
      const std::size_t idx = grid.index(i, j);
      if (!cr.band[idx]) continue;
      min_band = std::min(min_band,
                          prob.h_vol.at(i, j) / (res.u.at(i, j) + u0.at(i, j)));
    }
  const ScalarField din = distance_to_zero_set(res.u, res.tau_pos);
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.m; ++i) {
      const std::size_t idx = grid.index(i, j);
      if (!cr.domain[idx] || din.at(i, j) > 0.5 * delta) continue;
      CHECK(std::fabs(cr.rho.at(i, j)) >= 0.5 * min_band);
    }
  // v positive on a neighborhood of the closed domain
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.m; ++i)
      if (cr.domain[grid.index(i, j)]) CHECK(cr.v.at(i, j) > 0.0);
  // glued equation holds exactly at interior nodes away from the band edge
  CHECK(gluing_interior_residual(cr, prob.k, 2) < 1e-9);

  // far-field residual of the glued source shrinks like the mesh
  std::vector<double> gseg(res.boundary.segments.size(), 0.0);
  const double nr = nonradiating_residual(cr, res.boundary, gseg, prob.k, 64);
  CHECK(nr < 0.05);

  // guard: an incident field that dips negative near the interface is refused
  ScalarField bad_u0 = u0;
  for (auto& v : bad_u0.values()) v -= 1.5;
  CHECK_THROWS_AS(
      build_contrast(res, prob.spec.g, prob.h_vol, prob.mu, prob.k, bad_u0, delta),
      ValidationError);
  CHECK_THROWS_AS(
      build_contrast(res, prob.spec.g, prob.h_vol, prob.mu, prob.k, u0,
                     2.0 * grid.h()),
      ValidationError);
}

TEST_CASE("nonradiating residual: zeroed source and perturbed control") {
  Problem prob = radial_problem(129, 2.0, 10.0, 1.0, 0.25, 0.2);
  const Grid& grid = prob.spec.f.grid();
  MinimizeOptions opt;
  opt.keep_log = false;
  // plain sweep semantics: the op-level discrimination bounds below are
  // calibrated on the un-peeled interface at this coarse grid
  opt.interface_peel = false;
  const MinimizeResult res = minimize(prob.spec, opt);
  const ScalarField u0 = incident_field(2, prob.k, grid);
  const ContrastResult cr = build_contrast(res, prob.spec.g, prob.h_vol, prob.mu,
                                           prob.k, u0, 10.0 * grid.h());

  std::vector<double> gseg;
  for (const auto& seg : res.boundary.segments)
    gseg.push_back(prob.spec.g.sample(seg.mid[0], seg.mid[1]));
  const double base = nonradiating_residual(cr, res.boundary, gseg, prob.k, 64);
  CHECK(base < 0.2);

  // zeroed-out source reports exactly zero
  ContrastResult zero = cr;
  std::fill(zero.rho.values().begin(), zero.rho.values().end(), 0.0);
  std::fill(zero.v.values().begin(), zero.v.values().end(), 0.0);
  const std::vector<double> gz(gseg.size(), 0.0);
  CHECK(nonradiating_residual(zero, res.boundary, gz, prob.k, 64) == 0.0);

  // +10% boundary density on half the segments breaks the construction.
  // Within the same problem the gap is capped by the lattice-layer mass
  // constant (~1.5x); against the clean zero-density construction the broken
  // residual stands out by more than an order of magnitude.
  std::vector<double> gbad = gseg;
  for (std::size_t s = 0; s < gbad.size(); ++s)
    if (res.boundary.segments[s].mid[0] > 0.0) gbad[s] *= 1.1;
  const double broken = nonradiating_residual(cr, res.boundary, gbad, prob.k, 64);
  CHECK(broken > base);

  Problem clean = radial_problem(129, 2.0, 10.0, 1.0, 0.25, 0.0);
  const MinimizeResult res0 = minimize(clean.spec, opt);
  const ScalarField u00 = incident_field(2, clean.k, clean.spec.f.grid());
  const ContrastResult cr0 =
      build_contrast(res0, clean.spec.g, clean.h_vol, clean.mu, clean.k, u00,
                     10.0 * clean.spec.f.grid().h());
  const std::vector<double> gz0(res0.boundary.segments.size(), 0.0);
  const double clean_base =
      nonradiating_residual(cr0, res0.boundary, gz0, clean.k, 64);
  CHECK(broken > 5.0 * clean_base);
}

TEST_CASE("jump relation: smooth field against zero, agreement with the estimator") {
  const Grid grid(257, 1.0);
  // C^1 field: jump of the normal derivative across any curve is zero
  ScalarField smooth = ScalarField::box(grid);
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.m; ++i)
      smooth.at(i, j) = std::sin(1.3 * grid.coord(i)) * std::cos(0.7 * grid.coord(j));
  std::vector<std::uint8_t> mask(grid.size(), 0);
  for (int j = 0; j < grid.m; ++j)
    for (int i = 0; i < grid.m; ++i)
      if (std::hypot(grid.coord(i), grid.coord(j)) < 0.5) mask[grid.index(i, j)] = 1;
  const BoundaryCurve curve = extract_boundary(grid, mask);
  const std::vector<double> zeros(curve.segments.size(), 0.0);
  double field_scale = 0.0;
  for (double v : smooth.values()) field_scale = std::max(field_scale, std::fabs(v));
  CHECK(jump_relation_check(smooth, curve, zeros) < 10.0 * grid.h() * field_scale);

  CHECK_THROWS_AS(jump_relation_check(smooth, BoundaryCurve{}, {}), ValidationError);
}

TEST_CASE("bernoulli residual and jump relation share the estimator") {
  Problem prob = radial_problem(129, 2.0, 10.0, 1.0, 0.25, 0.2);
  MinimizeOptions opt;
  opt.keep_log = false;
  const MinimizeResult res = minimize(prob.spec, opt);
  std::vector<double> gseg;
  for (const auto& seg : res.boundary.segments)
    gseg.push_back(prob.spec.g.sample(seg.mid[0], seg.mid[1]));
  const double via_jump = jump_relation_check(res.u, res.boundary, gseg);
  const double via_bernoulli = bernoulli_residual(prob.spec, res);
  CHECK(std::fabs(via_jump - via_bernoulli) < 1e-12);
}
