#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "quadforge/errors.hpp"

namespace quadforge {

// Uniform node-centered grid on the square box [-R_box, R_box]^2 with
// R_box = R (1 + 4/m), so the closed ball B_R sits strictly inside the box.
// m is odd so the origin is a node.
struct Grid {
  int m = 0;
  double R = 0.0;

  Grid() = default;
  Grid(int m_, double R_);

  double box_radius() const { return R * (1.0 + 4.0 / m); }
  double h() const { return 2.0 * box_radius() / (m - 1); }
  double coord(int i) const { return -box_radius() + i * h(); }
  std::size_t size() const { return static_cast<std::size_t>(m) * m; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * m + i; }

  bool operator==(const Grid& o) const { return m == o.m && R == o.R; }
};

// Nodal scalar field with a Dirichlet mask (true = node outside the domain,
// value pinned to 0).
class ScalarField {
 public:
  ScalarField() = default;
  // All-false mask (whole box active).
  static ScalarField box(const Grid& grid, double fill = 0.0);
  // Mask outside the open ball B_R.
  static ScalarField ball(const Grid& grid, double fill = 0.0);

  const Grid& grid() const { return grid_; }
  double& at(int i, int j) { return values_[grid_.index(i, j)]; }
  double at(int i, int j) const { return values_[grid_.index(i, j)]; }
  bool masked(int i, int j) const { return mask_[grid_.index(i, j)] != 0; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  // Re-pins masked nodes to 0.
  void enforce_mask();
  // values finite, zero on the mask; throws ValidationError otherwise.
  void validate(const char* what) const;
  // additionally nonnegative everywhere (discrete constraint set).
  bool admissible() const;

  // Bilinear interpolation at a physical point (clamped to the box).
  double sample(double x, double y) const;

 private:
  Grid grid_;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
};

struct BoundarySegment {
  std::array<double, 2> mid{};
  double len = 0.0;
  std::array<double, 2> normal{};  // unit, from the true side to the false side
  // Traversal endpoints (loop order), kept for turning/consistency checks.
  std::array<double, 2> p0{};
  std::array<double, 2> p1{};
};

// Piecewise-linear interface extracted from a node mask. Segments are grouped
// into loops (index lists into `segments`, in traversal order).
struct BoundaryCurve {
  std::vector<BoundarySegment> segments;
  std::vector<std::vector<int>> loops;
  bool closed = false;

  double total_length() const;
  // Signed total turning of one loop (for a simple closed loop: +-2 pi).
  double loop_turning(int loop_index) const;
};

// 5-point Laplacian; masked nodes give 0 and contribute 0 through neighbors.
ScalarField laplacian(const ScalarField& u);

// Sum of values*h^2 over non-masked nodes.
double integrate(const ScalarField& u);

// Marching-squares interface of the 0.5-level of the node indicator.
// The binary indicator is first smoothed once with a 3x3 box filter (with
// zero exterior padding) so edge crossings interpolate sub-node positions;
// ambiguous saddle cells are resolved by connecting the positive corners.
// Throws ValidationError("empty-domain") when the mask has no true node.
BoundaryCurve extract_boundary(const Grid& grid, const std::vector<std::uint8_t>& mask);

// Smallest Dirichlet eigenvalue of -Laplacian_h on the ball mask, by inverse
// power iteration with conjugate-gradient inner solves; relative eigenvalue
// tolerance 1e-8. Throws NumericalError("eig-no-converge") after 500 outer
// iterations.
double discrete_fundamental_tone(const Grid& grid);

// Exact Euclidean distance to the node set {u <= threshold}.
ScalarField distance_to_zero_set(const ScalarField& u, double threshold);

}  // namespace quadforge
