#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "quadforge/field.hpp"

namespace quadforge {

// Discrete functional on admissible fields u >= 0 vanishing on the mask:
//   E(u) = sum_nodes [ |grad_h u|^2 - lambda u^2 - 2 f u
//                      + g^2 * 1_{u > tau_pos} ] h^2
// with forward-difference gradients and the scale-aware positivity threshold
// tau_pos = 1e-12 * ||f||_inf * R^2.
struct EnergySpec {
  ScalarField f;
  ScalarField g;       // g >= 0 nodewise
  double lambda = 0.0; // in [0, 0.9 * discrete fundamental tone)

  double tau_pos() const;
  double f_sup() const;   // ||f||_inf over unmasked nodes
  double fplus_sup() const;
};

EnergySpec make_energy_spec(ScalarField f, ScalarField g, double lambda);

// Cached smallest Dirichlet eigenvalue of -Laplacian_h on the grid's ball.
double grid_fundamental_tone(const Grid& grid);

struct EnergyLogRow {
  long sweep = 0;
  double energy = 0.0;
  long positive_nodes = 0;
};

struct MinimizeOptions {
  enum class Order { Sequential, RedBlack };
  Order order = Order::Sequential;  // sequential lexicographic+reverse (default)
  long max_sweeps = 100000;
  double stop_rel_tol = 1e-12;  // per-sweep energy decrease threshold
  // Outer interface descent for problems with a boundary density: the sharp
  // indicator makes whole families of interface positions pointwise-stable,
  // and the plain sweep freezes at the outermost one. After convergence the
  // outermost positive layer is trial-removed and re-relaxed; the move is
  // kept only when the total energy strictly decreases. No effect when the
  // boundary density vanishes.
  bool interface_peel = true;
  bool keep_log = true;
  // Called after each sweep (sweep index, energy, positive node count).
  std::function<void(long, double, long)> on_sweep;
};

struct MinimizeResult {
  ScalarField u;
  double energy = 0.0;
  long sweeps = 0;
  std::vector<std::uint8_t> positivity_mask;  // u > tau_pos
  BoundaryCurve boundary;                     // empty segments if u == 0
  std::vector<EnergyLogRow> log;
  double tone = 0.0;     // discrete fundamental tone used for validation
  double tau_pos = 0.0;
  bool converged = true;
  // whether the verification sweep left the iterate bitwise unchanged
  bool fixed_point = false;
};

// Sweep cap reached before the stopping criterion; carries the last iterate.
struct NoConvergeError : NumericalError {
  MinimizeResult last;
  NoConvergeError(const std::string& msg, MinimizeResult r)
      : NumericalError(msg), last(std::move(r)) {}
};

double energy(const EnergySpec& spec, const ScalarField& u);

// Gauss-Seidel coordinate minimization with exact pointwise updates, barrier
// initialization, and per-sweep energy stopping rule.
MinimizeResult minimize(const EnergySpec& spec,
                        const MinimizeOptions& options = {});

// As minimize(), but starting from the given admissible field instead of the
// barrier (used by the warm-started parameter sweep).
MinimizeResult minimize_from(const EnergySpec& spec, const ScalarField& init,
                             const MinimizeOptions& options = {});

// Discrete solution v of (Laplacian_h + lambda) v = -1 on the ball mask
// (the pointwise bound of the minimizer is ||f_+||_inf * v).
ScalarField barrier_field(const Grid& grid, double lambda);

// max over unmasked nodes farther than 3h from the zero set {u <= tau_pos} of
// |Laplacian_h u + lambda u + f|, normalized by ||f||_inf. Empty set -> 0.
double el_residual(const EnergySpec& spec, const MinimizeResult& result);
double el_residual(const EnergySpec& spec, const ScalarField& u);

// Mean relative deviation of the one-sided interface gradient jump from g
// interpolated at segment midpoints (see jump_deviation in scattering.hpp;
// both operations share the estimator).
double bernoulli_residual(const EnergySpec& spec, const MinimizeResult& result);

struct ComparePair {
  double j1_min = 0.0;  // J1 of the nodewise minimum
  double j2_max = 0.0;  // J2 of the nodewise maximum
  double j1_u1 = 0.0;
  double j2_u2 = 0.0;
};

// Requires f1 <= f2, g1 >= g2 >= 0 nodewise, lambda1 <= lambda2, shared grid;
// guarantees j1_min + j2_max <= j1_u1 + j2_u2 + 1e-10.
ComparePair compare_energies(const EnergySpec& spec1, const EnergySpec& spec2,
                             const ScalarField& u1, const ScalarField& u2);

struct LambdaSweepPoint {
  double lambda = 0.0;
  double l2_norm = 0.0;
  double energy = 0.0;
  long sweeps = 0;
};

// Minimizes for each lambda in increasing order, warm-starting from the
// nodewise max of the previous minimizer and the new barrier field.
std::vector<LambdaSweepPoint> lambda_sweep(const EnergySpec& base,
                                           const std::vector<double>& lambdas,
                                           const MinimizeOptions& options = {},
                                           std::vector<MinimizeResult>* results = nullptr);

// Fraction of positive nodes in the radius-8h ball around each boundary
// segment midpoint (free-boundary density diagnostic; reported, not asserted).
std::vector<double> positivity_density(const MinimizeResult& result);

}  // namespace quadforge
