#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "ifsm/collage.hpp"

namespace ifsm {

/// Optional convex cap sum_k weights_k * |alpha_k| <= cap on the alpha block;
/// with weights sqrt(c_k) this bounds the contractivity factor of the solved
/// system, so the downstream fixed-point iteration is guaranteed valid.
struct ContractivityCap {
  Eigen::VectorXd weights;  // length N, nonnegative
  double cap = 0.999;
};

/// Box bounds plus the collage feasibility constraint g.x <= h, plus the
/// optional contractivity cap. The default region is the [-5,5] box, which
/// keeps the feasible set compact as the theory requires.
struct FeasibleRegion {
  Eigen::VectorXd lo, hi;  // per-coordinate bounds, length 2N
  Eigen::VectorXd g;
  double h = 0.0;
  std::optional<ContractivityCap> cap;

  static FeasibleRegion for_qp(const CollageQp& qp, double box_halfwidth = 5.0);
  static FeasibleRegion for_qp_with_cap(const CollageQp& qp, double cap_value = 0.999,
                                        double box_halfwidth = 5.0);

  bool contains(const Eigen::VectorXd& x, double tol) const;

  /// Euclidean projection onto the region (exact; Dykstra when both the
  /// halfspace and the cap are present).
  Eigen::VectorXd project(const Eigen::VectorXd& z) const;
};

struct SolveOptions {
  double kkt_tol = 1e-8;
  std::int64_t max_iter = 10000;
  /// Tie-break ridge added to the Hessian inside the solver only; picks the
  /// minimal-Euclidean-norm point when the form is degenerate. Reported
  /// objectives always come from the unmodified form.
  double ridge = 1e-12;
};

struct SolveReport {
  Eigen::VectorXd x_star;                  // (alpha_1..alpha_N, beta_1..beta_N)
  double delta2 = 0.0;                     // evaluate_form(qp, x_star), recomputed
  double contractivity = 0.0;              // sum_k sqrt(c_k) |alpha_k|
  std::int64_t iterations = 0;
  bool converged = false;
  std::vector<int> active_constraints;     // 0..2N-1 box, 2N halfspace, 2N+1 cap
  std::vector<double> objective_history;   // nonincreasing accepted objectives
};

/// Convex QP minimization over the region: projected gradient with exact line
/// search, interleaved with active-set refinement steps that solve the
/// equality-constrained problem on the current face directly. Terminates when
/// the projected-gradient residual drops below kkt_tol; since the form is a
/// squared norm (positive semidefinite), any such point is a global minimizer.
SolveReport solve(const CollageQp& qp, const FeasibleRegion& region,
                  const SolveOptions& opts = {});

/// Fast path for nonoverlapping assemblies: the problem splits into N
/// independent 2x2 QPs coupled only through the shared linear constraint,
/// which is handled by a one-dimensional search over its dual multiplier.
/// Does not support the contractivity cap; use solve() for that.
SolveReport solve_separable(const CollageQp& qp, const FeasibleRegion& region,
                            const SolveOptions& opts = {});

}  // namespace ifsm
