#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "ifsm/path.hpp"
#include "ifsm/system.hpp"

namespace ifsm {

/// The collage distance ||v - Tv||^2 as a quadratic form
///   Delta^2(x) = x^T A x + b^T x + c
/// in the packed grey parameters x = (alpha_1..alpha_N, beta_1..beta_N),
/// together with the feasibility constraint
///   sum_k c_k (alpha_k ||v||_1 + beta_k) <= ||v||_1,  written as g.x <= h.
struct CollageQp {
  Eigen::MatrixXd A;            // 2N x 2N symmetric Gram matrix
  Eigen::VectorXd b;            // length 2N
  double c = 0.0;               // ||v||_2^2
  Eigen::VectorXd g;            // constraint coefficients, length 2N
  double h = 0.0;               // constraint bound, ||v||_1
  Eigen::VectorXd map_factors;  // contraction factors c_k, length N

  Eigen::Index n_maps() const { return map_factors.size(); }
};

/// General assembler: every entry is the left-Riemann sum over the masked
/// image intersections, so overlapping maps are allowed. Blocks:
/// A = [<psi_i,psi_j>  <psi_i,xi_j>; .  <xi_i,xi_j>],
/// b = (-2<v,psi_i>, -2<v,xi_i>), with psi_i the pullback of v by w_i and
/// xi_i the image indicator.
CollageQp assemble_collage_qp(const SampledPath& v, const std::vector<AffineMap>& maps);

/// Nonoverlapping fast path, O(N + n): all cross entries are exactly zero and
/// the diagonal couplings reduce to per-map moments of v. Each moment is
/// evaluated on the subgrid the map's pullback actually reads, so the result
/// agrees entrywise with assemble_collage_qp to rounding error.
/// Throws OverlapError when the images overlap.
CollageQp assemble_collage_qp_nonoverlapping(const SampledPath& v,
                                             const std::vector<AffineMap>& maps);

/// Direct evaluation ||v - Tv||^2, bypassing the quadratic form.
double collage_distance(const SampledPath& v, const IfsmSystem& sys);

/// x^T A x + b^T x + c.
double evaluate_form(const CollageQp& qp, const Eigen::VectorXd& x);

/// Plain-text dump (matrix-market style coordinate listing) for debugging;
/// not a stability contract.
void dump_qp(const CollageQp& qp, std::ostream& os);

}  // namespace ifsm
