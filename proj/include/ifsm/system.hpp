#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ifsm/maps.hpp"
#include "ifsm/path.hpp"

namespace ifsm {

/// Affine grey-level map phi(t) = alpha * t + beta; Lipschitz constant |alpha|.
struct GreyMap {
  double alpha = 0.0;
  double beta = 0.0;
};

/// An N-map system pairing each spatial contraction with its grey-level map.
/// Induces the operator (Tu)(x) = sum' phi_k(u(w_k^{-1}(x))), where the primed
/// sum runs over the maps whose image contains x; points covered by no image
/// get 0 (the empty sum).
class IfsmSystem {
 public:
  IfsmSystem(std::vector<AffineMap> maps, std::vector<GreyMap> greys);

  /// Convenience: grey parameters packed as (alpha_1..alpha_N, beta_1..beta_N).
  static IfsmSystem from_parameters(const std::vector<AffineMap>& maps,
                                    std::span<const double> packed);

  std::size_t size() const { return maps_.size(); }
  const std::vector<AffineMap>& maps() const { return maps_; }
  const std::vector<GreyMap>& greys() const { return greys_; }
  const AffineMap& map(std::size_t k) const { return maps_[k]; }
  const GreyMap& grey(std::size_t k) const { return greys_[k]; }

 private:
  std::vector<AffineMap> maps_;
  std::vector<GreyMap> greys_;
};

SampledPath apply_operator(const IfsmSystem& sys, const SampledPath& u);

/// C = sum_k |s_k|^(1/2) |alpha_k|; T is an L2 contraction when C < 1.
double contractivity_factor(const IfsmSystem& sys);

struct FixedPointResult {
  SampledPath path;
  std::int64_t iterations = 0;
  bool converged = false;
  double last_distance = 0.0;        // l2 distance of final iterate pair
  std::vector<double> distances;     // l2 distance per iteration
};

/// Banach iteration u <- T(u) from u0. Stops once successive iterates agree
/// within tol at every grid point (which implies l2 distance <= tol); by the
/// a-posteriori Banach estimate the result is within tol*C/(1-C) of the fixed
/// point. Throws NotContractiveError when C >= 1; reports converged = false
/// with the last distance when max_iter is exhausted.
FixedPointResult fixed_point(const IfsmSystem& sys, const SampledPath& u0,
                             double tol = 1e-10, std::int64_t max_iter = 200);

inline FixedPointResult fixed_point(const IfsmSystem& sys, std::int64_t n,
                                    double tol = 1e-10, std::int64_t max_iter = 200) {
  return fixed_point(sys, SampledPath::zeros(n), tol, max_iter);
}

/// ||v - Tv|| / (1 - C): upper bound on the distance from v to the system's
/// fixed point.
double collage_bound(const SampledPath& v, const IfsmSystem& sys);

/// Bound on the distance between the two fixed points,
/// sup_u d(T1 u, T2 u) / (1 - C1), with the sup estimated over the supplied
/// probe set. A lower estimate of the true sup-based bound.
double fixed_point_continuity_bound(const IfsmSystem& sys1, const IfsmSystem& sys2,
                                    std::span<const SampledPath> probes);

}  // namespace ifsm
