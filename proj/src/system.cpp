#include "ifsm/system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ifsm {

IfsmSystem::IfsmSystem(std::vector<AffineMap> maps, std::vector<GreyMap> greys)
    : maps_(std::move(maps)), greys_(std::move(greys)) {
  if (maps_.empty()) throw std::invalid_argument("IfsmSystem: need at least one map");
  if (maps_.size() != greys_.size())
    throw std::invalid_argument("IfsmSystem: map/grey-map count mismatch");
  for (const GreyMap& g : greys_)
    if (!std::isfinite(g.alpha) || !std::isfinite(g.beta))
      throw std::invalid_argument("IfsmSystem: non-finite grey-map parameter");
}

IfsmSystem IfsmSystem::from_parameters(const std::vector<AffineMap>& maps,
                                       std::span<const double> packed) {
  const std::size_t n = maps.size();
  if (packed.size() != 2 * n)
    throw std::invalid_argument("IfsmSystem: parameter vector must have length 2N");
  std::vector<GreyMap> greys(n);
  for (std::size_t k = 0; k < n; ++k) greys[k] = GreyMap{packed[k], packed[n + k]};
  return IfsmSystem(maps, std::move(greys));
}

SampledPath apply_operator(const IfsmSystem& sys, const SampledPath& u) {
  const std::int64_t n = u.cells();
  std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::size_t k = 0; k < sys.size(); ++k) {
    const AffineMap& w = sys.map(k);
    const GreyMap& g = sys.grey(k);
    w.require_grid_aligned(n);
    const std::int64_t begin = w.first_point(n);
    const std::int64_t end = w.last_cell(n);
    if (end <= begin)
      throw MisalignmentError("grid with n=" + std::to_string(n) +
                              " cells is too coarse for map image");
    for (std::int64_t j = begin; j < end; ++j)
      out[j] += g.alpha * u[w.inverse_grid_index(j, n)] + g.beta;
    if (w.owns_right_edge()) out[n] += g.alpha * u[w.inverse_grid_index(n, n)] + g.beta;
  }
  return SampledPath(std::move(out));
}

double contractivity_factor(const IfsmSystem& sys) {
  double c = 0.0;
  for (std::size_t k = 0; k < sys.size(); ++k)
    c += std::sqrt(sys.map(k).contraction_factor()) * std::abs(sys.grey(k).alpha);
  return c;
}

FixedPointResult fixed_point(const IfsmSystem& sys, const SampledPath& u0, double tol,
                             std::int64_t max_iter) {
  const double factor = contractivity_factor(sys);
  if (factor >= 1.0)
    throw NotContractiveError("fixed_point: contractivity factor " + std::to_string(factor) +
                              " >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("fixed_point: tol must be positive");

  FixedPointResult result{u0, 0, false, 0.0, {}};
  for (std::int64_t m = 0; m < max_iter; ++m) {
    SampledPath next = apply_operator(sys, result.path);
    double sup = 0.0;
    for (std::int64_t j = 0; j <= result.path.cells(); ++j)
      sup = std::max(sup, std::abs(next[j] - result.path[j]));
    result.last_distance = l2_distance(next, result.path);
    result.distances.push_back(result.last_distance);
    result.path = std::move(next);
    result.iterations = m + 1;
    if (sup <= tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

double collage_bound(const SampledPath& v, const IfsmSystem& sys) {
  const double factor = contractivity_factor(sys);
  if (factor >= 1.0)
    throw NotContractiveError("collage_bound: contractivity factor >= 1");
  return l2_distance(v, apply_operator(sys, v)) / (1.0 - factor);
}

double fixed_point_continuity_bound(const IfsmSystem& sys1, const IfsmSystem& sys2,
                                    std::span<const SampledPath> probes) {
  const double c1 = contractivity_factor(sys1);
  if (c1 >= 1.0)
    throw NotContractiveError("fixed_point_continuity_bound: first system not contractive");
  if (contractivity_factor(sys2) >= 1.0)
    throw NotContractiveError("fixed_point_continuity_bound: second system not contractive");
  if (probes.empty())
    throw std::invalid_argument("fixed_point_continuity_bound: empty probe set");
  double sup = 0.0;
  for (const SampledPath& u : probes)
    sup = std::max(sup, l2_distance(apply_operator(sys1, u), apply_operator(sys2, u)));
  return sup / (1.0 - c1);
}

}  // namespace ifsm
