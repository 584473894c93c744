#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string_view>

#include "ifsm/path.hpp"

namespace ifsm {

/// Deterministic stream of standard normal variates. The generator is
/// xoshiro256++ seeded through splitmix64; normals come from the Marsaglia
/// polar method. Same seed, same sequence — the stability contract that
/// makes every run replayable, recorded in algorithm_tag().
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed);

  static constexpr std::string_view algorithm_tag() {
    return "xoshiro256++/splitmix64/polar";
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double next_uniform();
  /// Standard normal variate.
  double next_normal();

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Euler scheme: B(0) = 0, B(t_{i+1}) = B(t_i) + sqrt(dt) Z_i on n_steps
/// equal knots, linearly interpolated to the n-cell grid. Knots that fall on
/// grid points carry the exact recursion values.
SampledPath euler_bm(std::int64_t n_steps, std::int64_t grid_n, GaussianStream& stream);

/// Truncated Kac-Siegert series B(t) = sum_{i<m} Z_i phi_i(t) with
/// phi_i(t) = (2*sqrt(2)/((2i+1)*pi)) * sin((2i+1)*pi*t/2).
SampledPath kac_siegert_bm(std::int64_t m_terms, std::int64_t grid_n, GaussianStream& stream);

/// The first m basis functions evaluated on the grid (row i = phi_i).
struct KacSiegertBasis {
  std::int64_t m = 0;
  std::int64_t grid_n = 0;
  Eigen::MatrixXd phi;  // m x (grid_n + 1)

  SampledPath function(std::int64_t i) const;
};

KacSiegertBasis kac_siegert_basis(std::int64_t m_terms, std::int64_t grid_n);

/// Gram matrix <phi_i, phi_j> by the trapezoid rule, which integrates the
/// product cosines exactly on dyadic grids; off-diagonals should vanish to
/// rounding error since the basis is orthogonal.
Eigen::MatrixXd basis_gram(const KacSiegertBasis& basis);

/// Truncated variance of B(1): (8/pi^2) * sum_{i<m} (2i+1)^{-2}; tends to 1.
double kac_siegert_variance_at_one(std::int64_t m_terms);

}  // namespace ifsm
