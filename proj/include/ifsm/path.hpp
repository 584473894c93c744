#pragma once

#include <concepts>
#include <cstdint>
#include <vector>

#include "ifsm/errors.hpp"
#include "ifsm/maps.hpp"

namespace ifsm {

/// A real function on [0,1] sampled at t_j = j/n on a uniform dyadic grid.
/// n must be a power of two (>= 2) so wavelet-map inverses land exactly on
/// grid points. Immutable after construction.
class SampledPath {
 public:
  explicit SampledPath(std::vector<double> values);

  static SampledPath zeros(std::int64_t n);

  template <std::invocable<double> F>
  static SampledPath from_function(std::int64_t n, F&& f) {
    std::vector<double> v(static_cast<std::size_t>(n) + 1);
    for (std::int64_t j = 0; j <= n; ++j) v[j] = f(static_cast<double>(j) / n);
    return SampledPath(std::move(v));
  }

  std::int64_t cells() const { return n_; }
  std::size_t size() const { return values_.size(); }  // n + 1
  double operator[](std::int64_t j) const { return values_[static_cast<std::size_t>(j)]; }
  const std::vector<double>& values() const { return values_; }
  double t(std::int64_t j) const { return static_cast<double>(j) / n_; }

 private:
  std::vector<double> values_;
  std::int64_t n_;
};

/// Left-Riemann inner product (1/n) * sum_{j<n} p_j q_j. On dyadic intervals
/// this agrees exactly with the analytic measure of indicator products, which
/// is what makes the half-open image convention consistent everywhere.
double inner_product(const SampledPath& p, const SampledPath& q);

/// Left-Riemann integral of |p|.
double l1_norm(const SampledPath& p);

double l2_norm(const SampledPath& p);
double l2_distance(const SampledPath& p, const SampledPath& q);

/// Trapezoid-rule inner product. Not used by the collage machinery; provided
/// for basis diagnostics where the trapezoid rule integrates the product
/// cosines exactly on dyadic grids.
double trapezoid_inner_product(const SampledPath& p, const SampledPath& q);

/// p composed with w^{-1}, defined on the grid points inside w([0,1]) and
/// masked (zero) elsewhere; masked points contribute nothing to integrals.
struct Pullback {
  std::vector<double> values;      // size n+1, zero where mask is 0
  std::vector<std::uint8_t> mask;  // size n+1
  std::int64_t cell_begin = 0;     // in-image cells are [cell_begin, cell_end)
  std::int64_t cell_end = 0;
};

Pullback pullback(const SampledPath& p, const AffineMap& w);

}  // namespace ifsm
