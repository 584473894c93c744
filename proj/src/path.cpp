#include "ifsm/path.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ifsm {

namespace {

bool power_of_two(std::int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

void require_same_grid(const SampledPath& p, const SampledPath& q) {
  if (p.cells() != q.cells())
    throw GridMismatchError("paths sampled on different grids: n=" +
                            std::to_string(p.cells()) + " vs n=" + std::to_string(q.cells()));
}

}  // namespace

SampledPath::SampledPath(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 3)
    throw std::invalid_argument("SampledPath: need at least n=2 cells (3 samples)");
  n_ = static_cast<std::int64_t>(values_.size()) - 1;
  if (!power_of_two(n_))
    throw std::invalid_argument("SampledPath: cell count must be a power of two");
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument("SampledPath: non-finite value");
}

SampledPath SampledPath::zeros(std::int64_t n) {
  return SampledPath(std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
}

double inner_product(const SampledPath& p, const SampledPath& q) {
  require_same_grid(p, q);
  const std::int64_t n = p.cells();
  double acc = 0.0;
  for (std::int64_t j = 0; j < n; ++j) acc += p[j] * q[j];
  return acc / static_cast<double>(n);
}

double l1_norm(const SampledPath& p) {
  const std::int64_t n = p.cells();
  double acc = 0.0;
  for (std::int64_t j = 0; j < n; ++j) acc += std::abs(p[j]);
  return acc / static_cast<double>(n);
}

double l2_norm(const SampledPath& p) { return std::sqrt(inner_product(p, p)); }

double l2_distance(const SampledPath& p, const SampledPath& q) {
  require_same_grid(p, q);
  const std::int64_t n = p.cells();
  double acc = 0.0;
  for (std::int64_t j = 0; j < n; ++j) {
    const double d = p[j] - q[j];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double trapezoid_inner_product(const SampledPath& p, const SampledPath& q) {
  require_same_grid(p, q);
  const std::int64_t n = p.cells();
  double acc = 0.5 * (p[0] * q[0] + p[n] * q[n]);
  for (std::int64_t j = 1; j < n; ++j) acc += p[j] * q[j];
  return acc / static_cast<double>(n);
}

Pullback pullback(const SampledPath& p, const AffineMap& w) {
  const std::int64_t n = p.cells();
  w.require_grid_aligned(n);
  Pullback out;
  out.values.assign(static_cast<std::size_t>(n) + 1, 0.0);
  out.mask.assign(static_cast<std::size_t>(n) + 1, 0);
  out.cell_begin = w.first_point(n);
  out.cell_end = w.last_cell(n);
  if (out.cell_end <= out.cell_begin)
    throw MisalignmentError("grid with n=" + std::to_string(n) +
                            " cells is too coarse for map image");
  for (std::int64_t j = out.cell_begin; j < out.cell_end; ++j) {
    const std::int64_t k = w.inverse_grid_index(j, n);
    out.values[j] = p[k];
    out.mask[j] = 1;
  }
  if (w.owns_right_edge()) {
    const std::int64_t k = w.inverse_grid_index(n, n);
    out.values[n] = p[k];
    out.mask[n] = 1;
  }
  return out;
}

}  // namespace ifsm
