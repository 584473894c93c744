#include "ifsm/generators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ifsm {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

GaussianStream::GaussianStream(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& word : state_) word = splitmix64(sm);
}

std::uint64_t GaussianStream::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double GaussianStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double GaussianStream::next_normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u, v, r;
  do {
    u = 2.0 * next_uniform() - 1.0;
    v = 2.0 * next_uniform() - 1.0;
    r = u * u + v * v;
  } while (r >= 1.0 || r == 0.0);
  const double f = std::sqrt(-2.0 * std::log(r) / r);
  cached_ = v * f;
  has_cached_ = true;
  return u * f;
}

SampledPath euler_bm(std::int64_t n_steps, std::int64_t grid_n, GaussianStream& stream) {
  if (n_steps < 1) throw std::invalid_argument("euler_bm: need at least one step");
  if (grid_n < n_steps)
    throw std::invalid_argument("euler_bm: grid must be at least as fine as the knots");
  const double sqrt_dt = std::sqrt(1.0 / static_cast<double>(n_steps));
  std::vector<double> knots(static_cast<std::size_t>(n_steps) + 1, 0.0);
  for (std::int64_t i = 0; i < n_steps; ++i)
    knots[i + 1] = knots[i] + sqrt_dt * stream.next_normal();

  std::vector<double> values(static_cast<std::size_t>(grid_n) + 1);
  for (std::int64_t j = 0; j <= grid_n; ++j) {
    const std::int64_t num = j * n_steps;  // knot position = num / grid_n
    const std::int64_t i = num / grid_n;
    const std::int64_t rem = num % grid_n;
    if (rem == 0) {
      values[j] = knots[i];
    } else {
      const double frac = static_cast<double>(rem) / static_cast<double>(grid_n);
      values[j] = knots[i] + frac * (knots[i + 1] - knots[i]);
    }
  }
  return SampledPath(std::move(values));
}

SampledPath kac_siegert_bm(std::int64_t m_terms, std::int64_t grid_n, GaussianStream& stream) {
  if (m_terms < 1) throw std::invalid_argument("kac_siegert_bm: need at least one term");
  std::vector<double> values(static_cast<std::size_t>(grid_n) + 1, 0.0);
  constexpr double pi = std::numbers::pi;
  for (std::int64_t i = 0; i < m_terms; ++i) {
    const double z = stream.next_normal();
    const double freq = (2.0 * static_cast<double>(i) + 1.0) * pi / 2.0;
    const double amp = z * 2.0 * std::numbers::sqrt2 / ((2.0 * static_cast<double>(i) + 1.0) * pi);
    for (std::int64_t j = 1; j <= grid_n; ++j)
      values[j] += amp * std::sin(freq * static_cast<double>(j) / static_cast<double>(grid_n));
  }
  values[0] = 0.0;  // sin(0) exactly
  return SampledPath(std::move(values));
}

SampledPath KacSiegertBasis::function(std::int64_t i) const {
  std::vector<double> values(static_cast<std::size_t>(grid_n) + 1);
  for (std::int64_t j = 0; j <= grid_n; ++j) values[j] = phi(i, j);
  return SampledPath(std::move(values));
}

KacSiegertBasis kac_siegert_basis(std::int64_t m_terms, std::int64_t grid_n) {
  if (m_terms < 1) throw std::invalid_argument("kac_siegert_basis: need at least one term");
  KacSiegertBasis basis;
  basis.m = m_terms;
  basis.grid_n = grid_n;
  basis.phi.resize(m_terms, grid_n + 1);
  constexpr double pi = std::numbers::pi;
  for (std::int64_t i = 0; i < m_terms; ++i) {
    const double freq = (2.0 * static_cast<double>(i) + 1.0) * pi / 2.0;
    const double amp = 2.0 * std::numbers::sqrt2 / ((2.0 * static_cast<double>(i) + 1.0) * pi);
    for (std::int64_t j = 0; j <= grid_n; ++j)
      basis.phi(i, j) = amp * std::sin(freq * static_cast<double>(j) / static_cast<double>(grid_n));
  }
  return basis;
}

Eigen::MatrixXd basis_gram(const KacSiegertBasis& basis) {
  const std::int64_t n = basis.grid_n;
  Eigen::MatrixXd gram(basis.m, basis.m);
  for (std::int64_t i = 0; i < basis.m; ++i)
    for (std::int64_t j = i; j < basis.m; ++j) {
      double acc = 0.5 * (basis.phi(i, 0) * basis.phi(j, 0) + basis.phi(i, n) * basis.phi(j, n));
      for (std::int64_t t = 1; t < n; ++t) acc += basis.phi(i, t) * basis.phi(j, t);
      gram(i, j) = gram(j, i) = acc / static_cast<double>(n);
    }
  return gram;
}

double kac_siegert_variance_at_one(std::int64_t m_terms) {
  double acc = 0.0;
  for (std::int64_t i = 0; i < m_terms; ++i) {
    const double odd = 2.0 * static_cast<double>(i) + 1.0;
    acc += 1.0 / (odd * odd);
  }
  return 8.0 / (std::numbers::pi * std::numbers::pi) * acc;
}

}  // namespace ifsm
