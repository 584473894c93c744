#include "ifsm/maps.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ifsm {

AffineMap::AffineMap(const Rational& s, const Rational& a) : s_(s), a_(a) {
  const Rational zero(0), one(1);
  if (s == zero) throw std::invalid_argument("AffineMap: scale must be nonzero");
  const Rational abs_s = s < zero ? -s : s;
  if (!(abs_s < one)) throw std::invalid_argument("AffineMap: |scale| must be < 1");
  lo_ = min(a, a + s);
  hi_ = max(a, a + s);
  if (lo_ < zero || hi_ > one)
    throw std::invalid_argument("AffineMap: image must lie inside [0,1]");
  scale_ = s_.to_double();
  offset_ = a_.to_double();
}

AffineMap AffineMap::wavelet(int level, int position) {
  if (level < 1 || level > 60)
    throw std::invalid_argument("wavelet map: level must be in [1,60]");
  const std::int64_t count = std::int64_t{1} << level;
  if (position < 1 || position > count)
    throw std::invalid_argument("wavelet map: position must be in [1, 2^level]");
  AffineMap w(Rational(1, count), Rational(position - 1, count));
  w.wavelet_index_ = WaveletMapIndex{level, position};
  return w;
}

bool AffineMap::contains_grid_point(std::int64_t j, std::int64_t n) const {
  const Rational t(j, n);
  if (j == n && owns_right_edge()) return true;
  return lo_ <= t && t < hi_;
}

std::int64_t AffineMap::inverse_grid_index(std::int64_t j, std::int64_t n) const {
  const Rational x = (Rational(j, n) - a_) / s_;
  const Rational k = x * Rational(n);
  if (!k.is_integer())
    throw MisalignmentError("map inverse of grid point " + std::to_string(j) + "/" +
                            std::to_string(n) + " is off the grid");
  const std::int64_t idx = k.num();
  if (idx < 0 || idx > n)
    throw MisalignmentError("map inverse of grid point lands outside [0,1]");
  return idx;
}

void AffineMap::require_grid_aligned(std::int64_t n) const {
  if (!(lo_ * Rational(n)).is_integer() || !(hi_ * Rational(n)).is_integer())
    throw MisalignmentError("map image endpoints are not grid points at n=" + std::to_string(n));
}

std::vector<AffineMap> wavelet_family(int max_level) {
  if (max_level < 1) throw std::invalid_argument("wavelet_family: max_level must be >= 1");
  std::vector<AffineMap> maps;
  maps.reserve((std::size_t{2} << max_level) - 2);
  for (int level = 1; level <= max_level; ++level)
    for (int position = 1; position <= (1 << level); ++position)
      maps.push_back(AffineMap::wavelet(level, position));
  return maps;
}

OverlapReport analyze_overlap(const std::vector<AffineMap>& maps) {
  OverlapReport report;
  const Rational zero(0), one(1);
  for (std::size_t i = 0; i < maps.size() && report.nonoverlapping; ++i) {
    for (std::size_t j = i + 1; j < maps.size(); ++j) {
      const Rational lo = max(maps[i].image_lo(), maps[j].image_lo());
      const Rational hi = min(maps[i].image_hi(), maps[j].image_hi());
      if (lo < hi) {
        report.nonoverlapping = false;
        break;
      }
    }
  }
  if (maps.empty()) {
    report.tiling = false;
    return report;
  }
  // Merge image intervals and check the union is all of [0,1].
  std::vector<std::pair<Rational, Rational>> spans;
  spans.reserve(maps.size());
  for (const auto& w : maps) spans.emplace_back(w.image_lo(), w.image_hi());
  std::sort(spans.begin(), spans.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  Rational covered_to = zero;
  for (const auto& [lo, hi] : spans) {
    if (lo > covered_to) break;  // gap
    covered_to = max(covered_to, hi);
  }
  report.tiling = (covered_to >= one);
  return report;
}

double image_intersection_length(const AffineMap& wi, const AffineMap& wj) {
  const Rational lo = max(wi.image_lo(), wj.image_lo());
  const Rational hi = min(wi.image_hi(), wj.image_hi());
  return lo < hi ? (hi - lo).to_double() : 0.0;
}

}  // namespace ifsm
