#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ifsm/errors.hpp"
#include "ifsm/rational.hpp"

namespace ifsm {

/// Position of a map inside the dyadic wavelet family
/// w*_{ij}(x) = (x + j - 1) / 2^i, enumerated row-major over levels:
/// w1 = w*_{1,1}, w2 = w*_{1,2}, w3 = w*_{2,1}, ...
struct WaveletMapIndex {
  int level = 0;     // i >= 1
  int position = 0;  // 1 <= j <= 2^i
  std::int64_t linear_index() const { return (std::int64_t{1} << level) - 2 + position; }
};

/// Affine contraction w(x) = s*x + a on [0,1] with 0 < |s| < 1 and
/// w([0,1]) inside [0,1]. Endpoints are kept as exact rationals so interval
/// intersection and grid-alignment tests have no floating-point boundary
/// cases; evaluation converts to double.
class AffineMap {
 public:
  AffineMap(const Rational& s, const Rational& a);
  AffineMap(double s, double a) : AffineMap(Rational::from_double(s), Rational::from_double(a)) {}

  /// The wavelet-type map w*_{level,position}, scale 2^-level.
  static AffineMap wavelet(int level, int position);

  double scale() const { return scale_; }
  double offset() const { return offset_; }
  const Rational& scale_rational() const { return s_; }
  const Rational& offset_rational() const { return a_; }

  /// Contraction factor c = |s|.
  double contraction_factor() const { return scale_ < 0 ? -scale_ : scale_; }

  double operator()(double x) const { return scale_ * x + offset_; }
  double inverse(double y) const { return (y - offset_) / scale_; }

  /// Image interval endpoints, lo <= hi.
  const Rational& image_lo() const { return lo_; }
  const Rational& image_hi() const { return hi_; }
  double image_length() const { return (hi_ - lo_).to_double(); }

  /// Membership of grid point t_j = j/n. The image is half-open [lo, hi)
  /// so that same-level wavelet images partition the grid cells; a map whose
  /// image reaches the right edge additionally owns t = 1.
  bool contains_grid_point(std::int64_t j, std::int64_t n) const;

  /// In-image grid points are first_point() .. last_cell()-1 plus, when
  /// owns_right_edge(), the point j = n. Cells used by quadrature are
  /// first_point() .. last_cell()-1.
  std::int64_t first_point(std::int64_t n) const { return (lo_ * Rational(n)).ceil(); }
  std::int64_t last_cell(std::int64_t n) const { return (hi_ * Rational(n)).ceil(); }
  bool owns_right_edge() const { return hi_ == Rational(1); }

  /// Exact grid index k with w^{-1}(j/n) = k/n. Throws MisalignmentError if
  /// the inverse lands off the grid or outside [0,1].
  std::int64_t inverse_grid_index(std::int64_t j, std::int64_t n) const;

  /// The image endpoints must themselves be grid points, otherwise quadrature
  /// over grid cells cannot represent the image measure (for a level-i
  /// wavelet map this is exactly the requirement n >= 2^i).
  void require_grid_aligned(std::int64_t n) const;

  /// Set for maps created through wavelet(); used when a system is written
  /// out, since the dyadic family round-trips through {level, position}.
  const std::optional<WaveletMapIndex>& wavelet_index() const { return wavelet_index_; }

 private:
  Rational s_, a_, lo_, hi_;
  double scale_, offset_;
  std::optional<WaveletMapIndex> wavelet_index_;
};

/// All wavelet maps for levels 1..max_level in linear-index order;
/// size 2^(max_level+1) - 2.
std::vector<AffineMap> wavelet_family(int max_level);

struct OverlapReport {
  bool nonoverlapping = true;  // all pairwise image intersections have zero length
  bool tiling = false;         // union of images covers [0,1]
};

/// Exact interval arithmetic on the image endpoints.
OverlapReport analyze_overlap(const std::vector<AffineMap>& maps);

inline bool is_nonoverlapping(const std::vector<AffineMap>& maps) {
  return analyze_overlap(maps).nonoverlapping;
}

/// Length of w_i([0,1]) ∩ w_j([0,1]), computed exactly from the endpoints.
double image_intersection_length(const AffineMap& wi, const AffineMap& wj);

}  // namespace ifsm
