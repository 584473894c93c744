#include "ifsm/collage.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace ifsm {

namespace {

void fill_constraint(CollageQp& qp, const SampledPath& v, const std::vector<AffineMap>& maps) {
  const auto N = static_cast<Eigen::Index>(maps.size());
  const double L1 = l1_norm(v);
  qp.map_factors.resize(N);
  qp.g.resize(2 * N);
  for (Eigen::Index k = 0; k < N; ++k) {
    const double ck = maps[k].contraction_factor();
    qp.map_factors[k] = ck;
    qp.g[k] = ck * L1;
    qp.g[N + k] = ck;
  }
  qp.h = L1;
}

}  // namespace

CollageQp assemble_collage_qp(const SampledPath& v, const std::vector<AffineMap>& maps) {
  if (maps.empty()) throw std::invalid_argument("assemble_collage_qp: empty map list");
  const auto N = static_cast<Eigen::Index>(maps.size());
  const std::int64_t n = v.cells();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<Pullback> pb;
  pb.reserve(maps.size());
  for (const AffineMap& w : maps) pb.push_back(pullback(v, w));

  CollageQp qp;
  qp.A = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  qp.b = Eigen::VectorXd::Zero(2 * N);

  for (Eigen::Index i = 0; i < N; ++i) {
    // <psi_i, psi_j>, symmetric.
    for (Eigen::Index j = i; j < N; ++j) {
      const std::int64_t lo = std::max(pb[i].cell_begin, pb[j].cell_begin);
      const std::int64_t hi = std::min(pb[i].cell_end, pb[j].cell_end);
      if (lo >= hi) continue;
      double acc = 0.0;
      for (std::int64_t t = lo; t < hi; ++t) acc += pb[i].values[t] * pb[j].values[t];
      qp.A(i, j) = qp.A(j, i) = acc * inv_n;
    }
    // <psi_i, xi_j> for every j (not symmetric in i, j).
    for (Eigen::Index j = 0; j < N; ++j) {
      const std::int64_t lo = std::max(pb[i].cell_begin, pb[j].cell_begin);
      const std::int64_t hi = std::min(pb[i].cell_end, pb[j].cell_end);
      if (lo >= hi) continue;
      double acc = 0.0;
      for (std::int64_t t = lo; t < hi; ++t) acc += pb[i].values[t];
      qp.A(i, N + j) = qp.A(N + j, i) = acc * inv_n;
    }
    // <xi_i, xi_j>: number of shared cells.
    for (Eigen::Index j = i; j < N; ++j) {
      const std::int64_t lo = std::max(pb[i].cell_begin, pb[j].cell_begin);
      const std::int64_t hi = std::min(pb[i].cell_end, pb[j].cell_end);
      if (lo >= hi) continue;
      qp.A(N + i, N + j) = qp.A(N + j, N + i) = static_cast<double>(hi - lo) * inv_n;
    }
    double dot_v_psi = 0.0;
    double int_v = 0.0;
    for (std::int64_t t = pb[i].cell_begin; t < pb[i].cell_end; ++t) {
      dot_v_psi += v[t] * pb[i].values[t];
      int_v += v[t];
    }
    qp.b[i] = -2.0 * dot_v_psi * inv_n;
    qp.b[N + i] = -2.0 * int_v * inv_n;
  }

  qp.c = inner_product(v, v);
  fill_constraint(qp, v, maps);
  return qp;
}

CollageQp assemble_collage_qp_nonoverlapping(const SampledPath& v,
                                             const std::vector<AffineMap>& maps) {
  if (maps.empty())
    throw std::invalid_argument("assemble_collage_qp_nonoverlapping: empty map list");
  if (!is_nonoverlapping(maps))
    throw OverlapError("assemble_collage_qp_nonoverlapping: map images overlap");
  const auto N = static_cast<Eigen::Index>(maps.size());
  const std::int64_t n = v.cells();
  const double inv_n = 1.0 / static_cast<double>(n);

  CollageQp qp;
  qp.A = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  qp.b = Eigen::VectorXd::Zero(2 * N);

  for (Eigen::Index i = 0; i < N; ++i) {
    const AffineMap& w = maps[i];
    w.require_grid_aligned(n);
    const std::int64_t begin = w.first_point(n);
    const std::int64_t end = w.last_cell(n);
    if (end <= begin)
      throw MisalignmentError("grid too coarse for map image");
    // Moments of v over the source subgrid read by this map's pullback.
    double m2 = 0.0, m1 = 0.0, dot_v_psi = 0.0, int_v = 0.0;
    for (std::int64_t t = begin; t < end; ++t) {
      const double src = v[w.inverse_grid_index(t, n)];
      m2 += src * src;
      m1 += src;
      dot_v_psi += v[t] * src;
      int_v += v[t];
    }
    qp.A(i, i) = m2 * inv_n;                                    // c_i * int v^2
    qp.A(N + i, N + i) = static_cast<double>(end - begin) * inv_n;  // mu(w_i(H))
    qp.A(i, N + i) = qp.A(N + i, i) = m1 * inv_n;               // c_i * int v
    qp.b[i] = -2.0 * dot_v_psi * inv_n;
    qp.b[N + i] = -2.0 * int_v * inv_n;
  }

  qp.c = inner_product(v, v);
  fill_constraint(qp, v, maps);
  return qp;
}

double collage_distance(const SampledPath& v, const IfsmSystem& sys) {
  const double d = l2_distance(v, apply_operator(sys, v));
  return d * d;
}

double evaluate_form(const CollageQp& qp, const Eigen::VectorXd& x) {
  if (x.size() != qp.A.rows())
    throw std::invalid_argument("evaluate_form: parameter vector must have length 2N");
  return x.dot(qp.A * x) + qp.b.dot(x) + qp.c;
}

void dump_qp(const CollageQp& qp, std::ostream& os) {
  const Eigen::Index dim = qp.A.rows();
  os << "%%collage-qp dim " << dim << " maps " << qp.n_maps() << "\n";
  os << "%%A coordinate upper-triangle (row col value)\n";
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = i; j < dim; ++j)
      if (qp.A(i, j) != 0.0) os << i + 1 << " " << j + 1 << " " << qp.A(i, j) << "\n";
  os << "%%b\n";
  for (Eigen::Index i = 0; i < dim; ++i) os << qp.b[i] << "\n";
  os << "%%c\n" << qp.c << "\n";
  os << "%%constraint g (g.x <= h)\n";
  for (Eigen::Index i = 0; i < dim; ++i) os << qp.g[i] << "\n";
  os << "%%h\n" << qp.h << "\n";
}

}  // namespace ifsm
