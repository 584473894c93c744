#include "ifsm/qp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ifsm {

namespace {

Eigen::VectorXd clamp_box(const Eigen::VectorXd& z, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi) {
  return z.cwiseMax(lo).cwiseMin(hi);
}

double shrink(double v, double s) {
  const double m = std::abs(v) - s;
  return m > 0.0 ? (v < 0.0 ? -m : m) : 0.0;
}

/// Projection onto box ∩ {g.x <= h} via bisection on the halfspace multiplier.
Eigen::VectorXd project_box_halfspace(const Eigen::VectorXd& z, const Eigen::VectorXd& lo,
                                      const Eigen::VectorXd& hi, const Eigen::VectorXd& g,
                                      double h) {
  Eigen::VectorXd x = clamp_box(z, lo, hi);
  if (g.dot(x) <= h) return x;
  auto value = [&](double lam) {
    Eigen::VectorXd y = clamp_box(z - lam * g, lo, hi);
    return std::pair{g.dot(y) - h, std::move(y)};
  };
  double lam_lo = 0.0;
  double lam_hi = 1.0 / std::max(g.squaredNorm(), 1e-300);
  auto [phi_hi, y_hi] = value(lam_hi);
  int guard = 0;
  while (phi_hi > 0.0 && guard++ < 200) {
    lam_lo = lam_hi;
    lam_hi *= 2.0;
    std::tie(phi_hi, y_hi) = value(lam_hi);
  }
  if (phi_hi > 0.0) throw std::invalid_argument("projection: halfspace unreachable inside box");
  for (int it = 0; it < 120; ++it) {
    const double mid = 0.5 * (lam_lo + lam_hi);
    auto [phi, y] = value(mid);
    if (phi > 0.0) {
      lam_lo = mid;
    } else {
      lam_hi = mid;
      y_hi = std::move(y);
    }
  }
  return y_hi;
}

/// Projection onto box ∩ {sum_k w_k |x_k| <= cap over the alpha block}.
/// Shrinkage-then-clamp with bisection on the multiplier; assumes the alpha
/// boxes contain 0 (validated by the region).
Eigen::VectorXd project_box_cap(const Eigen::VectorXd& z, const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi, const ContractivityCap& cap) {
  const Eigen::Index n_alpha = cap.weights.size();
  Eigen::VectorXd x = clamp_box(z, lo, hi);
  auto cap_sum = [&](const Eigen::VectorXd& y) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < n_alpha; ++k) s += cap.weights[k] * std::abs(y[k]);
    return s;
  };
  if (cap_sum(x) <= cap.cap) return x;
  auto value = [&](double lam) {
    Eigen::VectorXd y = x;
    for (Eigen::Index k = 0; k < n_alpha; ++k)
      y[k] = std::clamp(shrink(z[k], lam * cap.weights[k]), lo[k], hi[k]);
    return std::pair{cap_sum(y) - cap.cap, std::move(y)};
  };
  double lam_lo = 0.0, lam_hi = 1.0;
  auto [phi_hi, y_hi] = value(lam_hi);
  int guard = 0;
  while (phi_hi > 0.0 && guard++ < 200) {
    lam_lo = lam_hi;
    lam_hi *= 2.0;
    std::tie(phi_hi, y_hi) = value(lam_hi);
  }
  if (phi_hi > 0.0) throw std::invalid_argument("projection: cap unreachable inside box");
  for (int it = 0; it < 120; ++it) {
    const double mid = 0.5 * (lam_lo + lam_hi);
    auto [phi, y] = value(mid);
    if (phi > 0.0) {
      lam_lo = mid;
    } else {
      lam_hi = mid;
      y_hi = std::move(y);
    }
  }
  return y_hi;
}

}  // namespace

FeasibleRegion FeasibleRegion::for_qp(const CollageQp& qp, double box_halfwidth) {
  FeasibleRegion region;
  const Eigen::Index dim = qp.A.rows();
  region.lo = Eigen::VectorXd::Constant(dim, -box_halfwidth);
  region.hi = Eigen::VectorXd::Constant(dim, box_halfwidth);
  region.g = qp.g;
  region.h = qp.h;
  return region;
}

FeasibleRegion FeasibleRegion::for_qp_with_cap(const CollageQp& qp, double cap_value,
                                               double box_halfwidth) {
  FeasibleRegion region = for_qp(qp, box_halfwidth);
  region.cap = ContractivityCap{qp.map_factors.cwiseSqrt(), cap_value};
  return region;
}

bool FeasibleRegion::contains(const Eigen::VectorXd& x, double tol) const {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  if (g.size() > 0 && g.dot(x) > h + tol) return false;
  if (cap) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < cap->weights.size(); ++k)
      s += cap->weights[k] * std::abs(x[k]);
    if (s > cap->cap + tol) return false;
  }
  return true;
}

Eigen::VectorXd FeasibleRegion::project(const Eigen::VectorXd& z) const {
  const bool need_lin = g.size() > 0;
  if (!cap) {
    return need_lin ? project_box_halfspace(z, lo, hi, g, h) : clamp_box(z, lo, hi);
  }
  auto cap_ok = [&](const Eigen::VectorXd& y) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < cap->weights.size(); ++k) s += cap->weights[k] * std::abs(y[k]);
    return s <= cap->cap + 1e-15;
  };
  if (!need_lin) return project_box_cap(z, lo, hi, *cap);
  // A point achieving the distance to one set while lying in the full
  // intersection is the projection onto the intersection.
  Eigen::VectorXd lin_proj = project_box_halfspace(z, lo, hi, g, h);
  if (cap_ok(lin_proj)) return lin_proj;
  Eigen::VectorXd capped = project_box_cap(z, lo, hi, *cap);
  if (g.dot(capped) <= h + 1e-15) return capped;
  // Dykstra between the two exactly-projectable sets.
  Eigen::VectorXd x = z;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(z.size());
  Eigen::VectorXd q = Eigen::VectorXd::Zero(z.size());
  for (int it = 0; it < 2000; ++it) {
    Eigen::VectorXd y = project_box_halfspace(x + p, lo, hi, g, h);
    p = x + p - y;
    Eigen::VectorXd x_next = project_box_cap(y + q, lo, hi, *cap);
    q = y + q - x_next;
    const double delta = (x_next - x).norm();
    x = std::move(x_next);
    if (delta <= 1e-14 * (1.0 + x.norm())) break;
  }
  return x;
}

namespace {

struct Objective {
  const CollageQp& qp;
  double ridge;
  Eigen::MatrixXd A_sym;

  explicit Objective(const CollageQp& qp_in, double ridge_in)
      : qp(qp_in), ridge(ridge_in), A_sym(0.5 * (qp_in.A + qp_in.A.transpose())) {}

  double value(const Eigen::VectorXd& x) const {
    return x.dot(A_sym * x) + qp.b.dot(x) + qp.c + ridge * x.squaredNorm();
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    return 2.0 * (A_sym * x) + qp.b + 2.0 * ridge * x;
  }
  double curvature(const Eigen::VectorXd& d) const {
    return d.dot(A_sym * d) + ridge * d.squaredNorm();
  }
};

constexpr double kActiveTol = 1e-9;

/// Which box bounds / halfspace / cap are active at x (used to avoid
/// re-solving a face that already failed to improve).
std::vector<std::uint8_t> face_signature(const FeasibleRegion& region, const Eigen::VectorXd& x) {
  std::vector<std::uint8_t> sig(x.size() + 2, 0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] <= region.lo[i] + kActiveTol * (1.0 + std::abs(region.lo[i]))) sig[i] = 1;
    else if (x[i] >= region.hi[i] - kActiveTol * (1.0 + std::abs(region.hi[i]))) sig[i] = 2;
  }
  if (region.g.size() > 0 &&
      region.g.dot(x) >= region.h - kActiveTol * (1.0 + std::abs(region.h)))
    sig[x.size()] = 1;
  if (region.cap) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < region.cap->weights.size(); ++k)
      s += region.cap->weights[k] * std::abs(x[k]);
    if (s >= region.cap->cap - kActiveTol) sig[x.size() + 1] = 1;
  }
  return sig;
}

/// Solve the equality-constrained problem on the face determined by the
/// active constraints at x, then take the best feasible step toward it.
/// Returns true when a strictly better feasible point was found.
bool refine_on_face(const Objective& f, const FeasibleRegion& region, Eigen::VectorXd& x) {
  const Eigen::Index dim = x.size();
  std::vector<Eigen::Index> free_idx;
  std::vector<double> fixed_value(dim, 0.0);
  std::vector<bool> is_free(dim, false);

  const Eigen::Index n_alpha = region.cap ? region.cap->weights.size() : 0;
  double cap_sum = 0.0;
  for (Eigen::Index k = 0; k < n_alpha; ++k) cap_sum += region.cap->weights[k] * std::abs(x[k]);
  const bool cap_active = region.cap && cap_sum >= region.cap->cap - kActiveTol;

  for (Eigen::Index i = 0; i < dim; ++i) {
    const bool at_lo = x[i] <= region.lo[i] + kActiveTol * (1.0 + std::abs(region.lo[i]));
    const bool at_hi = x[i] >= region.hi[i] - kActiveTol * (1.0 + std::abs(region.hi[i]));
    const bool at_kink = cap_active && i < n_alpha && std::abs(x[i]) <= 1e-11;
    if (at_lo || at_hi || at_kink) {
      fixed_value[i] = at_kink ? 0.0 : (at_lo ? region.lo[i] : region.hi[i]);
    } else {
      is_free[i] = true;
      free_idx.push_back(i);
    }
  }
  const auto nf = static_cast<Eigen::Index>(free_idx.size());
  if (nf == 0) return false;

  const bool lin_active =
      region.g.size() > 0 && region.g.dot(x) >= region.h - kActiveTol * (1.0 + std::abs(region.h));

  Eigen::Index n_eq = (lin_active ? 1 : 0) + (cap_active ? 1 : 0);
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n_eq, nf);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n_eq);
  Eigen::Index row = 0;
  if (lin_active) {
    double rhs = region.h;
    for (Eigen::Index i = 0; i < dim; ++i)
      if (!is_free[i]) rhs -= region.g[i] * fixed_value[i];
    for (Eigen::Index c = 0; c < nf; ++c) E(row, c) = region.g[free_idx[c]];
    e[row++] = rhs;
  }
  if (cap_active) {
    double rhs = region.cap->cap;
    for (Eigen::Index k = 0; k < n_alpha; ++k)
      if (!is_free[k]) rhs -= region.cap->weights[k] * std::abs(fixed_value[k]);
    for (Eigen::Index c = 0; c < nf; ++c) {
      const Eigen::Index i = free_idx[c];
      if (i < n_alpha) E(row, c) = region.cap->weights[i] * (x[i] < 0.0 ? -1.0 : 1.0);
    }
    e[row++] = rhs;
  }

  // KKT system on the face: [2(A_FF + r I)  E^T; E  0].
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nf + n_eq, nf + n_eq);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf + n_eq);
  for (Eigen::Index r = 0; r < nf; ++r) {
    for (Eigen::Index c = 0; c < nf; ++c) K(r, c) = 2.0 * f.A_sym(free_idx[r], free_idx[c]);
    K(r, r) += 2.0 * f.ridge;
    double lin = f.qp.b[free_idx[r]];
    for (Eigen::Index i = 0; i < dim; ++i)
      if (!is_free[i]) lin += 2.0 * f.A_sym(free_idx[r], i) * fixed_value[i];
    rhs[r] = -lin;
  }
  K.block(nf, 0, n_eq, nf) = E;
  K.block(0, nf, nf, n_eq) = E.transpose();
  rhs.tail(n_eq) = e;

  Eigen::VectorXd sol = K.partialPivLu().solve(rhs);
  if (!sol.allFinite() || (K * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm()))
    sol = K.fullPivLu().solve(rhs);
  if (!sol.allFinite()) return false;

  Eigen::VectorXd candidate(dim);
  for (Eigen::Index i = 0; i < dim; ++i) candidate[i] = fixed_value[i];
  for (Eigen::Index c = 0; c < nf; ++c) candidate[free_idx[c]] = sol[c];

  Eigen::VectorXd d = candidate - x;
  const double dnorm = d.norm();
  if (!(dnorm > 1e-15)) return false;

  // Largest feasible step toward the candidate, then exact line search.
  double gamma_max = 1.0;
  if (!region.contains(candidate, 1e-12)) {
    double good = 0.0, bad = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (good + bad);
      if (region.contains(x + mid * d, 1e-12))
        good = mid;
      else
        bad = mid;
    }
    gamma_max = good;
  }
  if (gamma_max <= 0.0) return false;
  const double slope = f.gradient(x).dot(d);
  const double curv = f.curvature(d);
  double gamma = gamma_max;
  if (curv > 0.0) gamma = std::clamp(-slope / (2.0 * curv), 0.0, gamma_max);
  if (gamma <= 0.0) return false;
  Eigen::VectorXd next = x + gamma * d;
  if (f.value(next) >= f.value(x) - 1e-18) return false;
  x = std::move(next);
  return true;
}

SolveReport finalize_report(const CollageQp& qp, const FeasibleRegion& region,
                            Eigen::VectorXd x, std::int64_t iterations, bool converged,
                            std::vector<double> history) {
  SolveReport report;
  report.delta2 = evaluate_form(qp, x);
  report.contractivity = 0.0;
  const Eigen::Index N = qp.n_maps();
  for (Eigen::Index k = 0; k < N; ++k)
    report.contractivity += std::sqrt(qp.map_factors[k]) * std::abs(x[k]);
  const Eigen::Index dim = x.size();
  for (Eigen::Index i = 0; i < dim; ++i)
    if (x[i] <= region.lo[i] + 1e-8 || x[i] >= region.hi[i] - 1e-8)
      report.active_constraints.push_back(static_cast<int>(i));
  if (region.g.size() > 0 && region.g.dot(x) >= region.h - 1e-8 * (1.0 + std::abs(region.h)))
    report.active_constraints.push_back(static_cast<int>(dim));
  if (region.cap) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < region.cap->weights.size(); ++k)
      s += region.cap->weights[k] * std::abs(x[k]);
    if (s >= region.cap->cap - 1e-8) report.active_constraints.push_back(static_cast<int>(dim) + 1);
  }
  report.x_star = std::move(x);
  report.iterations = iterations;
  report.converged = converged;
  report.objective_history = std::move(history);
  return report;
}

void validate_region(const CollageQp& qp, const FeasibleRegion& region) {
  const Eigen::Index dim = qp.A.rows();
  if (region.lo.size() != dim || region.hi.size() != dim)
    throw std::invalid_argument("solve: box bounds must have length 2N");
  for (Eigen::Index i = 0; i < dim; ++i)
    if (region.lo[i] > region.hi[i])
      throw std::invalid_argument("solve: empty box (lo > hi)");
  if (region.g.size() > 0 && region.g.size() != dim)
    throw std::invalid_argument("solve: constraint vector must have length 2N");
  if (region.cap) {
    if (region.cap->weights.size() != qp.n_maps())
      throw std::invalid_argument("solve: cap weights must have length N");
    if (region.cap->cap <= 0.0)
      throw std::invalid_argument("solve: cap must be positive");
    for (Eigen::Index k = 0; k < region.cap->weights.size(); ++k)
      if (region.lo[k] > 0.0 || region.hi[k] < 0.0)
        throw std::invalid_argument("solve: cap requires alpha boxes containing 0");
  }
  // The region must contain a point; the projection of the origin is one
  // whenever the constraints are mutually consistent.
  if (!region.contains(region.project(Eigen::VectorXd::Zero(dim)), 1e-7))
    throw std::invalid_argument("solve: infeasible region");
}

}  // namespace

SolveReport solve(const CollageQp& qp, const FeasibleRegion& region, const SolveOptions& opts) {
  validate_region(qp, region);
  const Eigen::Index dim = qp.A.rows();
  Objective f(qp, opts.ridge);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.A_sym);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("solve: eigendecomposition failed");
  const Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
  const double lambda_max = lambda.maxCoeff();
  const double lipschitz = 2.0 * (lambda_max + opts.ridge);

  // Ridged unconstrained minimizer; the ridge selects the minimal-norm point
  // of the (often singular) normal equations.
  const Eigen::VectorXd rhs = es.eigenvectors().transpose() * (-0.5 * qp.b);
  const Eigen::VectorXd x_free =
      es.eigenvectors() * (rhs.array() / (lambda.array() + opts.ridge)).matrix();

  Eigen::VectorXd x = region.project(x_free);
  {
    const Eigen::VectorXd origin = region.project(Eigen::VectorXd::Zero(dim));
    if (f.value(origin) < f.value(x)) x = origin;
  }

  std::vector<double> history{f.value(x)};
  bool converged = false;
  std::int64_t iter = 0;
  std::vector<std::uint8_t> last_failed_face;
  for (; iter < opts.max_iter; ++iter) {
    const Eigen::VectorXd grad = f.gradient(x);
    const double residual = (x - region.project(x - grad)).norm();
    if (residual <= opts.kkt_tol) {
      converged = true;
      break;
    }
    bool improved = false;
    if (iter % 25 == 0) {
      // Direct solve on the current face, skipped while the active set is
      // stuck on a face that already failed to improve.
      std::vector<std::uint8_t> face = face_signature(region, x);
      if (face != last_failed_face) {
        improved = refine_on_face(f, region, x);
        if (improved)
          last_failed_face.clear();
        else
          last_failed_face = std::move(face);
      }
    }
    if (!improved) {
      // Projected gradient step with exact line search along the
      // projection-arc direction.
      const Eigen::VectorXd y = region.project(x - grad / lipschitz);
      const Eigen::VectorXd d = y - x;
      const double curv = f.curvature(d);
      double gamma = 1.0;
      if (curv > 0.0) gamma = std::clamp(-grad.dot(d) / (2.0 * curv), 0.0, 1.0);
      Eigen::VectorXd next = x + gamma * d;
      if (f.value(next) < f.value(x)) {
        x = std::move(next);
      } else if (d.norm() <= 1e-16) {
        // Projection is a fixed point but the residual test (unit step)
        // disagrees at rounding level; accept as converged.
        converged = true;
        break;
      }
    }
    history.push_back(f.value(x));
  }
  return finalize_report(qp, region, std::move(x), iter, converged, std::move(history));
}

SolveReport solve_separable(const CollageQp& qp, const FeasibleRegion& region,
                            const SolveOptions& opts) {
  validate_region(qp, region);
  if (region.cap)
    throw std::invalid_argument(
        "solve_separable: contractivity cap couples the blocks; use solve()");
  const Eigen::Index N = qp.n_maps();
  const Eigen::Index dim = 2 * N;
  const double scale = qp.A.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) {
      if (i == j) continue;
      if (std::abs(qp.A(i, j)) > 1e-12 * (1.0 + scale) ||
          std::abs(qp.A(N + i, N + j)) > 1e-12 * (1.0 + scale) ||
          std::abs(qp.A(i, N + j)) > 1e-12 * (1.0 + scale))
        throw std::invalid_argument("solve_separable: matrix is not block-diagonal");
    }

  // Exact minimizer of one 2x2 box-constrained block.
  auto solve_block = [&](Eigen::Index k, double lam, double& alpha, double& beta) {
    const double m11 = qp.A(k, k) + opts.ridge;
    const double m12 = qp.A(k, N + k);
    const double m22 = qp.A(N + k, N + k) + opts.ridge;
    const double c1 = qp.b[k] + lam * region.g[k];
    const double c2 = qp.b[N + k] + lam * region.g[N + k];
    const double lo1 = region.lo[k], hi1 = region.hi[k];
    const double lo2 = region.lo[N + k], hi2 = region.hi[N + k];
    auto fval = [&](double a, double b2) {
      return m11 * a * a + 2.0 * m12 * a * b2 + m22 * b2 * b2 + c1 * a + c2 * b2;
    };
    double best_a = 0.0, best_b = 0.0, best_f = 0.0;
    bool have = false;
    const double det = m11 * m22 - m12 * m12;
    if (det > 0.0) {
      const double a = (-0.5 * c1 * m22 + 0.5 * c2 * m12) / det;
      const double b2 = (-0.5 * c2 * m11 + 0.5 * c1 * m12) / det;
      if (a >= lo1 && a <= hi1 && b2 >= lo2 && b2 <= hi2) {
        best_a = a;
        best_b = b2;
        best_f = fval(a, b2);
        have = true;
      }
    }
    auto consider_edge = [&](double fixed_a, bool fix_first) {
      double a, b2;
      if (fix_first) {
        a = fixed_a;
        b2 = m22 > 0.0 ? std::clamp((-0.5 * c2 - m12 * a) / m22, lo2, hi2) : lo2;
      } else {
        b2 = fixed_a;
        a = m11 > 0.0 ? std::clamp((-0.5 * c1 - m12 * b2) / m11, lo1, hi1) : lo1;
      }
      const double fv = fval(a, b2);
      if (!have || fv < best_f) {
        best_a = a;
        best_b = b2;
        best_f = fv;
        have = true;
      }
    };
    consider_edge(lo1, true);
    consider_edge(hi1, true);
    consider_edge(lo2, false);
    consider_edge(hi2, false);
    alpha = best_a;
    beta = best_b;
  };

  auto primal = [&](double lam) {
    Eigen::VectorXd x(dim);
    for (Eigen::Index k = 0; k < N; ++k) {
      double a, b2;
      solve_block(k, lam, a, b2);
      x[k] = a;
      x[N + k] = b2;
    }
    return x;
  };

  std::int64_t iterations = 1;
  Eigen::VectorXd x = primal(0.0);
  if (region.g.size() > 0 && region.g.dot(x) > region.h + 1e-12 * (1.0 + std::abs(region.h))) {
    double lam_lo = 0.0, lam_hi = 1.0;
    Eigen::VectorXd x_hi = primal(lam_hi);
    int guard = 0;
    while (region.g.dot(x_hi) > region.h && guard++ < 200) {
      lam_lo = lam_hi;
      lam_hi *= 2.0;
      x_hi = primal(lam_hi);
      ++iterations;
    }
    if (region.g.dot(x_hi) > region.h)
      throw std::invalid_argument("solve_separable: constraint unreachable inside box");
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lam_lo + lam_hi);
      Eigen::VectorXd xm = primal(mid);
      ++iterations;
      if (region.g.dot(xm) > region.h) {
        lam_lo = mid;
      } else {
        lam_hi = mid;
        x_hi = std::move(xm);
      }
    }
    x = std::move(x_hi);
  }
  std::vector<double> history{evaluate_form(qp, x)};
  return finalize_report(qp, region, std::move(x), iterations, true, std::move(history));
}

}  // namespace ifsm
