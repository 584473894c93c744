#include "ifsm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ifsm/collage.hpp"

namespace ifsm {

std::string to_string(BaseMethod method) {
  return method == BaseMethod::kEuler ? "euler" : "kac-siegert";
}

BaseMethod base_method_from_string(const std::string& name) {
  if (name == "euler") return BaseMethod::kEuler;
  if (name == "kac-siegert") return BaseMethod::kKacSiegert;
  throw std::invalid_argument("unknown base method: " + name);
}

SampledPath make_base_path(const PipelineOptions& opts) {
  GaussianStream stream(opts.seed);
  if (opts.method == BaseMethod::kEuler)
    return euler_bm(opts.euler_steps, opts.grid_n, stream);
  return kac_siegert_bm(opts.ks_terms, opts.grid_n, stream);
}

PipelineResult run_pipeline(const PipelineOptions& opts) {
  if (opts.refine < 1 || (opts.refine & (opts.refine - 1)) != 0)
    throw std::invalid_argument("run_pipeline: refine must be a power of two");

  SampledPath base = make_base_path(opts);
  const std::vector<AffineMap> maps = wavelet_family(opts.max_level);
  const CollageQp qp = assemble_collage_qp(base, maps);
  const FeasibleRegion region =
      opts.enforce_contractivity
          ? FeasibleRegion::for_qp_with_cap(qp, opts.contractivity_cap, opts.box_halfwidth)
          : FeasibleRegion::for_qp(qp, opts.box_halfwidth);
  SolveReport report = solve(qp, region, opts.solver);
  IfsmSystem system = IfsmSystem::from_parameters(
      maps, std::span<const double>(report.x_star.data(),
                                    static_cast<std::size_t>(report.x_star.size())));

  const double factor = contractivity_factor(system);
  if (factor >= 1.0)
    throw NotContractiveError("run_pipeline: solved system has contractivity factor " +
                              std::to_string(factor) + " >= 1; no fixed point exists");

  FixedPointResult fp = fixed_point(system, base.cells(), opts.fp_tol, opts.fp_max_iter);
  SampledPath output = opts.refine == 1
                           ? fp.path
                           : fixed_point(system, base.cells() * opts.refine, opts.fp_tol,
                                         opts.fp_max_iter)
                                 .path;

  PipelineSummary summary;
  summary.base_ifsm_distance = l2_distance(base, fp.path);
  summary.collage_bound = std::sqrt(std::max(report.delta2, 0.0)) / (1.0 - factor);
  summary.fp_iterations = fp.iterations;
  summary.fp_converged = fp.converged;
  summary.fp_last_distance = fp.last_distance;

  RunManifest manifest;
  manifest.command = "pipeline";
  manifest.options = opts;
  manifest.solve = SolveSummary{report.delta2, report.contractivity, report.iterations,
                                report.converged};
  manifest.summary = summary;

  return PipelineResult{std::move(base),   std::move(output),  std::move(system),
                        std::move(report), std::move(fp),      summary,
                        std::move(manifest)};
}

namespace {

/// Grid stride at which both t and w(t) land on grid points.
std::int64_t aligned_stride(const AffineMap& w, std::int64_t n) {
  const Rational offset_cells = w.offset_rational() * Rational(n);
  if (!offset_cells.is_integer())
    throw MisalignmentError("self_similarity_check: map offset is off the grid");
  for (std::int64_t d = 1; d <= n; d *= 2) {
    if ((w.scale_rational() * Rational(d)).is_integer()) return d;
  }
  throw MisalignmentError("self_similarity_check: map scale is off the grid");
}

}  // namespace

SelfSimilarityReport self_similarity_check(const IfsmSystem& sys, const SampledPath& fp) {
  const OverlapReport overlap = analyze_overlap(sys.maps());
  if (!overlap.nonoverlapping)
    throw OverlapError("self_similarity_check: maps overlap");
  if (!overlap.tiling)
    throw OverlapError("self_similarity_check: maps do not tile [0,1]");

  const std::int64_t n = fp.cells();
  SelfSimilarityReport report;
  report.per_map_residual.reserve(sys.size());
  for (std::size_t k = 0; k < sys.size(); ++k) {
    const AffineMap& w = sys.map(k);
    const double alpha = sys.grey(k).alpha;
    const std::int64_t stride = aligned_stride(w, n);
    const std::int64_t points = n / stride;  // aligned t values: 0, stride/n, ..., 1
    std::vector<std::int64_t> src(points + 1), img(points + 1);
    for (std::int64_t p = 0; p <= points; ++p) {
      src[p] = p * stride;
      const Rational image = w.scale_rational() * Rational(src[p]) +
                             w.offset_rational() * Rational(n);
      img[p] = image.num();  // integral by the stride construction
    }
    double worst = 0.0;
    for (std::int64_t p = 0; p <= points; ++p)
      for (std::int64_t q = p + 1; q <= points; ++q) {
        const double lhs = fp[img[q]] - fp[img[p]];
        const double rhs = alpha * (fp[src[q]] - fp[src[p]]);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    report.per_map_residual.push_back(worst);
    report.max_residual = std::max(report.max_residual, worst);
  }
  return report;
}

PathDiagnostics diagnostics(const SampledPath& path) {
  const std::int64_t n = path.cells();
  PathDiagnostics out;
  for (std::int64_t stride = 1; stride <= n; stride *= 2) {
    MeshStatistics stat;
    stat.stride = stride;
    stat.mesh = static_cast<double>(stride) / static_cast<double>(n);
    for (std::int64_t j = 0; j + stride <= n; j += stride) {
      const double inc = path[j + stride] - path[j];
      stat.quadratic_variation += inc * inc;
      stat.total_variation += std::abs(inc);
      stat.max_increment = std::max(stat.max_increment, std::abs(inc));
    }
    out.meshes.push_back(stat);
  }
  return out;
}

}  // namespace ifsm
