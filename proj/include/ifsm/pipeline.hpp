#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ifsm/generators.hpp"
#include "ifsm/qp.hpp"
#include "ifsm/system.hpp"

namespace ifsm {

enum class BaseMethod { kEuler, kKacSiegert };

std::string to_string(BaseMethod method);
BaseMethod base_method_from_string(const std::string& name);

struct PipelineOptions {
  std::uint64_t seed = 42;
  BaseMethod method = BaseMethod::kEuler;
  std::int64_t euler_steps = 50;  // Gaussian terms feeding the Euler base
  std::int64_t ks_terms = 25;
  int max_level = 8;              // wavelet family depth M
  std::int64_t grid_n = 1024;
  std::int64_t refine = 1;        // output grid = grid_n * refine, power of two
  double box_halfwidth = 5.0;
  bool enforce_contractivity = true;
  double contractivity_cap = 0.999;
  SolveOptions solver;
  double fp_tol = 1e-10;
  std::int64_t fp_max_iter = 200000;

  std::string map_family() const { return "wavelet:M=" + std::to_string(max_level); }
};

struct SolveSummary {
  double delta2 = 0.0;
  double contractivity = 0.0;
  std::int64_t iterations = 0;
  bool converged = false;
};

struct PipelineSummary {
  double base_ifsm_distance = 0.0;  // l2 on the base grid
  double collage_bound = 0.0;       // sqrt(delta2) / (1 - C)
  std::int64_t fp_iterations = 0;
  bool fp_converged = false;
  double fp_last_distance = 0.0;
};

/// Everything needed to replay a run bit-exactly, plus result summaries.
struct RunManifest {
  std::string command;  // "generate" | "invert" | "pipeline"
  PipelineOptions options;
  std::string input_csv;  // invert only
  std::string rng_algorithm = std::string(GaussianStream::algorithm_tag());
  std::map<std::string, std::string> outputs;  // logical name -> file name
  std::optional<SolveSummary> solve;
  std::optional<PipelineSummary> summary;
};

struct PipelineResult {
  SampledPath base;
  SampledPath ifsm_path;  // fixed point on the (possibly refined) output grid
  IfsmSystem system;
  SolveReport report;
  FixedPointResult fp;    // fixed-point run on the base grid
  PipelineSummary summary;
  RunManifest manifest;
};

/// Generate a base trajectory, assemble the overlapping-wavelet collage QP
/// from it, solve for the grey maps, and iterate the solved system to its
/// fractal fixed point. Throws NotContractiveError if the solved system has
/// C >= 1 (only possible when enforce_contractivity is off); solver
/// non-convergence is recorded in the report, not thrown.
PipelineResult run_pipeline(const PipelineOptions& opts);

/// Base trajectory for the given options (fresh stream from opts.seed).
SampledPath make_base_path(const PipelineOptions& opts);

struct SelfSimilarityReport {
  double max_residual = 0.0;
  std::vector<double> per_map_residual;
};

/// For a nonoverlapping tiling system with fixed point fp, the increments
/// must satisfy fp(w_i(t+h)) - fp(w_i(t)) = alpha_i (fp(t+h) - fp(t)) over
/// all grid-aligned pairs; reports the worst absolute violation. Rejects
/// overlapping or non-tiling map sets.
SelfSimilarityReport self_similarity_check(const IfsmSystem& sys, const SampledPath& fp);

struct MeshStatistics {
  std::int64_t stride = 1;          // increments taken every `stride` cells
  double mesh = 0.0;                // stride / n
  double quadratic_variation = 0.0;
  double total_variation = 0.0;
  double max_increment = 0.0;
};

struct PathDiagnostics {
  std::vector<MeshStatistics> meshes;  // dyadic meshes 1/n, 2/n, ..., 1
};

/// Realized variation statistics over the dyadic meshes; quadratic variation
/// near t is the Brownian fingerprint these paths are judged by.
PathDiagnostics diagnostics(const SampledPath& path);

}  // namespace ifsm
