#include "ifsm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>

#include <CLI11.hpp>

#include "ifsm/collage.hpp"
#include "ifsm/io.hpp"
#include "ifsm/pipeline.hpp"

namespace ifsm {

namespace {

namespace fs = std::filesystem;

struct GenerateResult {
  int exit_code = 0;
};

void emit_generate(const PipelineOptions& opts, const fs::path& outdir, bool svg,
                   std::ostream& out) {
  fs::create_directories(outdir);
  SampledPath path = make_base_path(opts);
  const std::string stem = to_string(opts.method);

  RunManifest manifest;
  manifest.command = "generate";
  manifest.options = opts;
  manifest.outputs["path_csv"] = stem + ".csv";
  if (svg) manifest.outputs["svg"] = stem + ".svg";
  manifest.outputs["manifest"] = "manifest.json";

  write_path_csv(outdir / (stem + ".csv"), path);
  if (svg) write_svg(outdir / (stem + ".svg"), {{stem, &path}});
  write_manifest_json(outdir / "manifest.json", manifest);
  out << "wrote " << (outdir / (stem + ".csv")).string() << " (" << path.size() << " rows)\n";
}

int emit_invert(const PipelineOptions& opts, const std::string& input, const fs::path& outdir,
                bool want_fixed_point, bool dump, std::ostream& out) {
  fs::create_directories(outdir);
  SampledPath target = read_path_csv(input);
  PipelineOptions effective = opts;
  effective.grid_n = target.cells();

  const std::vector<AffineMap> maps = wavelet_family(effective.max_level);
  const CollageQp qp = assemble_collage_qp(target, maps);
  const FeasibleRegion region =
      effective.enforce_contractivity
          ? FeasibleRegion::for_qp_with_cap(qp, effective.contractivity_cap,
                                            effective.box_halfwidth)
          : FeasibleRegion::for_qp(qp, effective.box_halfwidth);
  SolveReport report = solve(qp, region, effective.solver);
  IfsmSystem system = IfsmSystem::from_parameters(
      maps, std::span<const double>(report.x_star.data(),
                                    static_cast<std::size_t>(report.x_star.size())));

  RunManifest manifest;
  manifest.command = "invert";
  manifest.options = effective;
  manifest.input_csv = input;
  manifest.outputs["system_json"] = "system.json";
  manifest.outputs["solve_report"] = "solve_report.json";
  manifest.outputs["manifest"] = "manifest.json";
  manifest.solve =
      SolveSummary{report.delta2, report.contractivity, report.iterations, report.converged};

  write_system_json(outdir / "system.json", system);
  write_solve_report_json(outdir / "solve_report.json", report);
  if (dump) {
    std::ofstream dump_out(outdir / "qp_dump.txt", std::ios::binary);
    dump_qp(qp, dump_out);
    manifest.outputs["qp_dump"] = "qp_dump.txt";
  }

  const double factor = report.contractivity;
  if (want_fixed_point) {
    if (factor >= 1.0) {
      write_manifest_json(outdir / "manifest.json", manifest);
      throw NotContractiveError("solved system has contractivity " + std::to_string(factor) +
                                " >= 1; cannot iterate to a fixed point");
    }
    FixedPointResult fp =
        fixed_point(system, target.cells(), effective.fp_tol, effective.fp_max_iter);
    write_path_csv(outdir / "fixed_point.csv", fp.path);
    manifest.outputs["fixed_point_csv"] = "fixed_point.csv";
    PipelineSummary summary;
    summary.base_ifsm_distance = l2_distance(target, fp.path);
    summary.collage_bound = std::sqrt(std::max(report.delta2, 0.0)) / (1.0 - factor);
    summary.fp_iterations = fp.iterations;
    summary.fp_converged = fp.converged;
    summary.fp_last_distance = fp.last_distance;
    manifest.summary = summary;
  }
  write_manifest_json(outdir / "manifest.json", manifest);
  out << "delta2 = " << format_double(report.delta2)
      << ", contractivity = " << format_double(report.contractivity)
      << (report.converged ? "" : " (solver did not converge)") << "\n";
  return report.converged ? 0 : 1;
}

int emit_pipeline(const PipelineOptions& opts, const fs::path& outdir, std::ostream& out) {
  fs::create_directories(outdir);
  PipelineResult result = run_pipeline(opts);

  result.manifest.outputs["base_csv"] = "base.csv";
  result.manifest.outputs["ifsm_csv"] = "ifsm.csv";
  result.manifest.outputs["svg"] = "paths.svg";
  result.manifest.outputs["system_json"] = "system.json";
  result.manifest.outputs["manifest"] = "manifest.json";

  write_path_csv(outdir / "base.csv", result.base);
  write_path_csv(outdir / "ifsm.csv", result.ifsm_path);
  write_svg(outdir / "paths.svg",
            {{"base (" + to_string(opts.method) + ")", &result.base},
             {"ifsm fixed point", &result.ifsm_path}});
  write_system_json(outdir / "system.json", result.system);
  write_manifest_json(outdir / "manifest.json", result.manifest);

  out << "delta2 = " << format_double(result.report.delta2)
      << ", C = " << format_double(result.report.contractivity)
      << ", |base - ifsm|_2 = " << format_double(result.summary.base_ifsm_distance)
      << ", collage bound = " << format_double(result.summary.collage_bound) << "\n";
  return result.report.converged ? 0 : 1;
}

int run_replay(const fs::path& manifest_file, const fs::path& outdir, std::ostream& out) {
  RunManifest manifest = read_manifest_json(manifest_file);
  const bool svg = manifest.outputs.count("svg") > 0;
  if (manifest.command == "generate") {
    emit_generate(manifest.options, outdir, svg, out);
    return 0;
  }
  if (manifest.command == "pipeline") {
    return emit_pipeline(manifest.options, outdir, out);
  }
  if (manifest.command == "invert") {
    return emit_invert(manifest.options, manifest.input_csv, outdir,
                       manifest.outputs.count("fixed_point_csv") > 0,
                       manifest.outputs.count("qp_dump") > 0, out);
  }
  throw std::runtime_error("manifest: unknown command '" + manifest.command + "'");
}

std::pair<std::uint64_t, std::uint64_t> parse_sweep(const std::string& spec) {
  const std::size_t sep = spec.find("..");
  if (sep == std::string::npos)
    throw CLI::ValidationError("--sweep", "expected the form a..b");
  const std::uint64_t a = std::stoull(spec.substr(0, sep));
  const std::uint64_t b = std::stoull(spec.substr(sep + 2));
  if (b < a) throw CLI::ValidationError("--sweep", "range must be nondecreasing");
  return {a, b};
}

void add_solver_flags(CLI::App* cmd, PipelineOptions& opts) {
  cmd->add_option("--kkt-tol", opts.solver.kkt_tol, "solver KKT tolerance");
  cmd->add_option("--solver-max-iter", opts.solver.max_iter, "solver iteration budget");
  cmd->add_option("--box", opts.box_halfwidth, "box half-width for alpha/beta");
  cmd->add_option("--cap", opts.contractivity_cap, "contractivity cap value");
  cmd->add_option("--fp-tol", opts.fp_tol, "fixed-point stopping tolerance");
  cmd->add_option("--fp-max-iter", opts.fp_max_iter, "fixed-point iteration budget");
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Brownian paths as IFSM fixed points: generate, invert, iterate"};
  app.name("ifsm");
  app.require_subcommand(1);

  PipelineOptions opts;
  std::string outdir = ".";
  bool svg = false;

  // generate
  auto* generate = app.add_subcommand("generate", "simulate a Brownian trajectory");
  std::string method;
  generate->add_option("method", method, "euler | kac-siegert")
      ->required()
      ->check(CLI::IsMember({"euler", "kac-siegert"}));
  generate->add_option("--seed", opts.seed, "PRNG seed");
  generate->add_option("--n", opts.grid_n, "grid cell count (power of two)");
  generate->add_option("--steps", opts.euler_steps, "Euler knot count");
  generate->add_option("--terms", opts.ks_terms, "Kac-Siegert series terms");
  generate->add_option("--out", outdir, "output directory");
  generate->add_flag("--svg", svg, "also write an SVG rendering");

  // invert
  auto* invert = app.add_subcommand("invert", "solve the collage inverse problem for a path");
  std::string input;
  bool want_fixed_point = false;
  bool dump = false;
  bool enforce_cap_invert = false;
  invert->add_option("--input", input, "path CSV to invert")->required();
  invert->add_option("--wavelet-M", opts.max_level, "wavelet family depth M");
  invert->add_option("--out", outdir, "output directory");
  invert->add_flag("--fixed-point", want_fixed_point, "also iterate and write the fixed point");
  invert->add_flag("--dump-qp", dump, "write the assembled quadratic form (debug)");
  invert->add_flag("--enforce-cap", enforce_cap_invert,
                   "constrain the solution to contractivity < cap");
  add_solver_flags(invert, opts);

  // pipeline
  auto* pipeline = app.add_subcommand(
      "pipeline", "base trajectory -> collage QP -> solved IFSM -> fractal fixed point");
  std::string pipeline_method = "euler";
  std::string sweep;
  bool no_cap = false;
  pipeline->add_option("--method", pipeline_method, "base method: euler | kac-siegert")
      ->check(CLI::IsMember({"euler", "kac-siegert"}));
  pipeline->add_option("--seed", opts.seed, "PRNG seed");
  pipeline->add_option("--n", opts.grid_n, "grid cell count (power of two)");
  pipeline->add_option("--steps", opts.euler_steps, "Euler knot count");
  pipeline->add_option("--terms", opts.ks_terms, "Kac-Siegert series terms");
  pipeline->add_option("--M", opts.max_level, "wavelet family depth M");
  pipeline->add_option("--refine", opts.refine, "output grid refinement factor (power of two)");
  pipeline->add_option("--out", outdir, "output directory");
  pipeline->add_option("--sweep", sweep, "run seeds a..b into per-seed subdirectories");
  pipeline->add_flag("--no-cap", no_cap, "do not constrain contractivity (fixed point may fail)");
  add_solver_flags(pipeline, opts);

  // diagnose
  auto* diagnose = app.add_subcommand("diagnose", "variation statistics of a path CSV");
  std::string diag_input;
  std::string diag_json;
  diagnose->add_option("--input", diag_input, "path CSV")->required();
  diagnose->add_option("--json", diag_json, "also write the table as JSON");

  // replay
  auto* replay = app.add_subcommand("replay", "re-run a recorded manifest bit-exactly");
  std::string manifest_file;
  replay->add_option("--manifest", manifest_file, "manifest JSON")->required();
  replay->add_option("--out", outdir, "output directory");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    std::ostringstream usage;
    const int code = app.exit(e, usage, usage);
    (code == 0 ? out : err) << usage.str();
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) {
      opts.method = base_method_from_string(method);
      emit_generate(opts, outdir, svg, out);
      return 0;
    }
    if (invert->parsed()) {
      opts.enforce_contractivity = enforce_cap_invert;
      return emit_invert(opts, input, outdir, want_fixed_point, dump, out);
    }
    if (pipeline->parsed()) {
      opts.method = base_method_from_string(pipeline_method);
      opts.enforce_contractivity = !no_cap;
      if (!sweep.empty()) {
        const auto [a, b] = parse_sweep(sweep);
        int worst = 0;
        for (std::uint64_t seed = a; seed <= b; ++seed) {
          PipelineOptions run = opts;
          run.seed = seed;
          worst = std::max(worst, emit_pipeline(run, fs::path(outdir) / ("seed-" +
                                                std::to_string(seed)), out));
        }
        return worst;
      }
      return emit_pipeline(opts, outdir, out);
    }
    if (diagnose->parsed()) {
      SampledPath path = read_path_csv(diag_input);
      PathDiagnostics diag = diagnostics(path);
      out << "mesh,quadratic_variation,total_variation,max_increment\n";
      for (const MeshStatistics& stat : diag.meshes)
        out << format_double(stat.mesh) << "," << format_double(stat.quadratic_variation) << ","
            << format_double(stat.total_variation) << "," << format_double(stat.max_increment)
            << "\n";
      if (!diag_json.empty()) {
        std::ofstream json_out(diag_json, std::ios::binary);
        json_out << diagnostics_to_json(diag) << "\n";
      }
      return 0;
    }
    if (replay->parsed()) {
      return run_replay(manifest_file, outdir, out);
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace ifsm
