#include "ifsm/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ifsm {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + file.string());
  return out;
}

std::string read_all(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw std::runtime_error("malformed number: '" + std::string(text) + "'");
  return value;
}

json options_to_json(const PipelineOptions& opts) {
  return json{{"seed", opts.seed},
              {"method", to_string(opts.method)},
              {"euler_steps", opts.euler_steps},
              {"ks_terms", opts.ks_terms},
              {"max_level", opts.max_level},
              {"map_family", opts.map_family()},
              {"grid_n", opts.grid_n},
              {"refine", opts.refine},
              {"box_halfwidth", opts.box_halfwidth},
              {"enforce_contractivity", opts.enforce_contractivity},
              {"contractivity_cap", opts.contractivity_cap},
              {"solver",
               {{"kkt_tol", opts.solver.kkt_tol},
                {"max_iter", opts.solver.max_iter},
                {"ridge", opts.solver.ridge}}},
              {"fixed_point", {{"tol", opts.fp_tol}, {"max_iter", opts.fp_max_iter}}}};
}

PipelineOptions options_from_json(const json& j) {
  PipelineOptions opts;
  opts.seed = j.at("seed").get<std::uint64_t>();
  opts.method = base_method_from_string(j.at("method").get<std::string>());
  opts.euler_steps = j.at("euler_steps").get<std::int64_t>();
  opts.ks_terms = j.at("ks_terms").get<std::int64_t>();
  opts.max_level = j.at("max_level").get<int>();
  opts.grid_n = j.at("grid_n").get<std::int64_t>();
  opts.refine = j.at("refine").get<std::int64_t>();
  opts.box_halfwidth = j.at("box_halfwidth").get<double>();
  opts.enforce_contractivity = j.at("enforce_contractivity").get<bool>();
  opts.contractivity_cap = j.at("contractivity_cap").get<double>();
  const json& solver = j.at("solver");
  opts.solver.kkt_tol = solver.at("kkt_tol").get<double>();
  opts.solver.max_iter = solver.at("max_iter").get<std::int64_t>();
  opts.solver.ridge = solver.at("ridge").get<double>();
  const json& fp = j.at("fixed_point");
  opts.fp_tol = fp.at("tol").get<double>();
  opts.fp_max_iter = fp.at("max_iter").get<std::int64_t>();
  return opts;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buffer, ptr);
}

void write_path_csv(const std::filesystem::path& file, const SampledPath& path) {
  std::ofstream out = open_out(file);
  out << "t,value\n";
  for (std::int64_t j = 0; j <= path.cells(); ++j)
    out << format_double(path.t(j)) << "," << format_double(path[j]) << "\n";
}

SampledPath read_path_csv(const std::filesystem::path& file) {
  const std::string text = read_all(file);
  std::vector<double> values;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != "t,value")
        throw std::runtime_error("path CSV: expected header 't,value', got '" +
                                 std::string(line) + "'");
      header = false;
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos)
      throw std::runtime_error("path CSV: missing comma in row '" + std::string(line) + "'");
    values.push_back(parse_double(line.substr(comma + 1)));
  }
  if (header) throw std::runtime_error("path CSV: empty file");
  return SampledPath(std::move(values));
}

void write_system_json(const std::filesystem::path& file, const IfsmSystem& system) {
  json arr = json::array();
  for (std::size_t k = 0; k < system.size(); ++k) {
    const auto& index = system.map(k).wavelet_index();
    if (!index)
      throw std::invalid_argument("write_system_json: map " + std::to_string(k) +
                                  " is not a wavelet-family map");
    arr.push_back(json{{"level", index->level},
                       {"position", index->position},
                       {"alpha", system.grey(k).alpha},
                       {"beta", system.grey(k).beta}});
  }
  open_out(file) << arr.dump(2) << "\n";
}

IfsmSystem read_system_json(const std::filesystem::path& file) {
  const json arr = json::parse(read_all(file));
  if (!arr.is_array() || arr.empty())
    throw std::runtime_error("system JSON: expected a nonempty array");
  std::vector<AffineMap> maps;
  std::vector<GreyMap> greys;
  for (const json& rec : arr) {
    maps.push_back(AffineMap::wavelet(rec.at("level").get<int>(), rec.at("position").get<int>()));
    greys.push_back(GreyMap{rec.at("alpha").get<double>(), rec.at("beta").get<double>()});
  }
  return IfsmSystem(std::move(maps), std::move(greys));
}

void write_solve_report_json(const std::filesystem::path& file, const SolveReport& report) {
  json j{{"delta2", report.delta2},
         {"contractivity", report.contractivity},
         {"iterations", report.iterations},
         {"converged", report.converged},
         {"active_constraints", report.active_constraints}};
  open_out(file) << j.dump(2) << "\n";
}

void write_manifest_json(const std::filesystem::path& file, const RunManifest& manifest) {
  json j{{"schema", "ifsm-run/1"},
         {"command", manifest.command},
         {"rng", manifest.rng_algorithm},
         {"options", options_to_json(manifest.options)},
         {"outputs", manifest.outputs}};
  if (!manifest.input_csv.empty()) j["input_csv"] = manifest.input_csv;
  if (manifest.solve) {
    j["solve_report"] = json{{"delta2", manifest.solve->delta2},
                             {"contractivity", manifest.solve->contractivity},
                             {"iterations", manifest.solve->iterations},
                             {"converged", manifest.solve->converged}};
  }
  if (manifest.summary) {
    j["summary"] = json{{"base_ifsm_distance", manifest.summary->base_ifsm_distance},
                        {"collage_bound", manifest.summary->collage_bound},
                        {"fp_iterations", manifest.summary->fp_iterations},
                        {"fp_converged", manifest.summary->fp_converged},
                        {"fp_last_distance", manifest.summary->fp_last_distance}};
  }
  open_out(file) << j.dump(2) << "\n";
}

RunManifest read_manifest_json(const std::filesystem::path& file) {
  const json j = json::parse(read_all(file));
  if (j.at("schema").get<std::string>() != "ifsm-run/1")
    throw std::runtime_error("manifest: unknown schema");
  RunManifest manifest;
  manifest.command = j.at("command").get<std::string>();
  manifest.rng_algorithm = j.at("rng").get<std::string>();
  manifest.options = options_from_json(j.at("options"));
  if (j.contains("input_csv")) manifest.input_csv = j.at("input_csv").get<std::string>();
  for (const auto& [key, value] : j.at("outputs").items())
    manifest.outputs[key] = value.get<std::string>();
  return manifest;
}

std::string diagnostics_to_json(const PathDiagnostics& diag) {
  json arr = json::array();
  for (const MeshStatistics& stat : diag.meshes)
    arr.push_back(json{{"stride", stat.stride},
                       {"mesh", stat.mesh},
                       {"quadratic_variation", stat.quadratic_variation},
                       {"total_variation", stat.total_variation},
                       {"max_increment", stat.max_increment}});
  return arr.dump(2);
}

void write_svg(const std::filesystem::path& file,
               const std::vector<std::pair<std::string, const SampledPath*>>& paths) {
  if (paths.empty()) throw std::invalid_argument("write_svg: no paths");
  constexpr double width = 800.0, height = 400.0;
  constexpr double left = 45.0, right = 10.0, top = 12.0, bottom = 28.0;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

  double lo = 0.0, hi = 0.0;
  for (const auto& [label, path] : paths) {
    const auto& v = path->values();
    lo = std::min(lo, *std::min_element(v.begin(), v.end()));
    hi = std::max(hi, *std::max_element(v.begin(), v.end()));
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  auto fmt = [](double v) {
    char buffer[32];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v,
                                   std::chars_format::fixed, 2);
    return std::string(buffer, ptr);
  };
  auto map_x = [&](double t) { return left + t * (width - left - right); };
  auto map_y = [&](double v) {
    return top + (hi - v) / (hi - lo) * (height - top - bottom);
  };

  std::ofstream out = open_out(file);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 400\">\n";
  out << "<rect width=\"800\" height=\"400\" fill=\"white\"/>\n";
  out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left)
      << "\" y2=\"" << fmt(height - bottom) << "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(map_y(0.0)) << "\" x2=\""
      << fmt(width - right) << "\" y2=\"" << fmt(map_y(0.0))
      << "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  std::size_t color = 0;
  for (const auto& [label, path] : paths) {
    out << "<polyline fill=\"none\" stroke=\"" << palette[color % 4]
        << "\" stroke-width=\"1\" points=\"";
    for (std::int64_t j = 0; j <= path->cells(); ++j) {
      if (j > 0) out << " ";
      out << fmt(map_x(path->t(j))) << "," << fmt(map_y((*path)[j]));
    }
    out << "\"/>\n";
    out << "<text x=\"" << fmt(left + 8.0) << "\" y=\"" << fmt(top + 14.0 + 16.0 * color)
        << "\" font-family=\"monospace\" font-size=\"12\" fill=\"" << palette[color % 4]
        << "\">" << label << "</text>\n";
    ++color;
  }
  out << "</svg>\n";
}

}  // namespace ifsm
