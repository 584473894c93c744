#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ifsm/pipeline.hpp"
#include "ifsm/qp.hpp"

namespace ifsm {

/// Shortest round-trip decimal representation (from_chars reads it back to
/// the identical bits, which is what the replay contract relies on).
std::string format_double(double value);

/// CSV with header "t,value" and one row per grid point (n+1 rows of data).
void write_path_csv(const std::filesystem::path& file, const SampledPath& path);
SampledPath read_path_csv(const std::filesystem::path& file);

/// System descriptor: JSON array of {level, position, alpha, beta}. The map
/// parameters round-trip exactly through the dyadic {level, position} pair;
/// all maps must come from the wavelet family.
void write_system_json(const std::filesystem::path& file, const IfsmSystem& system);
IfsmSystem read_system_json(const std::filesystem::path& file);

void write_solve_report_json(const std::filesystem::path& file, const SolveReport& report);

void write_manifest_json(const std::filesystem::path& file, const RunManifest& manifest);
RunManifest read_manifest_json(const std::filesystem::path& file);

std::string diagnostics_to_json(const PathDiagnostics& diag);

/// Minimal self-contained polyline rendering: fixed 800x400 viewBox, linear
/// axis mapping, one polyline per labelled path.
void write_svg(const std::filesystem::path& file,
               const std::vector<std::pair<std::string, const SampledPath*>>& paths);

}  // namespace ifsm
