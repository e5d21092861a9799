#pragma once

#include <string>
#include <vector>

#include "qsf/analysis.hpp"
#include "qsf/crack.hpp"
#include "qsf/evolution.hpp"
#include "qsf/mesh.hpp"
#include "qsf/solver.hpp"

namespace qsf {

/// Shortest round-trip decimal representation; identical inputs serialize to
/// identical bytes.
std::string format_double(double value);

std::string mesh_to_json(const Mesh& mesh);
Mesh mesh_from_json_file(const std::string& path);

std::string crack_to_json(const Mesh& mesh, const CrackSet& crack, int step, double time);
std::string field_to_json(const Field& field);

/// One CSV row per step:
/// i,t,n_crack_edges,crack_length,n_components,bulk,surface,penalty,total,
/// increment_norm,candidates_evaluated. A '#' header line documents the
/// restricted search family.
std::string trace_to_csv(const EvolutionTrace& trace);

std::string balance_to_csv(const BalanceReport& report);
std::string minimality_to_csv(const MinimalityReport& report);
std::string griffith_to_csv(const GriffithReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Crack polyline over the mesh outline; optional grayscale nodal map.
std::string svg_frame(const Mesh& mesh, const CrackSet& crack, const Field* field,
                      const DofMap* dm, double value_scale);

/// Completed run directory reloaded for comparisons.
struct LoadedRun {
  Mesh mesh;
  std::vector<double> times;
  std::vector<CrackSet> cracks;
  std::vector<double> totals;  // bulk + surface + penalty per step
};

LoadedRun load_run(const std::string& dir);

}  // namespace qsf
