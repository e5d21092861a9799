#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsf/analysis.hpp"
#include "qsf/crack.hpp"
#include "qsf/evolution.hpp"
#include "qsf/mesh.hpp"

namespace qsf {

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& field_path, const std::string& what)
      : std::runtime_error(field_path + ": " + what), field(field_path) {}
  std::string field;
};

struct GeometryConfig {
  double width = 1.0;
  double height = 1.0;
  int nx = 16;
  int ny = 16;
  std::vector<Side> dirichlet_sides;
};

struct SlitConfig {
  Side from_side = Side::kLeft;
  double position = 0.5;  // fraction along the side
  double depth = 0.25;    // length into the domain
};

struct InitialCrackConfig {
  enum class Kind { kNone, kSlit, kEdges };
  Kind kind = Kind::kNone;
  SlitConfig slit;
  std::vector<int> edges;
};

struct ModeConfig {
  std::vector<std::pair<double, double>> profile;
  enum class Spatial { kAffine, kAntisym, kNodal };
  Spatial spatial = Spatial::kAffine;
  double a = 0.0, b = 0.0, c = 0.0;  // affine(a,b,c) = a*x + b*y + c
  std::vector<double> nodal;
};

/// A complete scenario: geometry, initial crack, boundary program, penalty,
/// schedule, search policy, and output location.
struct ScenarioConfig {
  int schema = 1;
  GeometryConfig geometry;
  InitialCrackConfig initial_crack;
  std::vector<ModeConfig> program;
  double lambda = 1.0;
  int max_components = 1;
  double horizon = 1.0;
  double delta = 0.05;
  ExtensionPolicy policy{PolicyKind::kTipNucleate, 3};
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::vector<std::string> checks{"balance", "griffith"};
};

ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& json_text);
std::string emit_config(const ScenarioConfig& config);

Mesh build_mesh(const GeometryConfig& geometry);
CrackSet build_initial_crack(const Mesh& mesh, const InitialCrackConfig& config);
BoundaryProgram build_program(const Mesh& mesh, const std::vector<ModeConfig>& modes);
ScenarioSpec build_scenario_spec(const Mesh& mesh, const ScenarioConfig& config);

Side side_from_string(const std::string& name, const std::string& field);
std::string side_to_string(Side side);

}  // namespace qsf
