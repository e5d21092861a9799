#include "qsf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace qsf {

using nlohmann::json;

Side side_from_string(const std::string& name, const std::string& field) {
  if (name == "left") return Side::kLeft;
  if (name == "right") return Side::kRight;
  if (name == "bottom") return Side::kBottom;
  if (name == "top") return Side::kTop;
  throw ConfigError(field, "unknown side '" + name + "'");
}

std::string side_to_string(Side side) {
  switch (side) {
    case Side::kLeft: return "left";
    case Side::kRight: return "right";
    case Side::kBottom: return "bottom";
    case Side::kTop: return "top";
  }
  return "?";
}

namespace {

const json& require(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + key, "missing field");
  return *it;
}

double require_number(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) throw ConfigError(path + key, "expected a number");
  return v.get<double>();
}

int require_int(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_integer()) throw ConfigError(path + key, "expected an integer");
  return v.get<int>();
}

ModeConfig parse_mode(const json& j, const std::string& path) {
  ModeConfig mode;
  const json& profile = require(j, "profile", path);
  if (!profile.is_array() || profile.empty())
    throw ConfigError(path + "profile", "expected a nonempty [t,value] list");
  double prev_t = -1.0;
  for (std::size_t k = 0; k < profile.size(); ++k) {
    const json& knot = profile[k];
    if (!knot.is_array() || knot.size() != 2 || !knot[0].is_number() ||
        !knot[1].is_number())
      throw ConfigError(path + "profile[" + std::to_string(k) + "]",
                        "expected [t, value]");
    const double t = knot[0].get<double>();
    if (t <= prev_t && k > 0)
      throw ConfigError(path + "profile[" + std::to_string(k) + "]",
                        "knot times must be strictly increasing");
    prev_t = t;
    mode.profile.emplace_back(t, knot[1].get<double>());
  }
  const json& spatial = require(j, "spatial", path);
  if (spatial.is_array()) {
    mode.spatial = ModeConfig::Spatial::kNodal;
    for (const auto& v : spatial) {
      if (!v.is_number()) throw ConfigError(path + "spatial", "expected numbers");
      mode.nodal.push_back(v.get<double>());
    }
  } else if (spatial.is_string()) {
    const std::string s = spatial.get<std::string>();
    if (s == "mode_antisym") {
      mode.spatial = ModeConfig::Spatial::kAntisym;
    } else if (s.rfind("affine(", 0) == 0 && s.back() == ')') {
      mode.spatial = ModeConfig::Spatial::kAffine;
      const std::string args = s.substr(7, s.size() - 8);
      std::istringstream is(args);
      char c1 = 0, c2 = 0;
      if (!(is >> mode.a >> c1 >> mode.b >> c2 >> mode.c) || c1 != ',' || c2 != ',')
        throw ConfigError(path + "spatial", "expected affine(a,b,c)");
    } else {
      throw ConfigError(path + "spatial", "unknown preset '" + s + "'");
    }
  } else {
    throw ConfigError(path + "spatial", "expected a preset name or nodal array");
  }
  return mode;
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("<document>", "expected a JSON object");

  ScenarioConfig cfg;
  cfg.schema = require_int(j, "schema", "");
  if (cfg.schema != 1) throw ConfigError("schema", "unsupported schema version");

  const json& geo = require(j, "geometry", "");
  cfg.geometry.width = require_number(geo, "width", "geometry.");
  cfg.geometry.height = require_number(geo, "height", "geometry.");
  cfg.geometry.nx = require_int(geo, "nx", "geometry.");
  cfg.geometry.ny = require_int(geo, "ny", "geometry.");
  if (cfg.geometry.width <= 0) throw ConfigError("geometry.width", "must be positive");
  if (cfg.geometry.height <= 0) throw ConfigError("geometry.height", "must be positive");
  if (cfg.geometry.nx < 1) throw ConfigError("geometry.nx", "must be >= 1");
  if (cfg.geometry.ny < 1) throw ConfigError("geometry.ny", "must be >= 1");
  const json& sides = require(geo, "dirichlet_sides", "geometry.");
  if (!sides.is_array() || sides.empty())
    throw ConfigError("geometry.dirichlet_sides", "expected a nonempty list of sides");
  for (const auto& s : sides) {
    if (!s.is_string())
      throw ConfigError("geometry.dirichlet_sides", "expected side names");
    cfg.geometry.dirichlet_sides.push_back(
        side_from_string(s.get<std::string>(), "geometry.dirichlet_sides"));
  }

  if (j.contains("initial_crack")) {
    const json& ic = j["initial_crack"];
    if (ic.is_string()) {
      if (ic.get<std::string>() != "none")
        throw ConfigError("initial_crack", "unknown preset '" + ic.get<std::string>() + "'");
      cfg.initial_crack.kind = InitialCrackConfig::Kind::kNone;
    } else if (ic.is_array()) {
      cfg.initial_crack.kind = InitialCrackConfig::Kind::kEdges;
      for (const auto& v : ic) {
        if (!v.is_number_integer())
          throw ConfigError("initial_crack", "expected edge ids");
        cfg.initial_crack.edges.push_back(v.get<int>());
      }
    } else if (ic.is_object() && ic.contains("edge_slit")) {
      cfg.initial_crack.kind = InitialCrackConfig::Kind::kSlit;
      const json& slit = ic["edge_slit"];
      const json& from = require(slit, "from_side", "initial_crack.edge_slit.");
      if (!from.is_string())
        throw ConfigError("initial_crack.edge_slit.from_side", "expected a side name");
      cfg.initial_crack.slit.from_side =
          side_from_string(from.get<std::string>(), "initial_crack.edge_slit.from_side");
      cfg.initial_crack.slit.position =
          require_number(slit, "position", "initial_crack.edge_slit.");
      cfg.initial_crack.slit.depth =
          require_number(slit, "depth", "initial_crack.edge_slit.");
      if (cfg.initial_crack.slit.position <= 0 || cfg.initial_crack.slit.position >= 1)
        throw ConfigError("initial_crack.edge_slit.position", "must lie in (0,1)");
      if (cfg.initial_crack.slit.depth <= 0)
        throw ConfigError("initial_crack.edge_slit.depth", "must be positive");
    } else {
      throw ConfigError("initial_crack", "expected \"none\", an edge list, or edge_slit");
    }
  }

  const json& prog = require(j, "program", "");
  if (!prog.is_array() || prog.empty())
    throw ConfigError("program", "expected a nonempty list of modes");
  for (std::size_t k = 0; k < prog.size(); ++k)
    cfg.program.push_back(parse_mode(prog[k], "program[" + std::to_string(k) + "]."));

  cfg.lambda = require_number(j, "lambda", "");
  if (cfg.lambda < 0) throw ConfigError("lambda", "must be nonnegative");

  if (j.contains("m")) {
    cfg.max_components = require_int(j, "m", "");
    if (cfg.max_components < 1) throw ConfigError("m", "must be >= 1");
  }

  const json& sched = require(j, "schedule", "");
  cfg.horizon = require_number(sched, "T", "schedule.");
  cfg.delta = require_number(sched, "delta", "schedule.");
  if (cfg.horizon <= 0) throw ConfigError("schedule.T", "must be positive");
  if (cfg.delta <= 0) throw ConfigError("schedule.delta", "must be positive");
  if (cfg.delta > cfg.horizon) throw ConfigError("schedule.delta", "exceeds T");

  if (j.contains("policy")) {
    const json& pol = j["policy"];
    const json& kind = require(pol, "kind", "policy.");
    if (!kind.is_string()) throw ConfigError("policy.kind", "expected a string");
    const std::string k = kind.get<std::string>();
    if (k == "TIP") cfg.policy.kind = PolicyKind::kTip;
    else if (k == "TIP+NUCLEATE") cfg.policy.kind = PolicyKind::kTipNucleate;
    else if (k == "EXHAUSTIVE") cfg.policy.kind = PolicyKind::kExhaustive;
    else throw ConfigError("policy.kind", "unknown policy '" + k + "'");
    if (pol.contains("budget")) {
      cfg.policy.budget = require_int(pol, "budget", "policy.");
      if (cfg.policy.budget < 1) throw ConfigError("policy.budget", "must be >= 1");
    }
  }

  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) throw ConfigError("seed", "expected an integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("output_dir", "expected a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("checks")) {
    if (!j["checks"].is_array()) throw ConfigError("checks", "expected a list");
    cfg.checks.clear();
    for (const auto& c : j["checks"]) {
      if (!c.is_string()) throw ConfigError("checks", "expected check names");
      const std::string name = c.get<std::string>();
      if (name != "balance" && name != "minimality" && name != "griffith")
        throw ConfigError("checks", "unknown check '" + name + "'");
      cfg.checks.push_back(name);
    }
  }
  return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string emit_config(const ScenarioConfig& cfg) {
  json j;
  j["schema"] = cfg.schema;
  j["geometry"]["width"] = cfg.geometry.width;
  j["geometry"]["height"] = cfg.geometry.height;
  j["geometry"]["nx"] = cfg.geometry.nx;
  j["geometry"]["ny"] = cfg.geometry.ny;
  json sides = json::array();
  for (Side s : cfg.geometry.dirichlet_sides) sides.push_back(side_to_string(s));
  j["geometry"]["dirichlet_sides"] = sides;

  switch (cfg.initial_crack.kind) {
    case InitialCrackConfig::Kind::kNone:
      j["initial_crack"] = "none";
      break;
    case InitialCrackConfig::Kind::kEdges:
      j["initial_crack"] = cfg.initial_crack.edges;
      break;
    case InitialCrackConfig::Kind::kSlit:
      j["initial_crack"]["edge_slit"]["from_side"] =
          side_to_string(cfg.initial_crack.slit.from_side);
      j["initial_crack"]["edge_slit"]["position"] = cfg.initial_crack.slit.position;
      j["initial_crack"]["edge_slit"]["depth"] = cfg.initial_crack.slit.depth;
      break;
  }

  json prog = json::array();
  for (const auto& mode : cfg.program) {
    json m;
    json profile = json::array();
    for (const auto& [t, v] : mode.profile) profile.push_back(json::array({t, v}));
    m["profile"] = profile;
    switch (mode.spatial) {
      case ModeConfig::Spatial::kAffine: {
        std::ostringstream os;
        os.precision(17);
        os << "affine(" << mode.a << "," << mode.b << "," << mode.c << ")";
        m["spatial"] = os.str();
        break;
      }
      case ModeConfig::Spatial::kAntisym:
        m["spatial"] = "mode_antisym";
        break;
      case ModeConfig::Spatial::kNodal:
        m["spatial"] = mode.nodal;
        break;
    }
    prog.push_back(m);
  }
  j["program"] = prog;
  j["lambda"] = cfg.lambda;
  j["m"] = cfg.max_components;
  j["schedule"]["T"] = cfg.horizon;
  j["schedule"]["delta"] = cfg.delta;
  switch (cfg.policy.kind) {
    case PolicyKind::kTip: j["policy"]["kind"] = "TIP"; break;
    case PolicyKind::kTipNucleate: j["policy"]["kind"] = "TIP+NUCLEATE"; break;
    case PolicyKind::kExhaustive: j["policy"]["kind"] = "EXHAUSTIVE"; break;
  }
  j["policy"]["budget"] = cfg.policy.budget;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  j["checks"] = cfg.checks;
  return j.dump(2);
}

Mesh build_mesh(const GeometryConfig& geometry) {
  return build_rect_mesh(geometry.width, geometry.height, geometry.nx, geometry.ny,
                         geometry.dirichlet_sides);
}

namespace {

int find_edge(const Mesh& mesh, int va, int vb) {
  const auto [lo, hi] = std::minmax(va, vb);
  for (int e : mesh.vertex_edges[lo])
    if (mesh.edges[e].v0 == lo && mesh.edges[e].v1 == hi) return e;
  throw ConfigError("initial_crack", "slit does not follow mesh edges");
}

}  // namespace

CrackSet build_initial_crack(const Mesh& mesh, const InitialCrackConfig& config) {
  switch (config.kind) {
    case InitialCrackConfig::Kind::kNone:
      return CrackSet{};
    case InitialCrackConfig::Kind::kEdges:
      try {
        return make_crack(mesh, config.edges);
      } catch (const MeshError& e) {
        throw ConfigError("initial_crack", e.what());
      }
    case InitialCrackConfig::Kind::kSlit:
      break;
  }
  const SlitConfig& slit = config.slit;
  const double hx = mesh.width / mesh.nx;
  const double hy = mesh.height / mesh.ny;
  auto vid = [&](int i, int jj) { return jj * (mesh.nx + 1) + i; };
  std::vector<int> ids;
  if (slit.from_side == Side::kLeft || slit.from_side == Side::kRight) {
    const int jy = std::clamp(static_cast<int>(std::lround(slit.position * mesh.ny)), 1,
                              mesh.ny - 1);
    const int n = std::clamp(static_cast<int>(std::lround(slit.depth / hx)), 1,
                             mesh.nx - 1);
    for (int k = 0; k < n; ++k) {
      const int i = slit.from_side == Side::kLeft ? k : mesh.nx - 1 - k;
      ids.push_back(find_edge(mesh, vid(i, jy), vid(i + 1, jy)));
    }
  } else {
    const int ix = std::clamp(static_cast<int>(std::lround(slit.position * mesh.nx)), 1,
                              mesh.nx - 1);
    const int n = std::clamp(static_cast<int>(std::lround(slit.depth / hy)), 1,
                             mesh.ny - 1);
    for (int k = 0; k < n; ++k) {
      const int jj = slit.from_side == Side::kBottom ? k : mesh.ny - 1 - k;
      ids.push_back(find_edge(mesh, vid(ix, jj), vid(ix, jj + 1)));
    }
  }
  return make_crack(mesh, std::move(ids));
}

BoundaryProgram build_program(const Mesh& mesh, const std::vector<ModeConfig>& modes) {
  BoundaryProgram program;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const ModeConfig& mc = modes[k];
    BoundaryMode mode;
    mode.profile.knots = mc.profile;
    switch (mc.spatial) {
      case ModeConfig::Spatial::kAffine:
        for (const Vec2& p : mesh.vertices)
          mode.spatial.push_back(mc.a * p.x + mc.b * p.y + mc.c);
        break;
      case ModeConfig::Spatial::kAntisym: {
        // Steep antisymmetric ramp across the horizontal midline, one eighth
        // of the height wide on each side.
        const double mid = 0.5 * mesh.height;
        const double w = mesh.height / 8.0;
        for (const Vec2& p : mesh.vertices)
          mode.spatial.push_back(std::clamp((p.y - mid) / w, -1.0, 1.0));
        break;
      }
      case ModeConfig::Spatial::kNodal:
        if (static_cast<int>(mc.nodal.size()) != mesh.n_vertices())
          throw ConfigError("program[" + std::to_string(k) + "].spatial",
                            "nodal array length does not match the mesh");
        mode.spatial = mc.nodal;
        break;
    }
    program.modes.push_back(std::move(mode));
  }
  return program;
}

ScenarioSpec build_scenario_spec(const Mesh& mesh, const ScenarioConfig& config) {
  ScenarioSpec spec;
  spec.initial_crack = build_initial_crack(mesh, config.initial_crack);
  spec.program = build_program(mesh, config.program);
  spec.lambda = config.lambda;
  spec.max_components = config.max_components;
  spec.policy = config.policy;
  spec.horizon = config.horizon;
  return spec;
}

}  // namespace qsf
