#include "qsf/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qsf/config.hpp"

namespace qsf {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string mesh_to_json(const Mesh& mesh) {
  json j;
  j["width"] = mesh.width;
  j["height"] = mesh.height;
  j["nx"] = mesh.nx;
  j["ny"] = mesh.ny;
  j["hash"] = mesh.hash;
  json sides = json::array();
  // Recover the Dirichlet side set from the boundary tags.
  const double eps = 1e-12 * mesh.diameter;
  bool left = false, right = false, bottom = false, top = false;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (mesh.edge_tag[e] != BoundaryTag::kDirichlet) continue;
    const Vec2 a = mesh.vertices[mesh.edges[e].v0];
    const Vec2 b = mesh.vertices[mesh.edges[e].v1];
    if (a.x < eps && b.x < eps) left = true;
    else if (a.x > mesh.width - eps && b.x > mesh.width - eps) right = true;
    else if (a.y < eps && b.y < eps) bottom = true;
    else top = true;
  }
  if (left) sides.push_back("left");
  if (right) sides.push_back("right");
  if (bottom) sides.push_back("bottom");
  if (top) sides.push_back("top");
  j["dirichlet_sides"] = sides;

  json verts = json::array();
  for (const Vec2& p : mesh.vertices) verts.push_back(json::array({p.x, p.y}));
  j["vertices"] = verts;
  json tris = json::array();
  for (const auto& t : mesh.triangles) tris.push_back(json::array({t[0], t[1], t[2]}));
  j["triangles"] = tris;
  json edges = json::array();
  for (const Edge& e : mesh.edges) edges.push_back(json::array({e.v0, e.v1}));
  j["edges"] = edges;
  return j.dump();
}

Mesh mesh_from_json_file(const std::string& path) {
  const json j = json::parse(read_text_file(path));
  std::vector<Side> sides;
  for (const auto& s : j.at("dirichlet_sides"))
    sides.push_back(side_from_string(s.get<std::string>(), "dirichlet_sides"));
  Mesh mesh = build_rect_mesh(j.at("width").get<double>(), j.at("height").get<double>(),
                              j.at("nx").get<int>(), j.at("ny").get<int>(), sides);
  if (j.contains("hash") && j.at("hash").get<std::uint64_t>() != mesh.hash)
    throw MeshError("mesh file does not match its recorded hash");
  return mesh;
}

std::string crack_to_json(const Mesh& mesh, const CrackSet& crack, int step, double time) {
  json j;
  j["step"] = step;
  j["time"] = time;
  j["edges"] = crack.edge_ids;
  j["n_components"] = crack.n_components;
  j["total_length"] = crack.total_length;
  json segs = json::array();
  for (int e : crack.edge_ids) {
    const Vec2 a = mesh.vertices[mesh.edges[e].v0];
    const Vec2 b = mesh.vertices[mesh.edges[e].v1];
    segs.push_back(json::array({json::array({a.x, a.y}), json::array({b.x, b.y})}));
  }
  j["segments"] = segs;
  return j.dump();
}

std::string field_to_json(const Field& field) {
  json j;
  j["dofmap_hash"] = field.dofmap_hash;
  j["values"] = field.values;
  return j.dump();
}

std::string trace_to_csv(const EvolutionTrace& trace) {
  std::ostringstream os;
  os << "# lambda=" << format_double(trace.lambda) << " m=" << trace.max_components
     << " delta=" << format_double(trace.schedule.delta)
     << " T=" << format_double(trace.schedule.horizon) << "\n";
  os << "# " << trace.search_note << "\n";
  os << "i,t,n_crack_edges,crack_length,n_components,bulk,surface,penalty,total,"
        "increment_norm,candidates_evaluated\n";
  for (const auto& rec : trace.steps) {
    os << rec.index << ',' << format_double(rec.time) << ',' << rec.crack.size() << ','
       << format_double(rec.crack.total_length) << ',' << rec.crack.n_components << ','
       << format_double(rec.energies.bulk) << ',' << format_double(rec.energies.surface)
       << ',' << format_double(rec.energies.penalty) << ','
       << format_double(rec.energies.total) << ',' << format_double(rec.increment_norm)
       << ',' << rec.candidates_evaluated << "\n";
  }
  return os.str();
}

std::string balance_to_csv(const BalanceReport& report) {
  std::ostringstream os;
  os << "s,t,lhs,work,rho,slack,pass\n";
  for (const auto& r : report.rows)
    os << format_double(r.s) << ',' << format_double(r.t) << ',' << format_double(r.lhs)
       << ',' << format_double(r.work) << ',' << format_double(report.rho) << ','
       << format_double(r.slack) << ',' << (r.pass ? 1 : 0) << "\n";
  return os.str();
}

std::string minimality_to_csv(const MinimalityReport& report) {
  std::ostringstream os;
  os << "step,n_added,added_edges,trace_total,probe_total,margin,pass\n";
  for (const auto& r : report.probes) {
    os << r.step << ',' << r.added_edges.size() << ',';
    for (std::size_t k = 0; k < r.added_edges.size(); ++k)
      os << (k ? ";" : "") << r.added_edges[k];
    os << ',' << format_double(r.trace_total) << ',' << format_double(r.probe_total)
       << ',' << format_double(r.margin) << ',' << (r.pass ? 1 : 0) << "\n";
  }
  return os.str();
}

std::string griffith_to_csv(const GriffithReport& report) {
  std::ostringstream os;
  os << "step,time,tip_vertex,advance,release,slack,complementarity,pass\n";
  for (const auto& r : report.rows)
    os << r.step << ',' << format_double(r.time) << ',' << r.tip_vertex << ','
       << format_double(r.advance) << ',' << format_double(r.release) << ','
       << format_double(r.slack) << ',' << format_double(r.complementarity) << ','
       << (r.pass ? 1 : 0) << "\n";
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string svg_frame(const Mesh& mesh, const CrackSet& crack, const Field* field,
                      const DofMap* dm, double value_scale) {
  const double pad = 0.05 * std::max(mesh.width, mesh.height);
  const double scale = 512.0 / std::max(mesh.width, mesh.height);
  auto X = [&](double x) { return (x + pad) * scale; };
  auto Y = [&](double y) { return (mesh.height + pad - y) * scale; };

  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='"
     << format_double((mesh.width + 2 * pad) * scale) << "' height='"
     << format_double((mesh.height + 2 * pad) * scale) << "'>\n";
  if (field && dm) {
    const double vs = value_scale > 0 ? value_scale : 1.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      double avg = 0.0;
      for (int c = 0; c < 3; ++c) avg += field->values[dm->dof(t, c)] / 3.0;
      const int gray =
          std::clamp(static_cast<int>(128.0 + 127.0 * avg / vs), 0, 255);
      os << "<polygon points='";
      for (int c = 0; c < 3; ++c) {
        const Vec2 p = mesh.vertices[mesh.triangles[t][c]];
        os << format_double(X(p.x)) << ',' << format_double(Y(p.y)) << ' ';
      }
      os << "' fill='rgb(" << gray << ',' << gray << ',' << gray << ")'/>\n";
    }
  }
  os << "<rect x='" << format_double(X(0)) << "' y='" << format_double(Y(mesh.height))
     << "' width='" << format_double(mesh.width * scale) << "' height='"
     << format_double(mesh.height * scale)
     << "' fill='none' stroke='black' stroke-width='1'/>\n";
  for (int e : crack.edge_ids) {
    const Vec2 a = mesh.vertices[mesh.edges[e].v0];
    const Vec2 b = mesh.vertices[mesh.edges[e].v1];
    os << "<line x1='" << format_double(X(a.x)) << "' y1='" << format_double(Y(a.y))
       << "' x2='" << format_double(X(b.x)) << "' y2='" << format_double(Y(b.y))
       << "' stroke='red' stroke-width='2'/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

LoadedRun load_run(const std::string& dir) {
  LoadedRun run;
  run.mesh = mesh_from_json_file(dir + "/mesh.json");

  const std::string csv = read_text_file(dir + "/trace.csv");
  std::istringstream lines(csv);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'i') continue;
    std::istringstream cells(line);
    std::string cell;
    std::vector<std::string> row;
    while (std::getline(cells, cell, ',')) row.push_back(cell);
    if (row.size() < 11) throw std::runtime_error("malformed trace row in " + dir);
    run.times.push_back(std::stod(row[1]));
    run.totals.push_back(std::stod(row[8]));
  }

  for (std::size_t i = 0; i < run.times.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "/snapshots/step_%04zu.json", i);
    const json j = json::parse(read_text_file(dir + name));
    run.cracks.push_back(make_crack(run.mesh, j.at("edges").get<std::vector<int>>()));
  }
  return run;
}

}  // namespace qsf
