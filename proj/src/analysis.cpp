#include "qsf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace qsf {

namespace {

struct Segment {
  Vec2 a, b;
};

// Quadratic piece q(t) = c2 t^2 + c1 t + c0 of the squared distance from
// x(t) = A + t d to one segment, on a regime where the nearest feature of the
// segment does not change.
struct Quadratic {
  double c2 = 0.0, c1 = 0.0, c0 = 0.0;
  double eval(double t) const { return (c2 * t + c1) * t + c0; }
};

Quadratic point_regime(Vec2 A, Vec2 d, Vec2 P) {
  const Vec2 r = A - P;
  return {dot(d, d), 2.0 * dot(r, d), dot(r, r)};
}

Quadratic line_regime(Vec2 A, Vec2 d, const Segment& s) {
  Vec2 e = s.b - s.a;
  const double len = norm(e);
  const Vec2 n{-e.y / len, e.x / len};
  const double u0 = dot(A - s.a, n);
  const double du = dot(d, n);
  return {du * du, 2.0 * u0 * du, u0 * u0};
}

// Distance from x(t) to the segment, valid on a subinterval where the regime
// is fixed; regime decided at the midpoint.
Quadratic regime_quadratic(Vec2 A, Vec2 d, const Segment& s, double tmid) {
  const Vec2 e = s.b - s.a;
  const double len2 = dot(e, e);
  const Vec2 x = A + tmid * d;
  const double u = dot(x - s.a, e) / len2;
  if (u <= 0.0) return point_regime(A, d, s.a);
  if (u >= 1.0) return point_regime(A, d, s.b);
  return line_regime(A, d, s);
}

// Parameters where x(t) crosses the perpendicular feet lines of the segment.
void regime_breakpoints(Vec2 A, Vec2 d, const Segment& s, std::vector<double>& out) {
  const Vec2 e = s.b - s.a;
  const double de = dot(d, e);
  if (de == 0.0) return;
  const double t0 = dot(s.a - A, e) / de;
  const double t1 = dot(s.b - A, e) / de;
  if (t0 > 0.0 && t0 < 1.0) out.push_back(t0);
  if (t1 > 0.0 && t1 < 1.0) out.push_back(t1);
}

double envelope(Vec2 A, Vec2 d, double t, const std::vector<Segment>& segs) {
  const Vec2 x = A + t * d;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : segs) best = std::min(best, point_segment_distance(x, s.a, s.b));
  return best;
}

// max over the segment [A,B] of the distance to the segment set. Each
// per-segment distance is convex along the edge, so the maximum of their
// lower envelope sits at an endpoint, a regime breakpoint, or a crossing of
// two of the quadratic pieces.
double directed_max_on_edge(Vec2 A, Vec2 B, const std::vector<Segment>& segs,
                            double lower_bound) {
  const Vec2 d = B - A;
  double best = std::max(envelope(A, d, 0.0, segs), envelope(A, d, 1.0, segs));

  // Convexity bound: the envelope never exceeds the smallest per-segment
  // endpoint maximum.
  double ub = std::numeric_limits<double>::infinity();
  for (const auto& s : segs) {
    const double fa = point_segment_distance(A, s.a, s.b);
    const double fb = point_segment_distance(B, s.a, s.b);
    ub = std::min(ub, std::max(fa, fb));
  }
  if (ub <= std::max(best, lower_bound)) return best;

  std::vector<double> cuts{0.0, 1.0};
  for (const auto& s : segs) regime_breakpoints(A, d, s, cuts);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  for (double t : cuts) best = std::max(best, envelope(A, d, t, segs));

  for (std::size_t q = 0; q + 1 < cuts.size(); ++q) {
    const double lo = cuts[q], hi = cuts[q + 1];
    const double tmid = 0.5 * (lo + hi);
    std::vector<Quadratic> pieces(segs.size());
    for (std::size_t j = 0; j < segs.size(); ++j)
      pieces[j] = regime_quadratic(A, d, segs[j], tmid);
    for (std::size_t j = 0; j < segs.size(); ++j) {
      for (std::size_t k = j + 1; k < segs.size(); ++k) {
        const double a = pieces[j].c2 - pieces[k].c2;
        const double b = pieces[j].c1 - pieces[k].c1;
        const double c = pieces[j].c0 - pieces[k].c0;
        double roots[2];
        int n_roots = 0;
        if (a == 0.0) {
          if (b != 0.0) roots[n_roots++] = -c / b;
        } else {
          const double disc = b * b - 4.0 * a * c;
          if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double qq = -0.5 * (b + (b >= 0.0 ? sq : -sq));
            roots[n_roots++] = qq / a;
            if (qq != 0.0) roots[n_roots++] = c / qq;
          }
        }
        for (int r = 0; r < n_roots; ++r) {
          const double t = roots[r];
          if (t > lo && t < hi) best = std::max(best, envelope(A, d, t, segs));
        }
      }
    }
  }
  return best;
}

std::vector<Segment> crack_segments(const Mesh& mesh, const CrackSet& crack) {
  std::vector<Segment> segs;
  segs.reserve(crack.edge_ids.size());
  for (int e : crack.edge_ids)
    segs.push_back({mesh.vertices[mesh.edges[e].v0], mesh.vertices[mesh.edges[e].v1]});
  return segs;
}

double directed_distance(const Mesh& mesh, const std::vector<Segment>& from,
                         const std::vector<Segment>& to) {
  if (from.empty()) return 0.0;                 // sup over the empty set
  if (to.empty()) return mesh.diameter;         // dist(x, empty) = diam
  double best = 0.0;
  for (const auto& e : from)
    best = std::max(best, directed_max_on_edge(e.a, e.b, to, best));
  return best;
}

}  // namespace

double hausdorff_distance(const Mesh& mesh, const CrackSet& k1, const CrackSet& k2) {
  const auto s1 = crack_segments(mesh, k1);
  const auto s2 = crack_segments(mesh, k2);
  return std::max(directed_distance(mesh, s1, s2), directed_distance(mesh, s2, s1));
}

MinimalityReport minimality_check(const Mesh& mesh, const EvolutionTrace& trace,
                                  const BoundaryProgram& program, int step_index,
                                  int n_probes, std::uint64_t seed, double tol) {
  if (step_index < 0 || step_index >= static_cast<int>(trace.steps.size()))
    throw std::out_of_range("step index outside the trace");
  const StepRecord& rec = trace.steps[step_index];
  const std::vector<double> g = program.value_at(rec.time, mesh.n_vertices());
  const DofMap dm = build_dofmap(mesh, rec.crack);
  const double lhs =
      script_E_lambda(mesh, rec.crack, dm, g, rec.field, trace.lambda, nullptr).total;

  std::vector<std::vector<int>> probe_sets;
  for (int e : mesh.interior_edges()) {
    if (rec.crack.contains(e)) continue;
    std::vector<int> ids = rec.crack.edge_ids;
    ids.push_back(e);
    if (crack_components(mesh, ids) <= trace.max_components) probe_sets.push_back({e});
  }

  std::mt19937_64 rng(seed);
  const std::vector<int> interior = mesh.interior_edges();
  for (int p = 0; p < n_probes; ++p) {
    const int target = 1 + static_cast<int>(rng() % 5);
    std::vector<int> ids = rec.crack.edge_ids;
    std::vector<int> added;
    for (int n = 0; n < target; ++n) {
      std::vector<int> options;
      for (int e : interior) {
        if (std::find(ids.begin(), ids.end(), e) != ids.end()) continue;
        std::vector<int> probe = ids;
        probe.push_back(e);
        if (crack_components(mesh, probe) <= trace.max_components) options.push_back(e);
      }
      if (options.empty()) break;
      const int e = options[rng() % options.size()];
      ids.push_back(e);
      added.push_back(e);
    }
    if (!added.empty()) {
      std::sort(added.begin(), added.end());
      probe_sets.push_back(added);
    }
  }

  MinimalityReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& added : probe_sets) {
    std::vector<int> ids = rec.crack.edge_ids;
    ids.insert(ids.end(), added.begin(), added.end());
    const CrackSet probe = make_crack(mesh, std::move(ids));
    const DofMap dm_probe = build_dofmap(mesh, probe);
    double rhs;
    if (dm_probe.corner_dof == dm.corner_dof) {
      // Identical DOF partition: the probe minimizer coincides with the
      // accepted one; only the surface term differs.
      rhs = lhs + (probe.total_length - rec.crack.total_length);
    } else {
      const Field anchor = transfer_field(rec.field, dm, dm_probe);
      rhs = script_E_lambda(mesh, probe, dm_probe, g, anchor, trace.lambda, nullptr)
                .total;
    }
    MinimalityReport::Probe row;
    row.step = step_index;
    row.added_edges = added;
    row.trace_total = lhs;
    row.probe_total = rhs;
    row.margin = rhs - lhs;
    row.pass = lhs <= rhs + tol * (1.0 + std::abs(lhs));
    report.worst_margin = std::min(report.worst_margin, row.margin);
    report.all_pass = report.all_pass && row.pass;
    report.probes.push_back(std::move(row));
  }
  if (report.probes.empty()) report.worst_margin = 0.0;
  return report;
}

BalanceReport energy_balance_check(const Mesh& mesh, const EvolutionTrace& trace,
                                   const BoundaryProgram& program,
                                   const std::vector<std::pair<double, double>>& pairs,
                                   double tol) {
  BalanceReport report;
  report.rho = rho_delta(mesh, program, trace.schedule, trace.lambda);
  const int nv = mesh.n_vertices();
  for (const auto& [s, t] : pairs) {
    if (!(s < t)) throw std::invalid_argument("balance pairs require s < t");
    const StepRecord& rs = interpolate(trace, s);
    const StepRecord& rt = interpolate(trace, t);
    const double es = script_E(mesh, rs.crack, program.value_at(s, nv)).total;
    const double et = script_E(mesh, rt.crack, program.value_at(t, nv)).total;
    BalanceReport::Row row;
    row.s = s;
    row.t = t;
    row.lhs = et - es;
    row.work = work_integral(mesh, trace, program, s, t);
    row.slack = row.work + report.rho - row.lhs;
    const double scale = std::abs(row.lhs) + std::abs(row.work) + report.rho;
    row.pass = row.slack >= -tol * (1.0 + scale);
    report.all_pass = report.all_pass && row.pass;
    report.worst_slack = std::min(report.worst_slack, row.slack);
    report.rows.push_back(row);
  }
  return report;
}

double release_rate(const Mesh& mesh, const CrackSet& crack,
                    const std::vector<double>& g_nodal, int candidate_edge) {
  if (candidate_edge < 0 || candidate_edge >= mesh.n_edges())
    throw MeshError("candidate edge out of range");
  if (!mesh.edge_is_interior(candidate_edge))
    throw MeshError("candidate edge must be interior");
  if (crack.contains(candidate_edge)) throw MeshError("candidate already in the crack");
  if (!crack.empty()) {
    const Edge& ce = mesh.edges[candidate_edge];
    bool incident = false;
    for (int e : crack.edge_ids) {
      const Edge& ke = mesh.edges[e];
      if (ke.v0 == ce.v0 || ke.v0 == ce.v1 || ke.v1 == ce.v0 || ke.v1 == ce.v1) {
        incident = true;
        break;
      }
    }
    if (!incident) throw MeshError("candidate edge is not incident to the crack");
  }
  const double bulk0 = script_E(mesh, crack, g_nodal).bulk;
  std::vector<int> ids = crack.edge_ids;
  ids.push_back(candidate_edge);
  const double bulk1 = script_E(mesh, make_crack(mesh, std::move(ids)), g_nodal).bulk;
  return (bulk0 - bulk1) / mesh.edge_length[candidate_edge];
}

namespace {

// Endpoints of a simple open path; empty when the edge set is not a path.
std::vector<int> path_endpoints(const Mesh& mesh, const CrackSet& crack) {
  if (crack.empty()) return {};
  if (crack.n_components != 1) return {};
  std::vector<int> degree(mesh.n_vertices(), 0);
  int n_vertices_touched = 0;
  for (int e : crack.edge_ids) {
    for (int v : {mesh.edges[e].v0, mesh.edges[e].v1}) {
      if (degree[v] == 0) ++n_vertices_touched;
      ++degree[v];
    }
  }
  std::vector<int> ends;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (degree[v] > 2) return {};
    if (degree[v] == 1) ends.push_back(v);
  }
  if (ends.size() != 2) return {};
  if (n_vertices_touched != crack.size() + 1) return {};
  return ends;
}

double tip_release(const Mesh& mesh, const CrackSet& crack, const std::vector<double>& g,
                   int tip_vertex) {
  double best = 0.0;
  bool any = false;
  for (int e : mesh.vertex_edges[tip_vertex]) {
    if (!mesh.edge_is_interior(e) || crack.contains(e)) continue;
    best = any ? std::max(best, release_rate(mesh, crack, g, e))
               : release_rate(mesh, crack, g, e);
    any = true;
  }
  return any ? best : 0.0;
}

}  // namespace

GriffithReport griffith_check(const Mesh& mesh, const EvolutionTrace& trace,
                              const BoundaryProgram& program, double tol_release) {
  GriffithReport report;

  // Structure detection: every nonempty crack must be a simple path growing
  // at a single moving endpoint. Record that endpoint per step.
  std::vector<int> tip_at_step(trace.steps.size(), -1);
  int anchored = -1, tip = -1;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const CrackSet& k = trace.steps[i].crack;
    if (k.empty()) continue;
    const std::vector<int> ends = path_endpoints(mesh, k);
    if (ends.empty()) return report;  // not a single simple path
    if (tip < 0) {
      // First nonempty crack: undetermined orientation until growth happens.
      anchored = ends[0];
      tip = ends[1];
    } else {
      const bool keeps_anchor =
          std::find(ends.begin(), ends.end(), anchored) != ends.end();
      const bool keeps_tip = std::find(ends.begin(), ends.end(), tip) != ends.end();
      if (keeps_anchor && keeps_tip) {
        // no growth
      } else if (keeps_anchor) {
        tip = ends[0] == anchored ? ends[1] : ends[0];
      } else if (keeps_tip) {
        // Growth happened at what we called the anchor; swap roles once.
        anchored = tip;
        tip = ends[0] == anchored ? ends[1] : ends[0];
      } else {
        return report;  // both endpoints moved: not single-tip growth
      }
    }
    tip_at_step[i] = tip;
  }
  report.applicable = true;

  const int nv = mesh.n_vertices();
  for (std::size_t i = 1; i < trace.steps.size(); ++i) {
    const StepRecord& rec = trace.steps[i];
    const StepRecord& prev = trace.steps[i - 1];
    GriffithReport::Row row;
    row.step = rec.index;
    row.time = rec.time;
    row.advance = rec.crack.total_length - prev.crack.total_length;
    if (rec.crack.empty()) {
      row.pass = true;
      report.rows.push_back(row);
      continue;
    }
    const std::vector<double> g = program.value_at(rec.time, nv);
    if (row.advance > 0.0) {
      row.tip_vertex = tip_at_step[i];
      row.release = tip_release(mesh, rec.crack, g, row.tip_vertex);
    } else {
      // Stationary: check the most critical endpoint.
      const std::vector<int> ends = path_endpoints(mesh, rec.crack);
      double best = 0.0;
      int best_v = ends.empty() ? -1 : ends[0];
      for (int v : ends) {
        const double r = tip_release(mesh, rec.crack, g, v);
        if (r >= best) {
          best = r;
          best_v = v;
        }
      }
      row.tip_vertex = best_v;
      row.release = best;
    }
    row.slack = 1.0 - row.release;
    row.complementarity = row.slack * row.advance / trace.schedule.delta;
    const double residual =
        row.advance > 0.0 ? std::abs(row.slack) : std::max(0.0, -row.slack);
    row.pass = residual <= tol_release;
    report.worst_residual = std::max(report.worst_residual, residual);
    report.all_pass = report.all_pass && row.pass;
    report.rows.push_back(row);
  }
  return report;
}

SlopeReport derivative_slope_check(const Mesh& mesh, const EvolutionTrace& trace,
                                   const BoundaryProgram& program, double tol_slope) {
  if (trace.steps.size() < 3)
    throw std::invalid_argument("slope check needs at least 3 steps");
  SlopeReport report;
  const int nv = mesh.n_vertices();
  for (std::size_t j = 2; j < trace.steps.size(); ++j) {
    const StepRecord& rj = trace.steps[j];
    const std::vector<double> g = program.value_at(rj.time, nv);
    double e_at_j = std::numeric_limits<double>::quiet_NaN();
    for (int back = 1; back <= 2; ++back) {
      const StepRecord& rs = trace.steps[j - back];
      SlopeReport::Row row;
      row.j = static_cast<int>(j);
      row.s = rs.time;
      if (rs.crack.edge_ids == rj.crack.edge_ids) {
        row.slope = 0.0;
      } else {
        if (std::isnan(e_at_j)) e_at_j = script_E(mesh, rj.crack, g).total;
        const double e_at_s = script_E(mesh, rs.crack, g).total;
        row.slope = (e_at_s - e_at_j) / (rs.time - rj.time);
      }
      const double scale =
          1.0 + std::abs(rj.energies.bulk) + std::abs(rj.energies.surface);
      row.pass = row.slope <= tol_slope * scale;
      report.max_slope = std::max(report.max_slope, row.slope);
      report.all_pass = report.all_pass && row.pass;
      report.rows.push_back(row);
    }
  }
  return report;
}

DeltaStudy delta_convergence_study(const Mesh& mesh, const ScenarioSpec& scenario,
                                   const std::vector<double>& deltas,
                                   int n_sample_times) {
  if (deltas.size() < 2) throw std::invalid_argument("need at least two deltas");
  for (std::size_t k = 0; k + 1 < deltas.size(); ++k)
    if (!(deltas[k] > deltas[k + 1]))
      throw std::invalid_argument("deltas must be strictly decreasing");

  DeltaStudy study;
  study.deltas = deltas;
  for (int q = 0; q < n_sample_times; ++q)
    study.sample_times.push_back(scenario.horizon * q / (n_sample_times - 1));

  std::vector<EvolutionTrace> traces;
  for (double d : deltas) {
    traces.push_back(run(mesh, scenario.initial_crack, scenario.program,
                         Schedule::make(scenario.horizon, d), scenario.lambda,
                         scenario.max_components, scenario.policy));
  }
  const EvolutionTrace& finest = traces.back();
  for (const auto& trace : traces) {
    std::vector<double> row;
    for (double t : study.sample_times)
      row.push_back(hausdorff_distance(mesh, interpolate(trace, t).crack,
                                       interpolate(finest, t).crack));
    study.distance.push_back(std::move(row));
    const EnergyBreakdown& ef = trace.steps.back().energies;
    const EnergyBreakdown& er = finest.steps.back().energies;
    study.final_energy_diff.push_back(std::abs((ef.bulk + ef.surface) -
                                               (er.bulk + er.surface)));
  }
  return study;
}

}  // namespace qsf
