#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qsf/crack.hpp"
#include "qsf/evolution.hpp"
#include "qsf/mesh.hpp"

namespace qsf {

/// Hausdorff distance between two edge sets (edges as closed segments).
/// Conventions: d(empty, empty) = 0 and d(empty, K) = diam(domain) for
/// nonempty K. The maximum over each segment is located exactly from the
/// segment endpoints and the crossings of the per-segment distance
/// functions.
double hausdorff_distance(const Mesh& mesh, const CrackSet& k1, const CrackSet& k2);

struct MinimalityReport {
  struct Probe {
    int step = 0;
    std::vector<int> added_edges;
    double trace_total = 0.0;
    double probe_total = 0.0;
    double margin = 0.0;  // probe_total - trace_total
    bool pass = false;
  };
  std::vector<Probe> probes;
  bool all_pass = true;
  double worst_margin = 0.0;
};

/// Checks the unilateral minimality of the accepted state at step i, with the
/// accepted displacement as the penalty anchor: probes every admissible
/// single-edge extension plus n_probes random supersets within the component
/// budget.
MinimalityReport minimality_check(const Mesh& mesh, const EvolutionTrace& trace,
                                  const BoundaryProgram& program, int step_index,
                                  int n_probes, std::uint64_t seed, double tol = 1e-8);

struct BalanceReport {
  struct Row {
    double s = 0.0, t = 0.0;
    double lhs = 0.0;   // E(g(t),K(t)) - E(g(s),K(s)), fresh harmonic solves
    double work = 0.0;  // work integral over [s,t]
    double slack = 0.0; // work + rho - lhs
    bool pass = false;
  };
  std::vector<Row> rows;
  double rho = 0.0;
  bool all_pass = true;
  double worst_slack = 0.0;
};

BalanceReport energy_balance_check(const Mesh& mesh, const EvolutionTrace& trace,
                                   const BoundaryProgram& program,
                                   const std::vector<std::pair<double, double>>& pairs,
                                   double tol = 1e-8);

/// Finite-difference energy release rate of extending `crack` by the
/// candidate edge: drop in the minimized bulk energy per unit added length.
/// The candidate must touch the crack unless the crack is empty.
double release_rate(const Mesh& mesh, const CrackSet& crack,
                    const std::vector<double>& g_nodal, int candidate_edge);

struct GriffithReport {
  struct Row {
    int step = 0;
    double time = 0.0;
    int tip_vertex = -1;
    double advance = 0.0;        // crack length added at this step
    double release = 0.0;        // G at the tip, toughness-normalized
    double slack = 0.0;          // 1 - G
    double complementarity = 0.0;  // (1 - G) * advance / delta
    bool pass = false;
  };
  bool applicable = false;  // single-tip path growth detected
  std::vector<Row> rows;
  bool all_pass = true;
  double worst_residual = 0.0;
};

/// Griffith conditions along a single-tip trace: nonnegative advance,
/// G <= 1 + tol at rest, |1 - G| <= tol while advancing.
GriffithReport griffith_check(const Mesh& mesh, const EvolutionTrace& trace,
                              const BoundaryProgram& program, double tol_release = 0.2);

struct SlopeReport {
  struct Row {
    int j = 0;
    double s = 0.0;
    double slope = 0.0;
    bool pass = false;
  };
  std::vector<Row> rows;
  double max_slope = 0.0;
  bool all_pass = true;
};

/// One-sided difference quotients of the crack-frozen energy,
/// [E(g(t_j),K(s)) - E(g(t_j),K(t_j))]/(s - t_j) for s = t_{j-1}, t_{j-2};
/// each must stay below tol_slope * (1 + local energy scale).
SlopeReport derivative_slope_check(const Mesh& mesh, const EvolutionTrace& trace,
                                   const BoundaryProgram& program,
                                   double tol_slope = 0.5);

struct ScenarioSpec {
  CrackSet initial_crack;
  BoundaryProgram program;
  double lambda = 1.0;
  int max_components = 1;
  ExtensionPolicy policy;
  double horizon = 1.0;
};

struct DeltaStudy {
  std::vector<double> deltas;        // strictly decreasing; last is the reference
  std::vector<double> sample_times;
  // distance[d][q] = Hausdorff distance between the delta_d crack and the
  // finest-delta crack at sample time q.
  std::vector<std::vector<double>> distance;
  std::vector<double> final_energy_diff;  // vs the finest run, per delta
};

DeltaStudy delta_convergence_study(const Mesh& mesh, const ScenarioSpec& scenario,
                                   const std::vector<double>& deltas,
                                   int n_sample_times = 11);

}  // namespace qsf
