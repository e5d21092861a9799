#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qsf/crack.hpp"
#include "qsf/mesh.hpp"
#include "qsf/solver.hpp"

namespace qsf {

/// Continuous piecewise-linear time profile given by (time, value) knots,
/// constant outside the knot range.
struct TimeProfile {
  std::vector<std::pair<double, double>> knots;

  double value(double t) const;
  double rate(double t) const;  // right derivative; 0 outside the knot range
};

struct BoundaryMode {
  TimeProfile profile;
  std::vector<double> spatial;  // nodal field on the uncracked mesh
};

/// Time-dependent boundary displacement g(t) = sum_k s_k(t) * phi_k.
struct BoundaryProgram {
  std::vector<BoundaryMode> modes;

  std::vector<double> value_at(double t, int n_vertices) const;
  std::vector<double> rate_at(double t, int n_vertices) const;
  /// Sorted knot times clipped to [0, horizon], always containing 0 and horizon.
  std::vector<double> breakpoints(double horizon) const;
  /// sup over [0, horizon] of the nodal max norm of g(t).
  double sup_norm(double horizon, int n_vertices) const;
};

struct Schedule {
  double horizon = 0.0;
  double delta = 0.0;
  int n_steps = 0;

  static Schedule make(double horizon, double delta);
  double time(int i) const { return i * delta; }
};

struct StepRecord {
  int index = 0;
  double time = 0.0;
  CrackSet crack;
  Field field;
  EnergyBreakdown energies;
  double increment_norm = 0.0;
  long candidates_evaluated = 0;
};

struct EvolutionTrace {
  Schedule schedule;
  double lambda = 0.0;
  int max_components = 1;
  ExtensionPolicy policy;
  std::uint64_t mesh_hash = 0;
  CrackSet initial_crack;
  std::string search_note;  // documents the restricted search family
  std::vector<StepRecord> steps;
};

/// One incremental minimization: iterated greedy descent of the penalized
/// energy over the policy's crack extensions, anchored at the previous field.
/// Candidate evaluation parallelism is capped by the QC_THREADS environment
/// variable; results do not depend on it.
StepRecord step(const Mesh& mesh, const StepRecord& prev,
                const std::vector<double>& g_nodal, double lambda, int max_components,
                const ExtensionPolicy& policy);

EvolutionTrace run(const Mesh& mesh, const CrackSet& initial_crack,
                   const BoundaryProgram& program, const Schedule& schedule,
                   double lambda, int max_components, const ExtensionPolicy& policy);

/// Right-open piecewise-constant interpolant; t = horizon maps to the last record.
const StepRecord& interpolate(const EvolutionTrace& trace, double t);

/// 2 * integral over [s,t] of (grad u^delta(tau) | grad gdot(tau)) dtau, with
/// gdot exact per knot interval and u^delta piecewise constant per step.
double work_integral(const Mesh& mesh, const EvolutionTrace& trace,
                     const BoundaryProgram& program, double s, double t);

/// rho(delta) = sigma(delta) * integral of (|grad gdot| + lambda*|gdot|),
/// where sigma(delta) is the largest per-step integral of |grad gdot| + |gdot|.
double rho_delta(const Mesh& mesh, const BoundaryProgram& program,
                 const Schedule& schedule, double lambda);

/// Slack (rhs - lhs) of the discrete energy estimate between step indices
/// i < j:
///   bulk_j + surf_j + lambda*sum ||u_h - u_{h-1}||^2
///     <= bulk_i + surf_i + work(i,j) + rho(delta).
double discrete_estimate_slack(const Mesh& mesh, const EvolutionTrace& trace,
                               const BoundaryProgram& program, int i, int j);

struct AprioriBounds {
  double bound = 0.0;
  double sup_bulk = 0.0;
  double sup_surface = 0.0;
  double sum_increments_sq = 0.0;
  bool pass = false;
};

/// Explicit a priori bound from the initial state and the program, checked
/// against the trace.
AprioriBounds apriori_bounds(const Mesh& mesh, const EvolutionTrace& trace,
                             const BoundaryProgram& program);

}  // namespace qsf
