#include "qsf/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace qsf {

double TimeProfile::value(double t) const {
  if (knots.empty()) return 0.0;
  if (t <= knots.front().first) return knots.front().second;
  if (t >= knots.back().first) return knots.back().second;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const auto [t0, v0] = knots[k];
    const auto [t1, v1] = knots[k + 1];
    if (t >= t0 && t <= t1) {
      if (t1 == t0) return v1;
      return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }
  }
  return knots.back().second;
}

double TimeProfile::rate(double t) const {
  if (knots.size() < 2) return 0.0;
  if (t < knots.front().first || t >= knots.back().first) return 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const auto [t0, v0] = knots[k];
    const auto [t1, v1] = knots[k + 1];
    if (t >= t0 && t < t1) return (v1 - v0) / (t1 - t0);
  }
  return 0.0;
}

std::vector<double> BoundaryProgram::value_at(double t, int n_vertices) const {
  std::vector<double> g(n_vertices, 0.0);
  for (const auto& mode : modes) {
    const double s = mode.profile.value(t);
    if (s == 0.0) continue;
    for (int v = 0; v < n_vertices; ++v) g[v] += s * mode.spatial[v];
  }
  return g;
}

std::vector<double> BoundaryProgram::rate_at(double t, int n_vertices) const {
  std::vector<double> g(n_vertices, 0.0);
  for (const auto& mode : modes) {
    const double s = mode.profile.rate(t);
    if (s == 0.0) continue;
    for (int v = 0; v < n_vertices; ++v) g[v] += s * mode.spatial[v];
  }
  return g;
}

std::vector<double> BoundaryProgram::breakpoints(double horizon) const {
  std::vector<double> ts{0.0, horizon};
  for (const auto& mode : modes)
    for (const auto& [t, v] : mode.profile.knots)
      if (t > 0.0 && t < horizon) ts.push_back(t);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  return ts;
}

double BoundaryProgram::sup_norm(double horizon, int n_vertices) const {
  double m = 0.0;
  for (double t : breakpoints(horizon)) m = std::max(m, max_abs(value_at(t, n_vertices)));
  return m;
}

Schedule Schedule::make(double horizon, double delta) {
  if (horizon <= 0.0) throw std::invalid_argument("horizon must be positive");
  if (delta <= 0.0) throw std::invalid_argument("delta must be positive");
  if (delta > horizon) throw std::invalid_argument("delta exceeds the horizon");
  Schedule s;
  s.horizon = horizon;
  s.delta = delta;
  s.n_steps = static_cast<int>(std::floor(horizon / delta + 1e-9));
  return s;
}

namespace {

int thread_budget() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("QC_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
  }
  return static_cast<int>(std::min(hw, 8u));
}

template <typename F>
void parallel_for(int n, F&& body) {
  const int threads = std::min(thread_budget(), n);
  if (threads <= 1 || n < 8) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += threads) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string edge_list_string(const std::vector<int>& ids) {
  std::ostringstream os;
  os << "{";
  for (std::size_t k = 0; k < ids.size(); ++k) os << (k ? "," : "") << ids[k];
  os << "}";
  return os.str();
}

}  // namespace

StepRecord step(const Mesh& mesh, const StepRecord& prev,
                const std::vector<double>& g_nodal, double lambda, int max_components,
                const ExtensionPolicy& policy) {
  constexpr double kRelTol = 1e-10;

  const DofMap dm_prev = build_dofmap(mesh, prev.crack);
  if (prev.field.dofmap_hash != dm_prev.hash)
    throw SolverError("previous field does not match the previous crack space");

  CrackSet current = prev.crack;
  DofMap dm_cur = dm_prev;
  Field anchor_cur = prev.field;
  Field u_cur;
  EnergyBreakdown e_cur =
      script_E_lambda(mesh, current, dm_cur, g_nodal, anchor_cur, lambda, &u_cur);
  long evaluated = 0;

  for (;;) {
    const std::vector<CrackSet> candidates =
        admissible_extensions(mesh, current, max_components, policy);
    if (candidates.empty()) break;

    std::vector<double> totals(candidates.size(),
                               std::numeric_limits<double>::infinity());
    std::vector<std::string> errors(candidates.size());
    std::mutex err_mutex;

    parallel_for(static_cast<int>(candidates.size()), [&](int idx) {
      const CrackSet& cand = candidates[idx];
      try {
        const DofMap dm_cand = build_dofmap(mesh, cand);
        if (dm_cand.corner_dof == dm_cur.corner_dof) {
          // Identical DOF partition: the minimizer is unchanged and only the
          // surface term grows, so this candidate can never improve. Summed in
          // the same order as a full evaluation so ties break identically.
          totals[idx] = (e_cur.bulk + cand.total_length) + e_cur.penalty;
          return;
        }
        const Field anchor = transfer_field(prev.field, dm_prev, dm_cand);
        const EnergyBreakdown e =
            script_E_lambda(mesh, cand, dm_cand, g_nodal, anchor, lambda, nullptr);
        totals[idx] = e.total;
      } catch (const std::exception& ex) {
        std::lock_guard<std::mutex> lock(err_mutex);
        errors[idx] = ex.what();
      }
    });

    for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
      if (!errors[idx].empty())
        throw SolverError("candidate " + edge_list_string(candidates[idx].edge_ids) +
                          ": " + errors[idx]);
    }
    evaluated += static_cast<long>(candidates.size());

    // Ordered reduction over the canonical candidate order; strict '<' keeps
    // the earliest (fewest added edges, lexicographically smallest) on ties.
    int best = -1;
    double best_total = std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < candidates.size(); ++idx) {
      if (totals[idx] < best_total) {
        best_total = totals[idx];
        best = static_cast<int>(idx);
      }
    }
    const double threshold = kRelTol * std::max(1.0, std::abs(e_cur.total));
    if (best < 0 || !(e_cur.total - best_total > threshold)) break;

    current = candidates[best];
    dm_cur = build_dofmap(mesh, current);
    anchor_cur = transfer_field(prev.field, dm_prev, dm_cur);
    e_cur = script_E_lambda(mesh, current, dm_cur, g_nodal, anchor_cur, lambda, &u_cur);
  }

  StepRecord rec;
  rec.index = prev.index + 1;
  rec.time = prev.time;
  rec.crack = current;
  rec.field = u_cur;
  rec.energies = e_cur;
  const Field anchor_final = transfer_field(prev.field, dm_prev, dm_cur);
  rec.increment_norm = lumped_l2_diff(mesh, dm_cur, u_cur.values, anchor_final.values);
  rec.candidates_evaluated = evaluated;
  return rec;
}

EvolutionTrace run(const Mesh& mesh, const CrackSet& initial_crack,
                   const BoundaryProgram& program, const Schedule& schedule,
                   double lambda, int max_components, const ExtensionPolicy& policy) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (max_components < 1) throw std::invalid_argument("component budget must be >= 1");
  if (initial_crack.n_components > max_components)
    throw std::invalid_argument("initial crack exceeds the component budget");

  EvolutionTrace trace;
  trace.schedule = schedule;
  trace.lambda = lambda;
  trace.max_components = max_components;
  trace.policy = policy;
  trace.mesh_hash = mesh.hash;
  trace.initial_crack = initial_crack;
  trace.search_note =
      "per-step minimization restricted to " + policy_to_string(policy) +
      " extensions, iterated greedy descent; not a global minimum over all supersets";

  const int nv = mesh.n_vertices();
  const DofMap dm0 = build_dofmap(mesh, initial_crack);
  StepRecord rec0;
  rec0.index = 0;
  rec0.time = 0.0;
  rec0.crack = initial_crack;
  rec0.field = solve_harmonic(mesh, initial_crack, dm0, program.value_at(0.0, nv));
  rec0.energies = energy(mesh, initial_crack, dm0, rec0.field);
  trace.steps.push_back(std::move(rec0));

  for (int i = 1; i <= schedule.n_steps; ++i) {
    const double t = schedule.time(i);
    StepRecord rec = step(mesh, trace.steps.back(), program.value_at(t, nv), lambda,
                          max_components, policy);
    rec.index = i;
    rec.time = t;
    trace.steps.push_back(std::move(rec));
  }
  return trace;
}

const StepRecord& interpolate(const EvolutionTrace& trace, double t) {
  const double T = trace.schedule.horizon;
  if (!(t >= 0.0 && t <= T)) throw std::out_of_range("time outside [0, horizon]");
  int i = std::min(static_cast<int>(std::floor(t / trace.schedule.delta)),
                   static_cast<int>(trace.steps.size()) - 1);
  while (i + 1 < static_cast<int>(trace.steps.size()) && trace.steps[i + 1].time <= t) ++i;
  while (i > 0 && trace.steps[i].time > t) --i;
  return trace.steps[i];
}

namespace {

struct IntervalNorms {
  std::vector<double> times;           // breakpoints, size n+1
  std::vector<double> grad_rate_norm;  // per interval
  std::vector<double> rate_norm;
};

IntervalNorms program_interval_norms(const Mesh& mesh, const BoundaryProgram& program,
                                     double horizon) {
  const int nk = static_cast<int>(program.modes.size());
  const DofMap dm = build_dofmap(mesh, CrackSet{});
  const std::vector<double> mass = lumped_mass(mesh, dm);

  std::vector<Field> mode_fields;
  mode_fields.reserve(nk);
  for (const auto& mode : program.modes) mode_fields.push_back(nodal_to_field(dm, mode.spatial));

  std::vector<std::vector<double>> gram_grad(nk, std::vector<double>(nk, 0.0));
  std::vector<std::vector<double>> gram_mass(nk, std::vector<double>(nk, 0.0));
  for (int k = 0; k < nk; ++k) {
    for (int l = k; l < nk; ++l) {
      double gg = grad_inner(mesh, dm, mode_fields[k], dm, mode_fields[l]);
      double mm = 0.0;
      for (int d = 0; d < dm.n_dofs; ++d)
        mm += mass[d] * mode_fields[k].values[d] * mode_fields[l].values[d];
      gram_grad[k][l] = gram_grad[l][k] = gg;
      gram_mass[k][l] = gram_mass[l][k] = mm;
    }
  }

  IntervalNorms out;
  out.times = program.breakpoints(horizon);
  for (std::size_t q = 0; q + 1 < out.times.size(); ++q) {
    const double mid = 0.5 * (out.times[q] + out.times[q + 1]);
    std::vector<double> r(nk);
    for (int k = 0; k < nk; ++k) r[k] = program.modes[k].profile.rate(mid);
    double gg = 0.0, mm = 0.0;
    for (int k = 0; k < nk; ++k)
      for (int l = 0; l < nk; ++l) {
        gg += r[k] * r[l] * gram_grad[k][l];
        mm += r[k] * r[l] * gram_mass[k][l];
      }
    out.grad_rate_norm.push_back(std::sqrt(std::max(0.0, gg)));
    out.rate_norm.push_back(std::sqrt(std::max(0.0, mm)));
  }
  return out;
}

double integrate_norms(const IntervalNorms& norms, double a, double b,
                       double grad_weight, double rate_weight) {
  double acc = 0.0;
  for (std::size_t q = 0; q + 1 < norms.times.size(); ++q) {
    const double lo = std::max(a, norms.times[q]);
    const double hi = std::min(b, norms.times[q + 1]);
    if (hi > lo)
      acc += (hi - lo) * (grad_weight * norms.grad_rate_norm[q] +
                          rate_weight * norms.rate_norm[q]);
  }
  return acc;
}

}  // namespace

double work_integral(const Mesh& mesh, const EvolutionTrace& trace,
                     const BoundaryProgram& program, double s, double t) {
  if (t < s) throw std::invalid_argument("work_integral requires s <= t");
  if (s == t) return 0.0;
  const int nv = mesh.n_vertices();
  const int nk = static_cast<int>(program.modes.size());

  // Per-step gradient inner products against each mode, computed lazily.
  std::vector<std::vector<double>> mode_inner(trace.steps.size());
  auto step_mode_inner = [&](int i) -> const std::vector<double>& {
    if (mode_inner[i].empty() && nk > 0) {
      const DofMap dm = build_dofmap(mesh, trace.steps[i].crack);
      mode_inner[i].resize(nk);
      for (int k = 0; k < nk; ++k) {
        const Field phi = nodal_to_field(dm, program.modes[k].spatial);
        mode_inner[i][k] = grad_inner(mesh, dm, trace.steps[i].field, dm, phi);
      }
    }
    return mode_inner[i];
  };
  (void)nv;

  std::vector<double> cuts = program.breakpoints(trace.schedule.horizon);
  for (const auto& rec : trace.steps)
    if (rec.time > 0.0 && rec.time < trace.schedule.horizon) cuts.push_back(rec.time);
  cuts.push_back(s);
  cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double acc = 0.0;
  for (std::size_t q = 0; q + 1 < cuts.size(); ++q) {
    const double lo = cuts[q], hi = cuts[q + 1];
    if (lo < s || hi > t || hi <= lo) continue;
    const double mid = 0.5 * (lo + hi);
    const StepRecord& rec = interpolate(trace, mid);
    const auto& inner = step_mode_inner(rec.index);
    double val = 0.0;
    for (int k = 0; k < nk; ++k) val += program.modes[k].profile.rate(mid) * inner[k];
    acc += 2.0 * (hi - lo) * val;
  }
  return acc;
}

double rho_delta(const Mesh& mesh, const BoundaryProgram& program,
                 const Schedule& schedule, double lambda) {
  const IntervalNorms norms = program_interval_norms(mesh, program, schedule.horizon);
  double sigma = 0.0;
  for (int r = 0; r < schedule.n_steps; ++r) {
    const double a = schedule.time(r);
    const double b = std::min(schedule.time(r + 1), schedule.horizon);
    sigma = std::max(sigma, integrate_norms(norms, a, b, 1.0, 1.0));
  }
  const double total = integrate_norms(norms, 0.0, schedule.horizon, 1.0, lambda);
  return sigma * total;
}

double discrete_estimate_slack(const Mesh& mesh, const EvolutionTrace& trace,
                               const BoundaryProgram& program, int i, int j) {
  if (!(0 <= i && i < j && j < static_cast<int>(trace.steps.size())))
    throw std::out_of_range("invalid step pair");
  const StepRecord& ri = trace.steps[i];
  const StepRecord& rj = trace.steps[j];
  double increments = 0.0;
  for (int h = i + 1; h <= j; ++h)
    increments += trace.steps[h].increment_norm * trace.steps[h].increment_norm;
  const double lhs =
      rj.energies.bulk + rj.energies.surface + trace.lambda * increments;
  const double rhs = ri.energies.bulk + ri.energies.surface +
                     work_integral(mesh, trace, program, ri.time, rj.time) +
                     rho_delta(mesh, program, trace.schedule, trace.lambda);
  return rhs - lhs;
}

AprioriBounds apriori_bounds(const Mesh& mesh, const EvolutionTrace& trace,
                             const BoundaryProgram& program) {
  const IntervalNorms norms = program_interval_norms(mesh, program, trace.schedule.horizon);
  const double grad_integral = integrate_norms(norms, 0.0, trace.schedule.horizon, 1.0, 0.0);
  const double rho = rho_delta(mesh, program, trace.schedule, trace.lambda);
  const double base =
      trace.steps[0].energies.bulk + trace.steps[0].energies.surface + rho;
  const double sup_grad = grad_integral + std::sqrt(grad_integral * grad_integral + base);

  AprioriBounds out;
  out.bound = base + 2.0 * grad_integral * sup_grad;
  for (const auto& rec : trace.steps) {
    out.sup_bulk = std::max(out.sup_bulk, rec.energies.bulk);
    out.sup_surface = std::max(out.sup_surface, rec.energies.surface);
    out.sum_increments_sq += rec.increment_norm * rec.increment_norm;
  }
  const double tol = 1e-8 * (1.0 + out.bound);
  out.pass = out.sup_bulk <= out.bound + tol && out.sup_surface <= out.bound + tol &&
             trace.lambda * out.sum_increments_sq <= out.bound + tol;
  return out;
}

}  // namespace qsf
