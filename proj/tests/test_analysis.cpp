#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "qsf/analysis.hpp"

using namespace qsf;

namespace {

const std::vector<Side> kAllSides{Side::kLeft, Side::kRight, Side::kBottom, Side::kTop};

int vid(const Mesh& m, int i, int j) { return j * (m.nx + 1) + i; }

int edge_between(const Mesh& m, int a, int b) {
  const auto [lo, hi] = std::minmax(a, b);
  for (int e = 0; e < m.n_edges(); ++e)
    if (m.edges[e].v0 == lo && m.edges[e].v1 == hi) return e;
  REQUIRE(false);
  return -1;
}

CrackSet random_crack(const Mesh& m, std::mt19937_64& rng, int max_edges) {
  const std::vector<int> interior = m.interior_edges();
  std::vector<int> ids;
  const int n = static_cast<int>(rng() % (max_edges + 1));
  for (int k = 0; k < n; ++k) ids.push_back(interior[rng() % interior.size()]);
  return make_crack(m, ids);
}

// Dense-sampling reference for the Hausdorff distance; an underestimate
// within (edge length) / samples of the true value.
double sampled_hausdorff(const Mesh& m, const CrackSet& k1, const CrackSet& k2,
                         int samples) {
  if (k1.empty() && k2.empty()) return 0.0;
  if (k1.empty() || k2.empty()) return m.diameter;
  auto directed = [&](const CrackSet& from, const CrackSet& to) {
    double best = 0.0;
    for (int e : from.edge_ids) {
      const Vec2 a = m.vertices[m.edges[e].v0];
      const Vec2 b = m.vertices[m.edges[e].v1];
      for (int s = 0; s <= samples; ++s) {
        const Vec2 x = a + (static_cast<double>(s) / samples) * (b - a);
        double dist = 1e300;
        for (int f : to.edge_ids)
          dist = std::min(dist, point_segment_distance(x, m.vertices[m.edges[f].v0],
                                                       m.vertices[m.edges[f].v1]));
        best = std::max(best, dist);
      }
    }
    return best;
  };
  return std::max(directed(k1, k2), directed(k2, k1));
}

Mesh tear_mesh(int n) { return build_rect_mesh(1, 1, n, n, {Side::kLeft}); }

CrackSet tear_slit(const Mesh& m) {
  std::vector<int> ids;
  for (int i = 0; i < m.nx / 4; ++i)
    ids.push_back(edge_between(m, vid(m, i, m.ny / 2), vid(m, i + 1, m.ny / 2)));
  return make_crack(m, ids);
}

BoundaryProgram tear_program(const Mesh& m, double amp) {
  BoundaryMode mode;
  mode.profile.knots = {{0.0, 0.0}, {1.0, amp}};
  mode.spatial.resize(m.n_vertices());
  for (int v = 0; v < m.n_vertices(); ++v)
    mode.spatial[v] = 2 * m.vertices[v].y - 1;
  BoundaryProgram program;
  program.modes.push_back(std::move(mode));
  return program;
}

}  // namespace

TEST_CASE("hausdorff empty-set conventions") {
  const Mesh m = build_rect_mesh(2, 1, 4, 4, kAllSides);
  const CrackSet empty{};
  const CrackSet one = make_crack(m, {m.interior_edges().front()});
  CHECK(hausdorff_distance(m, empty, empty) == 0.0);
  CHECK(hausdorff_distance(m, empty, one) == m.diameter);
  CHECK(hausdorff_distance(m, one, empty) == m.diameter);
  CHECK(hausdorff_distance(m, one, one) == 0.0);
}

TEST_CASE("hausdorff distance of parallel offset segments") {
  const Mesh m = build_rect_mesh(1, 1, 4, 4, kAllSides);
  // Two horizontal edges, vertically offset by 0.25.
  const CrackSet a = make_crack(m, {edge_between(m, vid(m, 1, 1), vid(m, 2, 1))});
  const CrackSet b = make_crack(m, {edge_between(m, vid(m, 1, 2), vid(m, 2, 2))});
  CHECK(hausdorff_distance(m, a, b) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("hausdorff metric axioms on random crack triples") {
  const Mesh m = build_rect_mesh(1.2, 1, 6, 5, kAllSides);
  std::mt19937_64 rng(101);
  for (int it = 0; it < 40; ++it) {
    const CrackSet a = random_crack(m, rng, 7);
    const CrackSet b = random_crack(m, rng, 7);
    const CrackSet c = random_crack(m, rng, 7);
    const double ab = hausdorff_distance(m, a, b);
    const double ba = hausdorff_distance(m, b, a);
    const double ac = hausdorff_distance(m, a, c);
    const double cb = hausdorff_distance(m, c, b);
    CHECK(ab == ba);  // symmetry, bitwise
    CHECK(ab <= ac + cb + 1e-12);
    CHECK(hausdorff_distance(m, a, a) == 0.0);
    if (!a.empty() && !b.empty() && a.edge_ids != b.edge_ids) CHECK(ab > 0.0);
  }
}

TEST_CASE("exact hausdorff dominates dense sampling") {
  const Mesh m = build_rect_mesh(1, 1, 5, 5, kAllSides);
  std::mt19937_64 rng(103);
  for (int it = 0; it < 20; ++it) {
    const CrackSet a = random_crack(m, rng, 6);
    const CrackSet b = random_crack(m, rng, 6);
    const double exact = hausdorff_distance(m, a, b);
    const double sampled = sampled_hausdorff(m, a, b, 400);
    CHECK(exact >= sampled - 1e-12);
    CHECK(exact <= sampled + 0.3 / 400 + 1e-12);  // sampling resolution bound
  }
}

TEST_CASE("minimality holds on a no-crack run and fails on a starved one") {
  const Mesh m = build_rect_mesh(1, 1, 8, 8, kAllSides);
  BoundaryMode mode;
  mode.profile.knots = {{0.0, 0.0}, {1.0, 3.0}};
  mode.spatial.resize(m.n_vertices());
  for (int v = 0; v < m.n_vertices(); ++v)
    mode.spatial[v] = 2 * m.vertices[v].x - 1;
  BoundaryProgram program;
  program.modes.push_back(mode);
  const Schedule sched = Schedule::make(1.0, 0.25);

  const EvolutionTrace good = run(m, CrackSet{}, program, sched, 64.0, 1,
                                  {PolicyKind::kTipNucleate, 1});
  for (int i = 1; i <= sched.n_steps; ++i) {
    // All single-edge probes; no random supersets.
    const MinimalityReport rep = minimality_check(m, good, program, i, 0, 7 + i);
    CHECK(!rep.probes.empty());
    CHECK(rep.all_pass);
    CHECK(rep.worst_margin > 0.0);
  }

  // Starve the search: Neumann top/bottom under strong tension with a policy
  // that cannot nucleate leaves an energy-reducing cut on the table.
  const Mesh mn = build_rect_mesh(1, 1, 8, 8, {Side::kLeft, Side::kRight});
  BoundaryProgram strong;
  {
    BoundaryMode mm;
    mm.profile.knots = {{0.0, 0.0}, {1.0, 8.0}};
    mm.spatial.resize(mn.n_vertices());
    for (int v = 0; v < mn.n_vertices(); ++v)
      mm.spatial[v] = 2 * mn.vertices[v].x - 1;
    strong.modes.push_back(mm);
  }
  const EvolutionTrace starved =
      run(mn, CrackSet{}, strong, sched, 0.0, 1, {PolicyKind::kTip, 1});
  CHECK(starved.steps.back().crack.empty());
  const MinimalityReport rep =
      minimality_check(mn, starved, strong, sched.n_steps, 5, 99);
  CHECK(!rep.all_pass);
  CHECK(rep.worst_margin < 0.0);
}

TEST_CASE("energy balance of a static program is exactly zero") {
  const Mesh m = build_rect_mesh(1, 1, 5, 5, kAllSides);
  BoundaryMode mode;
  mode.profile.knots = {{0.0, 0.7}, {1.0, 0.7}};
  mode.spatial.resize(m.n_vertices());
  for (int v = 0; v < m.n_vertices(); ++v) mode.spatial[v] = m.vertices[v].x;
  BoundaryProgram program;
  program.modes.push_back(mode);
  const EvolutionTrace trace = run(m, CrackSet{}, program, Schedule::make(1.0, 0.25),
                                   1.0, 1, {PolicyKind::kTipNucleate, 1});
  const BalanceReport rep = energy_balance_check(
      m, trace, program, {{0.0, 0.5}, {0.25, 1.0}, {0.0, 1.0}});
  CHECK(rep.all_pass);
  for (const auto& row : rep.rows) {
    CHECK(row.lhs == doctest::Approx(0.0));
    CHECK(row.work == doctest::Approx(0.0));
  }
}

TEST_CASE("energy balance of uncracked linear loading matches the closed form") {
  const Mesh m = build_rect_mesh(1, 1, 8, 8, kAllSides);
  BoundaryMode mode;
  mode.profile.knots = {{0.0, 0.0}, {1.0, 1.0}};
  mode.spatial.resize(m.n_vertices());
  for (int v = 0; v < m.n_vertices(); ++v)
    mode.spatial[v] = m.vertices[v].x * m.vertices[v].x - m.vertices[v].y * m.vertices[v].y;
  BoundaryProgram program;
  program.modes.push_back(mode);
  const double bulk_phi = script_E(m, CrackSet{}, mode.spatial).bulk;

  std::vector<double> slacks;
  for (double delta : {0.1, 0.05}) {
    const EvolutionTrace trace = run(m, CrackSet{}, program,
                                     Schedule::make(1.0, delta), 0.0, 1,
                                     {PolicyKind::kTip, 1});
    const std::vector<std::pair<double, double>> pairs{{0.25, 0.75}, {0.0, 1.0}};
    const BalanceReport rep = energy_balance_check(m, trace, program, pairs);
    CHECK(rep.all_pass);
    for (const auto& row : rep.rows) {
      const double closed = (row.t * row.t - row.s * row.s) * bulk_phi;
      CHECK(row.lhs == doctest::Approx(closed).epsilon(1e-9));
    }
    slacks.push_back(rep.rows[1].slack);
  }
  CHECK(slacks[1] < slacks[0]);  // slack shrinks with delta
}

TEST_CASE("energy balance passes along a produced growth trace") {
  const Mesh m = tear_mesh(16);
  const CrackSet slit = tear_slit(m);
  const BoundaryProgram program = tear_program(m, 1.6);
  const EvolutionTrace trace = run(m, slit, program, Schedule::make(1.0, 0.05), 1.0,
                                   1, {PolicyKind::kTip, 1});
  CHECK(trace.steps.back().crack.size() > slit.size());
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i + 1 < trace.steps.size(); ++i)
    pairs.emplace_back(trace.steps[i].time, trace.steps[i + 1].time);
  pairs.emplace_back(0.0, 1.0);
  const BalanceReport rep = energy_balance_check(m, trace, program, pairs);
  CHECK(rep.all_pass);
}

TEST_CASE("release rate of elementary cases") {
  const Mesh m = build_rect_mesh(1, 1, 8, 8, kAllSides);
  std::vector<double> g_const(m.n_vertices(), 2.0);
  const int interior_edge = edge_between(m, vid(m, 3, 4), vid(m, 4, 4));
  CHECK(release_rate(m, CrackSet{}, g_const, interior_edge) ==
        doctest::Approx(0.0));

  // Gradient parallel to the cut, no DOF duplication: exactly unchanged.
  std::vector<double> gx(m.n_vertices());
  for (int v = 0; v < m.n_vertices(); ++v) gx[v] = m.vertices[v].x;
  CHECK(std::abs(release_rate(m, CrackSet{}, gx, interior_edge)) <= 1e-8);

  // Candidate away from a nonempty crack is rejected.
  const CrackSet crack = make_crack(m, {edge_between(m, vid(m, 1, 1), vid(m, 2, 1))});
  const int far_edge = edge_between(m, vid(m, 5, 6), vid(m, 6, 6));
  CHECK_THROWS_AS(release_rate(m, crack, gx, far_edge), MeshError);
}

TEST_CASE("release rates are never negative") {
  const Mesh m = build_rect_mesh(1, 1, 6, 6, {Side::kLeft, Side::kTop});
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<> unit(-1.0, 1.0);
  for (int it = 0; it < 15; ++it) {
    const CrackSet crack = random_crack(m, rng, 5);
    std::vector<double> g(m.n_vertices());
    for (auto& v : g) v = unit(rng);
    for (const auto& cand : admissible_extensions(m, crack, crack.n_components + 1,
                                                  {PolicyKind::kTipNucleate, 1})) {
      std::vector<int> added;
      std::set_difference(cand.edge_ids.begin(), cand.edge_ids.end(),
                          crack.edge_ids.begin(), crack.edge_ids.end(),
                          std::back_inserter(added));
      REQUIRE(added.size() == 1);
      if (!crack.empty()) {
        const Edge& ce = m.edges[added[0]];
        bool incident = false;
        for (int e : crack.edge_ids) {
          const Edge& ke = m.edges[e];
          incident = incident || ke.v0 == ce.v0 || ke.v0 == ce.v1 ||
                     ke.v1 == ce.v0 || ke.v1 == ce.v1;
        }
        if (!incident) continue;
      }
      CHECK(release_rate(m, crack, g, added[0]) >= -1e-10);
    }
  }
}

TEST_CASE("release rate refinement converges to the frozen reference") {
  // Center slit of length 1/2 under a unit vertical gradient; the candidate
  // extends the right tip. Frozen from a 16/32/64/128 refinement study
  // (0.629696, 0.636457, 0.639626, 0.641163; extrapolated ~0.6424).
  std::vector<double> gs;
  for (int n : {16, 32, 64}) {
    const Mesh m = build_rect_mesh(1, 1, n, n, kAllSides);
    std::vector<int> ids;
    for (int i = n / 4; i < 3 * n / 4; ++i)
      ids.push_back(edge_between(m, vid(m, i, n / 2), vid(m, i + 1, n / 2)));
    const CrackSet slit = make_crack(m, ids);
    std::vector<double> g(m.n_vertices());
    for (int v = 0; v < m.n_vertices(); ++v) g[v] = m.vertices[v].y;
    const int cand = edge_between(m, vid(m, 3 * n / 4, n / 2), vid(m, 3 * n / 4 + 1, n / 2));
    gs.push_back(release_rate(m, slit, g, cand));
  }
  CHECK(gs[0] == doctest::Approx(0.629696).epsilon(1e-4));
  CHECK(gs[1] == doctest::Approx(0.636457).epsilon(1e-4));
  CHECK(gs[2] == doctest::Approx(0.639626).epsilon(1e-4));
  CHECK(gs[0] < gs[1]);
  CHECK(gs[1] < gs[2]);
  const double extrapolated = gs[2] + (gs[2] - gs[1]) * (gs[2] - gs[1]) /
                                          ((gs[1] - gs[0]) - (gs[2] - gs[1]));
  CHECK(extrapolated == doctest::Approx(0.6424).epsilon(0.01));
}

TEST_CASE("griffith report on traces without tips is a vacuous pass") {
  const Mesh m = build_rect_mesh(1, 1, 5, 5, kAllSides);
  BoundaryProgram program = tear_program(m, 0.5);
  const EvolutionTrace trace = run(m, CrackSet{}, program, Schedule::make(1.0, 0.25),
                                   4.0, 1, {PolicyKind::kTipNucleate, 1});
  const GriffithReport rep = griffith_check(m, trace, program);
  CHECK(rep.applicable);
  CHECK(rep.all_pass);
  for (const auto& row : rep.rows) CHECK(row.advance == 0.0);
}

TEST_CASE("griffith on a stationary subcritical slit") {
  const Mesh m = tear_mesh(16);
  const CrackSet slit = tear_slit(m);
  const BoundaryProgram program = tear_program(m, 0.5);  // subcritical amplitude
  const EvolutionTrace trace = run(m, slit, program, Schedule::make(1.0, 0.05), 1.0,
                                   1, {PolicyKind::kTip, 1});
  CHECK(trace.steps.back().crack.size() == slit.size());
  const GriffithReport rep = griffith_check(m, trace, program);
  CHECK(rep.applicable);
  CHECK(rep.all_pass);
  for (const auto& row : rep.rows) {
    CHECK(row.advance == 0.0);
    CHECK(row.release < 1.0);
  }
}

TEST_CASE("griffith detects non-path growth as not applicable") {
  const Mesh m = build_rect_mesh(1, 1, 6, 6, kAllSides);
  // Two disjoint single-edge components cannot satisfy the structure condition.
  EvolutionTrace trace;
  trace.schedule = Schedule::make(1.0, 0.5);
  trace.lambda = 1.0;
  trace.max_components = 2;
  const CrackSet two = make_crack(
      m, {edge_between(m, vid(m, 1, 1), vid(m, 2, 1)),
          edge_between(m, vid(m, 4, 4), vid(m, 5, 4))});
  const DofMap dm = build_dofmap(m, two);
  StepRecord rec;
  rec.crack = two;
  rec.field.dofmap_hash = dm.hash;
  rec.field.values.assign(dm.n_dofs, 0.0);
  trace.steps.assign(3, rec);
  trace.steps[1].index = 1;
  trace.steps[2].index = 2;
  const GriffithReport rep =
      griffith_check(m, trace, tear_program(m, 1.0));
  CHECK(!rep.applicable);
}

TEST_CASE("energy slope check vanishes without growth and stays bounded with it") {
  const Mesh m = tear_mesh(16);
  const BoundaryProgram program = tear_program(m, 1.6);

  const EvolutionTrace still = run(m, CrackSet{}, program, Schedule::make(1.0, 0.1),
                                   64.0, 1, {PolicyKind::kTip, 1});
  const SlopeReport quiet = derivative_slope_check(m, still, program);
  CHECK(quiet.all_pass);
  CHECK(quiet.max_slope == doctest::Approx(0.0));

  std::vector<double> slopes;
  for (double delta : {0.1, 0.05}) {
    const EvolutionTrace trace = run(m, tear_slit(m), program,
                                     Schedule::make(1.0, delta), 1.0, 1,
                                     {PolicyKind::kTip, 1});
    const SlopeReport rep = derivative_slope_check(m, trace, program);
    CHECK(rep.all_pass);
    slopes.push_back(rep.max_slope);
  }
  CHECK(slopes[1] <= slopes[0] + 1e-9);
}

TEST_CASE("delta study is exactly stable for static scenarios") {
  const Mesh m = build_rect_mesh(1, 1, 6, 6, kAllSides);
  ScenarioSpec spec;
  BoundaryMode mode;
  mode.profile.knots = {{0.0, 0.8}, {1.0, 0.8}};  // constant in time
  mode.spatial.resize(m.n_vertices());
  for (int v = 0; v < m.n_vertices(); ++v)
    mode.spatial[v] = 2 * m.vertices[v].y - 1;
  spec.program.modes.push_back(mode);
  spec.lambda = 64.0;
  spec.max_components = 1;
  spec.policy = {PolicyKind::kTipNucleate, 1};
  spec.horizon = 1.0;
  const DeltaStudy study = delta_convergence_study(m, spec, {0.2, 0.1, 0.05}, 6);
  for (const auto& row : study.distance)
    for (double d : row) CHECK(d == 0.0);
  for (double d : study.final_energy_diff) CHECK(d <= 1e-9);
}

TEST_CASE("delta study distances shrink toward the finest trace") {
  const Mesh m = tear_mesh(16);
  ScenarioSpec spec;
  spec.initial_crack = tear_slit(m);
  spec.program = tear_program(m, 1.6);
  spec.lambda = 1.0;
  spec.max_components = 1;
  spec.policy = {PolicyKind::kTip, 1};
  spec.horizon = 1.0;
  const DeltaStudy study = delta_convergence_study(m, spec, {0.1, 0.05, 0.025}, 11);
  int ok = 0;
  const int total = static_cast<int>(study.sample_times.size());
  for (int q = 0; q < total; ++q)
    if (study.distance[0][q] >= study.distance[1][q] - 1e-12) ++ok;
  CHECK(ok * 5 >= total * 4);  // nonincreasing at >= 80% of sample times
  CHECK(study.final_energy_diff[1] <= study.final_energy_diff[0]);
}
