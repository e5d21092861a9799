#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "qsf/crack.hpp"
#include "qsf/mesh.hpp"
#include "qsf/solver.hpp"

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

std::vector<double> nodal(const Mesh& m, double (*f)(double, double)) {
  std::vector<double> g(m.n_vertices());
  for (int v = 0; v < m.n_vertices(); ++v) g[v] = f(m.vertices[v].x, m.vertices[v].y);
  return g;
}

CrackSet vertical_cut(const Mesh& m, int ix) {
  std::vector<int> ids;
  for (int j = 0; j < m.ny; ++j)
    ids.push_back(edge_between(m, vid(m, ix, j), vid(m, ix, j + 1)));
  return make_crack(m, ids);
}

CrackSet random_crack(const Mesh& m, std::mt19937_64& rng, int max_edges) {
  const std::vector<int> interior = m.interior_edges();
  std::vector<int> ids;
  const int n = static_cast<int>(rng() % (max_edges + 1));
  for (int k = 0; k < n; ++k) ids.push_back(interior[rng() % interior.size()]);
  return make_crack(m, ids);
}

double nodal_max_error(const Mesh& m, const DofMap& dm, const Field& u,
                       const std::vector<double>& exact) {
  (void)m;
  double err = 0.0;
  for (int d = 0; d < dm.n_dofs; ++d)
    err = std::max(err, std::abs(u.values[d] - exact[dm.dof_vertex[d]]));
  return err;
}

}  // namespace

TEST_CASE("P1 reproduces affine boundary data exactly") {
  const Mesh m = build_rect_mesh(1, 1, 6, 6, kAllSides);
  const auto g = nodal(m, [](double x, double y) { return 2.0 * x - 0.5 * y + 0.25; });
  const DofMap dm = build_dofmap(m, CrackSet{});
  const Field u = solve_harmonic(m, CrackSet{}, dm, g);
  CHECK(nodal_max_error(m, dm, u, g) < 1e-12);
}

TEST_CASE("manufactured harmonic solution converges at second order") {
  // The 5-point structure of the right-triangle stiffness solves x^2 - y^2
  // exactly at the nodes, so the discretization error lives at the edge
  // midpoints of the piecewise-linear field.
  const auto exact = [](double x, double y) { return x * x - y * y; };
  std::vector<double> nodal_errors, midpoint_errors;
  for (int n : {8, 16}) {
    const Mesh m = build_rect_mesh(1, 1, n, n, kAllSides);
    const auto g = nodal(m, exact);
    const DofMap dm = build_dofmap(m, CrackSet{});
    const Field u = solve_harmonic(m, CrackSet{}, dm, g);
    nodal_errors.push_back(nodal_max_error(m, dm, u, g));
    double err = 0.0;
    for (int t = 0; t < m.n_triangles(); ++t) {
      for (int c = 0; c < 3; ++c) {
        const int a = m.triangles[t][c], b = m.triangles[t][(c + 1) % 3];
        const Vec2 mid = 0.5 * (m.vertices[a] + m.vertices[b]);
        const double uh = 0.5 * (u.values[dm.dof(t, c)] + u.values[dm.dof(t, (c + 1) % 3)]);
        err = std::max(err, std::abs(uh - exact(mid.x, mid.y)));
      }
    }
    midpoint_errors.push_back(err);
  }
  CHECK(nodal_errors[0] < 1e-12);
  CHECK(nodal_errors[1] < 1e-12);
  const double ratio = midpoint_errors[0] / midpoint_errors[1];
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("a full cut isolates the far side at the zero constant") {
  const Mesh m = build_rect_mesh(1, 1, 4, 4, {Side::kLeft});
  const CrackSet cut = vertical_cut(m, 2);
  const DofMap dm = build_dofmap(m, cut);
  CHECK(dm.n_dofs > m.n_vertices());
  const auto g = nodal(m, [](double x, double) { return 1.0 + x; });
  const Field u = solve_harmonic(m, cut, dm, g);
  // DOFs whose fan lies right of the cut are disconnected from the Dirichlet
  // side and take the conventional constant 0.
  for (int t = 0; t < m.n_triangles(); ++t) {
    double cx = 0.0;
    for (int c = 0; c < 3; ++c) cx += m.vertices[m.triangles[t][c]].x / 3.0;
    if (cx > 0.5) {
      for (int c = 0; c < 3; ++c) CHECK(u.values[dm.dof(t, c)] == 0.0);
    }
  }
  // The retained side still carries the boundary datum.
  CHECK(u.values[dm.dof(0, 0)] == doctest::Approx(1.0));
}

TEST_CASE("solver argument errors") {
  const Mesh m = build_rect_mesh(1, 1, 3, 3, kAllSides);
  const DofMap dm = build_dofmap(m, CrackSet{});
  const auto g = nodal(m, [](double x, double) { return x; });
  Field w;
  w.dofmap_hash = dm.hash;
  w.values.assign(dm.n_dofs, 0.0);
  CHECK_THROWS_AS(solve_penalized(m, CrackSet{}, dm, g, w, -1.0), SolverError);
  Field bad = w;
  bad.dofmap_hash ^= 1;
  CHECK_THROWS_AS(solve_penalized(m, CrackSet{}, dm, g, bad, 1.0), SolverError);
}

TEST_CASE("penalized solve with the harmonic minimizer as anchor is a fixed point") {
  const Mesh m = build_rect_mesh(1, 1, 6, 6, kAllSides);
  std::mt19937_64 rng(5);
  for (double lambda : {0.1, 1.0, 10.0}) {
    const CrackSet crack = random_crack(m, rng, 6);
    const DofMap dm = build_dofmap(m, crack);
    const auto g = nodal(m, [](double x, double y) { return x * y + 0.3 * x; });
    const Field w = solve_harmonic(m, crack, dm, g);
    const Field u = solve_penalized(m, crack, dm, g, w, lambda);
    CHECK(lumped_l2_diff(m, dm, u.values, w.values) < 1e-9);
    const EnergyBreakdown el = script_E_lambda(m, crack, dm, g, w, lambda, nullptr);
    const EnergyBreakdown e = script_E(m, crack, dm, g, nullptr);
    CHECK(std::abs(el.total - e.total) < 1e-9 * (1 + e.total));
  }
}

TEST_CASE("penalized solve keeps a constant anchor on floating components") {
  const Mesh m = build_rect_mesh(1, 1, 4, 4, {Side::kLeft});
  const CrackSet cut = vertical_cut(m, 2);
  const DofMap dm = build_dofmap(m, cut);
  const auto g = nodal(m, [](double x, double) { return x; });
  Field w;
  w.dofmap_hash = dm.hash;
  w.values.assign(dm.n_dofs, 0.0);
  // Constant 0.7 on every DOF right of the cut, arbitrary values elsewhere.
  std::vector<char> right(dm.n_dofs, 1);
  for (int t = 0; t < m.n_triangles(); ++t) {
    double cx = 0.0;
    for (int c = 0; c < 3; ++c) cx += m.vertices[m.triangles[t][c]].x / 3.0;
    for (int c = 0; c < 3; ++c)
      if (cx < 0.5) right[dm.dof(t, c)] = 0;
  }
  for (int d = 0; d < dm.n_dofs; ++d) w.values[d] = right[d] ? 0.7 : 0.1 * d;
  const Field u = solve_penalized(m, cut, dm, g, w, 2.5);
  for (int d = 0; d < dm.n_dofs; ++d)
    if (right[d]) CHECK(u.values[d] == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("lambda zero reduces the penalized solve to the harmonic one") {
  const Mesh m = build_rect_mesh(1, 1, 5, 5, kAllSides);
  std::mt19937_64 rng(9);
  const CrackSet crack = random_crack(m, rng, 5);
  const DofMap dm = build_dofmap(m, crack);
  const auto g = nodal(m, [](double x, double y) { return std::sin(x) + y; });
  Field w;
  w.dofmap_hash = dm.hash;
  w.values.assign(dm.n_dofs, 0.42);
  const Field u0 = solve_penalized(m, crack, dm, g, w, 0.0);
  const Field uh = solve_harmonic(m, crack, dm, g);
  for (int d = 0; d < dm.n_dofs; ++d) CHECK(u0.values[d] == uh.values[d]);
}

TEST_CASE("energy of elementary fields") {
  const Mesh m = build_rect_mesh(1, 1, 4, 4, kAllSides);
  const DofMap dm = build_dofmap(m, CrackSet{});
  const double a = 1.7;
  Field u = nodal_to_field(dm, nodal(m, [](double x, double) { return x; }));
  for (auto& v : u.values) v *= a;
  EnergyBreakdown e = energy(m, CrackSet{}, dm, u);
  CHECK(e.bulk == doctest::Approx(a * a).epsilon(1e-12));
  CHECK(e.surface == 0.0);
  CHECK(e.total == doctest::Approx(a * a).epsilon(1e-12));

  Field c;
  c.dofmap_hash = dm.hash;
  c.values.assign(dm.n_dofs, 3.3);
  e = energy(m, CrackSet{}, dm, c);
  CHECK(e.bulk == doctest::Approx(0.0));

  const CrackSet crack = make_crack(
      m, {edge_between(m, vid(m, 1, 2), vid(m, 2, 2)),
          edge_between(m, vid(m, 2, 2), vid(m, 3, 2))});
  const DofMap dm2 = build_dofmap(m, crack);
  const Field u2 = nodal_to_field(dm2, nodal(m, [](double, double y) { return y; }));
  const EnergyBreakdown e2 = energy(m, crack, dm2, u2);
  CHECK(e2.surface == doctest::Approx(0.5));

  // DOF-space mismatch is an error.
  CHECK_THROWS_AS(energy(m, crack, dm2, u), SolverError);
}

TEST_CASE("script_E basics") {
  const Mesh m = build_rect_mesh(1, 1, 8, 8, kAllSides);
  std::mt19937_64 rng(13);
  const CrackSet crack = random_crack(m, rng, 4);
  const std::vector<double> zero(m.n_vertices(), 0.0);
  EnergyBreakdown e = script_E(m, crack, zero);
  CHECK(e.bulk == doctest::Approx(0.0));
  CHECK(e.total == doctest::Approx(crack.total_length));

  const auto gx = nodal(m, [](double x, double) { return x; });
  e = script_E(m, CrackSet{}, gx);
  CHECK(e.total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a mid-edge slit strictly releases bulk energy") {
  const Mesh m = build_rect_mesh(1, 1, 32, 32, kAllSides);
  std::vector<int> ids;
  for (int j = 0; j < 16; ++j)
    ids.push_back(edge_between(m, vid(m, 16, j), vid(m, 16, j + 1)));
  const CrackSet slit = make_crack(m, ids);
  CHECK(slit.total_length == doctest::Approx(0.5));
  const auto gx = nodal(m, [](double x, double) { return x; });
  const EnergyBreakdown e = script_E(m, slit, gx);
  CHECK(e.bulk < 1.0);
  CHECK(e.bulk > 0.0);
  CHECK(e.total == doctest::Approx(e.bulk + 0.5));
}

TEST_CASE("script_E_lambda degenerate cases") {
  const Mesh m = build_rect_mesh(1, 1, 5, 5, kAllSides);
  std::mt19937_64 rng(17);
  const CrackSet crack = random_crack(m, rng, 4);
  const DofMap dm = build_dofmap(m, crack);
  const std::vector<double> zero(m.n_vertices(), 0.0);
  Field w0;
  w0.dofmap_hash = dm.hash;
  w0.values.assign(dm.n_dofs, 0.0);
  EnergyBreakdown e = script_E_lambda(m, crack, dm, zero, w0, 4.0, nullptr);
  CHECK(e.bulk == doctest::Approx(0.0));
  CHECK(e.penalty == doctest::Approx(0.0));

  const auto g = nodal(m, [](double x, double y) { return x - y; });
  const Field wg = nodal_to_field(dm, g);
  const EnergyBreakdown e0 = script_E_lambda(m, crack, dm, g, wg, 0.0, nullptr);
  const EnergyBreakdown eh = script_E(m, crack, dm, g, nullptr);
  CHECK(e0.total == doctest::Approx(eh.total));
}

TEST_CASE("transfer preserves nodal values and the L2 norm") {
  const Mesh m = build_rect_mesh(1, 1, 5, 5, kAllSides);
  std::mt19937_64 rng(19);
  for (int it = 0; it < 20; ++it) {
    const CrackSet small = random_crack(m, rng, 4);
    std::vector<int> big_ids = small.edge_ids;
    const CrackSet extra = random_crack(m, rng, 4);
    big_ids.insert(big_ids.end(), extra.edge_ids.begin(), extra.edge_ids.end());
    const CrackSet big = make_crack(m, big_ids);

    const DofMap dm_s = build_dofmap(m, small);
    const DofMap dm_b = build_dofmap(m, big);
    Field u;
    u.dofmap_hash = dm_s.hash;
    u.values.resize(dm_s.n_dofs);
    for (auto& v : u.values) v = std::uniform_real_distribution<>(-1, 1)(rng);

    const Field ut = transfer_field(u, dm_s, dm_b);
    // Each target corner carries the source corner value.
    for (std::size_t k = 0; k < dm_b.corner_dof.size(); ++k)
      CHECK(ut.values[dm_b.corner_dof[k]] == u.values[dm_s.corner_dof[k]]);
    CHECK(lumped_l2_norm(m, dm_b, ut.values) ==
          doctest::Approx(lumped_l2_norm(m, dm_s, u.values)).epsilon(1e-13));

    if (big.size() > small.size())
      CHECK_THROWS_AS(transfer_field(m, ut, big, small), SolverError);
  }
}

TEST_CASE("maximum principle for the penalized solve") {
  const Mesh m = build_rect_mesh(1.3, 1, 6, 5, {Side::kLeft, Side::kBottom});
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<> unit(-1.0, 1.0);
  for (int it = 0; it < 20; ++it) {
    const CrackSet crack = random_crack(m, rng, 6);
    const DofMap dm = build_dofmap(m, crack);
    std::vector<double> g(m.n_vertices());
    for (auto& v : g) v = unit(rng);
    Field w;
    w.dofmap_hash = dm.hash;
    w.values.resize(dm.n_dofs);
    for (auto& v : w.values) v = 0.7 * unit(rng);
    const double lambda = std::abs(unit(rng)) * 10.0;
    const Field u = solve_penalized(m, crack, dm, g, w, lambda);
    const double bound = std::max(max_abs(g), max_abs(w.values));
    for (double v : u.values) CHECK(std::abs(v) <= bound + 1e-12);
  }
}

TEST_CASE("the harmonic minimizer beats every admissible competitor") {
  const Mesh m = build_rect_mesh(1, 1, 6, 6, kAllSides);
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<> unit(-1.0, 1.0);
  const CrackSet crack = random_crack(m, rng, 5);
  const DofMap dm = build_dofmap(m, crack);
  std::vector<double> g(m.n_vertices());
  for (auto& v : g) v = unit(rng);
  Field u;
  const EnergyBreakdown e = script_E(m, crack, dm, g, &u);
  for (int it = 0; it < 20; ++it) {
    Field v = u;
    for (int d = 0; d < dm.n_dofs; ++d)
      if (!dm.dof_dirichlet[d]) v.values[d] += 0.5 * unit(rng);
    const EnergyBreakdown ev = energy(m, crack, dm, v);
    CHECK(e.bulk <= ev.bulk + 1e-12);
  }
  // The nodal interpolant of g itself is admissible as well.
  const EnergyBreakdown eg = energy(m, crack, dm, nodal_to_field(dm, g));
  CHECK(e.bulk <= eg.bulk + 1e-12);
}

TEST_CASE("adding crack edges never increases the minimized bulk") {
  const Mesh m = build_rect_mesh(1, 1, 6, 6, kAllSides);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<> unit(-1.0, 1.0);
  std::vector<double> g(m.n_vertices());
  for (auto& v : g) v = unit(rng);
  for (int it = 0; it < 10; ++it) {
    const CrackSet small = random_crack(m, rng, 5);
    std::vector<int> big_ids = small.edge_ids;
    const CrackSet extra = random_crack(m, rng, 5);
    big_ids.insert(big_ids.end(), extra.edge_ids.begin(), extra.edge_ids.end());
    const CrackSet big = make_crack(m, big_ids);
    CHECK(script_E(m, big, g).bulk <= script_E(m, small, g).bulk + 1e-12);
  }
}
