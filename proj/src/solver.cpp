#include "qsf/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace qsf {

namespace {

constexpr int kDirectSolveLimit = 20000;
constexpr double kResidualTol = 1e-10;

// P1 gradients: grad of the hat function at corner c is the inward normal of
// the opposite edge scaled by 1/(2*area).
std::array<Vec2, 3> shape_gradients(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Vec2 p0 = mesh.vertices[tri[0]];
  const Vec2 p1 = mesh.vertices[tri[1]];
  const Vec2 p2 = mesh.vertices[tri[2]];
  const double inv2a = 1.0 / (2.0 * mesh.tri_area[t]);
  return {Vec2{(p1.y - p2.y) * inv2a, (p2.x - p1.x) * inv2a},
          Vec2{(p2.y - p0.y) * inv2a, (p0.x - p2.x) * inv2a},
          Vec2{(p0.y - p1.y) * inv2a, (p1.x - p0.x) * inv2a}};
}

Vec2 field_gradient(const Mesh& mesh, const DofMap& dm, const Field& u, int t) {
  const auto g = shape_gradients(mesh, t);
  Vec2 out{0.0, 0.0};
  for (int c = 0; c < 3; ++c) {
    const double val = u.values[dm.dof(t, c)];
    out = out + val * g[c];
  }
  return out;
}

// DOF components reachable from a Dirichlet DOF; the rest are floating.
std::vector<std::uint8_t> floating_dofs(const Mesh& mesh, const DofMap& dm) {
  std::vector<int> parent(dm.n_dofs);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const int d0 = dm.dof(t, 0), d1 = dm.dof(t, 1), d2 = dm.dof(t, 2);
    const int r0 = find(d0);
    int r1 = find(d1);
    parent[std::max(r0, r1)] = std::min(r0, r1);
    r1 = find(d1);
    const int r2 = find(d2);
    parent[std::max(r1, r2)] = std::min(r1, r2);
  }
  std::vector<std::uint8_t> root_has_dirichlet(dm.n_dofs, 0);
  for (int d = 0; d < dm.n_dofs; ++d)
    if (dm.dof_dirichlet[d]) root_has_dirichlet[find(d)] = 1;
  std::vector<std::uint8_t> floating(dm.n_dofs, 0);
  for (int d = 0; d < dm.n_dofs; ++d)
    if (!root_has_dirichlet[find(d)]) floating[d] = 1;
  return floating;
}

struct Constraints {
  std::vector<std::uint8_t> fixed;
  std::vector<double> value;
};

Field solve_constrained(const Mesh& mesh, const DofMap& dm, const Constraints& bc,
                        double lambda, const std::vector<double>* w) {
  const int n = dm.n_dofs;
  std::vector<int> free_index(n, -1);
  int n_free = 0;
  for (int d = 0; d < n; ++d)
    if (!bc.fixed[d]) free_index[d] = n_free++;

  std::vector<double> x(n, 0.0);
  for (int d = 0; d < n; ++d)
    if (bc.fixed[d]) x[d] = bc.value[d];

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.n_triangles());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_free);

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto g = shape_gradients(mesh, t);
    const double area = mesh.tri_area[t];
    int dofs[3];
    for (int c = 0; c < 3; ++c) dofs[c] = dm.dof(t, c);
    for (int a = 0; a < 3; ++a) {
      if (bc.fixed[dofs[a]]) continue;
      const int fa = free_index[dofs[a]];
      for (int b = 0; b < 3; ++b) {
        const double kab = area * dot(g[a], g[b]);
        if (bc.fixed[dofs[b]]) {
          rhs[fa] -= kab * bc.value[dofs[b]];
        } else {
          trip.emplace_back(fa, free_index[dofs[b]], kab);
        }
      }
    }
  }

  if (lambda > 0.0) {
    const std::vector<double> mass = lumped_mass(mesh, dm);
    for (int d = 0; d < n; ++d) {
      if (bc.fixed[d]) continue;
      const int fd = free_index[d];
      trip.emplace_back(fd, fd, lambda * mass[d]);
      rhs[fd] += lambda * mass[d] * (*w)[d];
    }
  }

  if (n_free > 0) {
    Eigen::SparseMatrix<double> A(n_free, n_free);
    A.setFromTriplets(trip.begin(), trip.end());

    Eigen::VectorXd sol;
    if (n_free < kDirectSolveLimit) {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
      solver.compute(A);
      if (solver.info() != Eigen::Success)
        throw SolverError("sparse factorization failed");
      sol = solver.solve(rhs);
    } else {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>
          cg;
      cg.setTolerance(1e-12);
      cg.setMaxIterations(20 * n_free);
      cg.compute(A);
      sol = cg.solve(rhs);
      if (cg.info() != Eigen::Success)
        throw SolverError("conjugate gradient did not converge", cg.error());
    }

    const double res = (A * sol - rhs).norm();
    const double rel = res / (1.0 + rhs.norm());
    if (!(rel <= kResidualTol))
      throw SolverError("linear solve residual too large", rel);

    for (int d = 0; d < n; ++d)
      if (!bc.fixed[d]) x[d] = sol[free_index[d]];
  }

  Field out;
  out.values = std::move(x);
  out.dofmap_hash = dm.hash;
  return out;
}

}  // namespace

std::vector<double> lumped_mass(const Mesh& mesh, const DofMap& dm) {
  std::vector<double> mass(dm.n_dofs, 0.0);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double third = mesh.tri_area[t] / 3.0;
    for (int c = 0; c < 3; ++c) mass[dm.dof(t, c)] += third;
  }
  return mass;
}

double lumped_l2_norm(const Mesh& mesh, const DofMap& dm, const std::vector<double>& v) {
  const std::vector<double> mass = lumped_mass(mesh, dm);
  double acc = 0.0;
  for (int d = 0; d < dm.n_dofs; ++d) acc += mass[d] * v[d] * v[d];
  return std::sqrt(acc);
}

double lumped_l2_diff(const Mesh& mesh, const DofMap& dm, const std::vector<double>& a,
                      const std::vector<double>& b) {
  const std::vector<double> mass = lumped_mass(mesh, dm);
  double acc = 0.0;
  for (int d = 0; d < dm.n_dofs; ++d) {
    const double diff = a[d] - b[d];
    acc += mass[d] * diff * diff;
  }
  return std::sqrt(acc);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Field nodal_to_field(const DofMap& dm, const std::vector<double>& nodal) {
  Field f;
  f.values.resize(dm.n_dofs);
  for (int d = 0; d < dm.n_dofs; ++d) f.values[d] = nodal[dm.dof_vertex[d]];
  f.dofmap_hash = dm.hash;
  return f;
}

Field solve_harmonic(const Mesh& mesh, const CrackSet& crack, const DofMap& dm,
                     const std::vector<double>& g_nodal) {
  (void)crack;
  Constraints bc;
  bc.fixed = floating_dofs(mesh, dm);  // floating components pinned to 0
  bc.value.assign(dm.n_dofs, 0.0);
  bool any_dirichlet = false;
  for (int d = 0; d < dm.n_dofs; ++d) {
    if (dm.dof_dirichlet[d]) {
      bc.fixed[d] = 1;
      bc.value[d] = g_nodal[dm.dof_vertex[d]];
      any_dirichlet = true;
    }
  }
  if (!any_dirichlet && max_abs(g_nodal) > 0.0)
    throw SolverError("no Dirichlet DOFs to carry the nonzero boundary datum");
  return solve_constrained(mesh, dm, bc, 0.0, nullptr);
}

Field solve_harmonic(const Mesh& mesh, const CrackSet& crack,
                     const std::vector<double>& g_nodal) {
  const DofMap dm = build_dofmap(mesh, crack);
  return solve_harmonic(mesh, crack, dm, g_nodal);
}

Field solve_penalized(const Mesh& mesh, const CrackSet& crack, const DofMap& dm,
                      const std::vector<double>& g_nodal, const Field& w, double lambda) {
  if (lambda < 0.0) throw SolverError("lambda must be nonnegative");
  if (lambda == 0.0) return solve_harmonic(mesh, crack, dm, g_nodal);
  if (w.dofmap_hash != dm.hash || static_cast<int>(w.values.size()) != dm.n_dofs)
    throw SolverError("penalty anchor lives on a different DOF space");
  Constraints bc;
  bc.fixed.assign(dm.n_dofs, 0);
  bc.value.assign(dm.n_dofs, 0.0);
  for (int d = 0; d < dm.n_dofs; ++d) {
    if (dm.dof_dirichlet[d]) {
      bc.fixed[d] = 1;
      bc.value[d] = g_nodal[dm.dof_vertex[d]];
    }
  }
  return solve_constrained(mesh, dm, bc, lambda, &w.values);
}

EnergyBreakdown energy(const Mesh& mesh, const CrackSet& crack, const DofMap& dm,
                       const Field& u) {
  if (u.dofmap_hash != dm.hash || static_cast<int>(u.values.size()) != dm.n_dofs)
    throw SolverError("field lives on a different DOF space");
  EnergyBreakdown e;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Vec2 g = field_gradient(mesh, dm, u, t);
    e.bulk += mesh.tri_area[t] * dot(g, g);
  }
  e.surface = crack.total_length;
  e.penalty = 0.0;
  e.total = e.bulk + e.surface;
  return e;
}

EnergyBreakdown script_E(const Mesh& mesh, const CrackSet& crack, const DofMap& dm,
                         const std::vector<double>& g_nodal, Field* minimizer) {
  Field u = solve_harmonic(mesh, crack, dm, g_nodal);
  EnergyBreakdown e = energy(mesh, crack, dm, u);
  if (minimizer) *minimizer = std::move(u);
  return e;
}

EnergyBreakdown script_E(const Mesh& mesh, const CrackSet& crack,
                         const std::vector<double>& g_nodal) {
  const DofMap dm = build_dofmap(mesh, crack);
  return script_E(mesh, crack, dm, g_nodal, nullptr);
}

EnergyBreakdown script_E_lambda(const Mesh& mesh, const CrackSet& crack, const DofMap& dm,
                                const std::vector<double>& g_nodal,
                                const Field& w_on_same_space, double lambda,
                                Field* minimizer) {
  Field u = solve_penalized(mesh, crack, dm, g_nodal, w_on_same_space, lambda);
  EnergyBreakdown e = energy(mesh, crack, dm, u);
  if (lambda > 0.0) {
    const double diff = lumped_l2_diff(mesh, dm, u.values, w_on_same_space.values);
    e.penalty = lambda * diff * diff;
  }
  e.total = e.bulk + e.surface + e.penalty;
  if (minimizer) *minimizer = std::move(u);
  return e;
}

EnergyBreakdown script_E_lambda(const Mesh& mesh, const CrackSet& crack,
                                const std::vector<double>& g_nodal, const Field& w,
                                const CrackSet& w_crack, double lambda) {
  const DofMap dm = build_dofmap(mesh, crack);
  const DofMap dm_w = build_dofmap(mesh, w_crack);
  if (!crack.includes(w_crack))
    throw SolverError("anchor crack is not contained in the target crack");
  const Field wt = transfer_field(w, dm_w, dm);
  return script_E_lambda(mesh, crack, dm, g_nodal, wt, lambda, nullptr);
}

Field transfer_field(const Field& u, const DofMap& from, const DofMap& to) {
  if (u.dofmap_hash != from.hash)
    throw SolverError("field does not live on the source DOF space");
  if (from.corner_dof.size() != to.corner_dof.size())
    throw SolverError("DOF maps belong to different meshes");
  Field out;
  out.values.assign(to.n_dofs, 0.0);
  std::vector<std::uint8_t> seen(to.n_dofs, 0);
  for (std::size_t k = 0; k < to.corner_dof.size(); ++k) {
    const int dt = to.corner_dof[k];
    const int df = from.corner_dof[k];
    const double val = u.values[df];
    if (seen[dt] && out.values[dt] != val)
      throw SolverError("target DOF space does not refine the source");
    out.values[dt] = val;
    seen[dt] = 1;
  }
  out.dofmap_hash = to.hash;
  return out;
}

Field transfer_field(const Mesh& mesh, const Field& u, const CrackSet& from_crack,
                     const CrackSet& to_crack) {
  if (!to_crack.includes(from_crack))
    throw SolverError("target crack does not contain the source crack");
  const DofMap from = build_dofmap(mesh, from_crack);
  const DofMap to = build_dofmap(mesh, to_crack);
  return transfer_field(u, from, to);
}

double grad_inner(const Mesh& mesh, const DofMap& dm_u, const Field& u,
                  const DofMap& dm_v, const Field& v) {
  double acc = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Vec2 gu = field_gradient(mesh, dm_u, u, t);
    const Vec2 gv = field_gradient(mesh, dm_v, v, t);
    acc += mesh.tri_area[t] * dot(gu, gv);
  }
  return acc;
}

}  // namespace qsf
