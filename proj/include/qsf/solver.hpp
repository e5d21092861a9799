#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qsf/crack.hpp"
#include "qsf/mesh.hpp"

namespace qsf {

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what, double res = 0.0)
      : std::runtime_error(what), residual(res) {}
  double residual;
};

/// Piecewise-linear nodal field on a crack-split DOF space.
struct Field {
  std::vector<double> values;
  std::uint64_t dofmap_hash = 0;
};

struct EnergyBreakdown {
  double bulk = 0.0;     // integral of |grad u|^2
  double surface = 0.0;  // crack length, unit toughness
  double penalty = 0.0;  // lambda * ||u - w||^2
  double total = 0.0;
};

/// Diagonal (lumped) mass vector: each DOF carries a third of the area of the
/// triangles in its fan.
std::vector<double> lumped_mass(const Mesh& mesh, const DofMap& dm);

double lumped_l2_norm(const Mesh& mesh, const DofMap& dm, const std::vector<double>& v);
double lumped_l2_diff(const Mesh& mesh, const DofMap& dm, const std::vector<double>& a,
                      const std::vector<double>& b);

/// Minimizer of the Dirichlet energy with u = g on Dirichlet DOFs. DOF
/// components never touching a Dirichlet DOF are fixed to the constant 0.
Field solve_harmonic(const Mesh& mesh, const CrackSet& crack, const DofMap& dm,
                     const std::vector<double>& g_nodal);
Field solve_harmonic(const Mesh& mesh, const CrackSet& crack,
                     const std::vector<double>& g_nodal);

/// Minimizer of |grad u|^2 + lambda*||u - w||^2 with u = g on Dirichlet DOFs;
/// lumped mass in the penalty term. w must live on the same DOF space.
/// lambda = 0 falls back to the harmonic solve.
Field solve_penalized(const Mesh& mesh, const CrackSet& crack, const DofMap& dm,
                      const std::vector<double>& g_nodal, const Field& w, double lambda);

/// Energy of a given field: bulk + surface, penalty 0. Throws on a DOF-space
/// mismatch.
EnergyBreakdown energy(const Mesh& mesh, const CrackSet& crack, const DofMap& dm,
                       const Field& u);

EnergyBreakdown script_E(const Mesh& mesh, const CrackSet& crack,
                         const std::vector<double>& g_nodal);
EnergyBreakdown script_E(const Mesh& mesh, const CrackSet& crack, const DofMap& dm,
                         const std::vector<double>& g_nodal, Field* minimizer = nullptr);

EnergyBreakdown script_E_lambda(const Mesh& mesh, const CrackSet& crack, const DofMap& dm,
                                const std::vector<double>& g_nodal,
                                const Field& w_on_same_space, double lambda,
                                Field* minimizer = nullptr);
/// Variant transferring w from the DOF space of a contained crack first.
EnergyBreakdown script_E_lambda(const Mesh& mesh, const CrackSet& crack,
                                const std::vector<double>& g_nodal, const Field& w,
                                const CrackSet& w_crack, double lambda);

/// Carries a field to the DOF space of a larger crack; every new DOF inherits
/// the value of the unique old DOF class containing it. Throws if `to` does
/// not refine `from`.
Field transfer_field(const Field& u, const DofMap& from, const DofMap& to);
Field transfer_field(const Mesh& mesh, const Field& u, const CrackSet& from_crack,
                     const CrackSet& to_crack);

/// Nodal interpolation of a plain vertex field onto a crack-split space.
Field nodal_to_field(const DofMap& dm, const std::vector<double>& nodal);

/// L2(Omega) inner product of the gradients of two fields given on
/// possibly different DOF spaces of the same mesh.
double grad_inner(const Mesh& mesh, const DofMap& dm_u, const Field& u,
                  const DofMap& dm_v, const Field& v);

double max_abs(const std::vector<double>& v);

}  // namespace qsf
