#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsf/mesh.hpp"

namespace qsf {

/// A crack: a set of interior mesh edges. Free of isolated points by
/// construction, with cached component count and total length.
struct CrackSet {
  std::vector<int> edge_ids;  // sorted, unique
  int n_components = 0;
  double total_length = 0.0;

  bool empty() const { return edge_ids.empty(); }
  int size() const { return static_cast<int>(edge_ids.size()); }
  bool contains(int edge) const;
  bool includes(const CrackSet& other) const;
};

/// Validates the ids (interior edges only, in range) and computes the caches.
CrackSet make_crack(const Mesh& mesh, std::vector<int> edge_ids);

/// Number of connected components of the crack edge-graph.
int crack_components(const Mesh& mesh, const std::vector<int>& edge_ids);

double crack_length(const Mesh& mesh, const CrackSet& crack);

enum class PolicyKind : std::uint8_t { kTip, kTipNucleate, kExhaustive };

struct ExtensionPolicy {
  PolicyKind kind = PolicyKind::kTipNucleate;
  int budget = 3;  // edges added per candidate
};

std::string policy_to_string(const ExtensionPolicy& policy);

/// Candidate strict supersets of `crack` with at most `max_components`
/// components, in canonical order (fewest added edges, then lexicographic
/// edge ids).
///
/// kTip grows connected sets of 1..budget edges from a component endpoint
/// vertex; kTipNucleate additionally tries every single interior edge;
/// kExhaustive tries every superset adding at most `budget` edges.
std::vector<CrackSet> admissible_extensions(const Mesh& mesh, const CrackSet& crack,
                                            int max_components,
                                            const ExtensionPolicy& policy);

/// Nodal degrees of freedom on the crack-split space: triangle corners at the
/// same vertex share a DOF iff they are reachable from one another by rotating
/// around the vertex without crossing a crack edge. A DOF is Dirichlet
/// constrained iff its fan contains a Dirichlet boundary edge at the vertex.
struct DofMap {
  int n_dofs = 0;
  std::vector<int> corner_dof;            // 3 * n_triangles
  std::vector<int> dof_vertex;            // dof -> vertex id
  std::vector<std::uint8_t> dof_dirichlet;
  std::uint64_t hash = 0;

  int dof(int tri, int corner) const { return corner_dof[3 * tri + corner]; }
  int n_duplicated_vertices(const Mesh& mesh) const {
    return n_dofs - mesh.n_vertices();
  }
};

DofMap build_dofmap(const Mesh& mesh, const CrackSet& crack);

}  // namespace qsf
