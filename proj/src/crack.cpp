#include "qsf/crack.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace qsf {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

bool CrackSet::contains(int edge) const {
  return std::binary_search(edge_ids.begin(), edge_ids.end(), edge);
}

bool CrackSet::includes(const CrackSet& other) const {
  return std::includes(edge_ids.begin(), edge_ids.end(), other.edge_ids.begin(),
                       other.edge_ids.end());
}

int crack_components(const Mesh& mesh, const std::vector<int>& edge_ids) {
  if (edge_ids.empty()) return 0;
  UnionFind uf(mesh.n_vertices());
  std::set<int> touched;
  for (int e : edge_ids) {
    if (e < 0 || e >= mesh.n_edges()) throw MeshError("edge id out of range");
    if (!mesh.edge_is_interior(e)) throw MeshError("boundary edge in crack set");
    uf.unite(mesh.edges[e].v0, mesh.edges[e].v1);
    touched.insert(mesh.edges[e].v0);
    touched.insert(mesh.edges[e].v1);
  }
  std::set<int> roots;
  for (int v : touched) roots.insert(uf.find(v));
  return static_cast<int>(roots.size());
}

CrackSet make_crack(const Mesh& mesh, std::vector<int> edge_ids) {
  std::sort(edge_ids.begin(), edge_ids.end());
  edge_ids.erase(std::unique(edge_ids.begin(), edge_ids.end()), edge_ids.end());
  CrackSet c;
  c.n_components = crack_components(mesh, edge_ids);
  c.total_length = 0.0;
  for (int e : edge_ids) c.total_length += mesh.edge_length[e];
  c.edge_ids = std::move(edge_ids);
  return c;
}

double crack_length(const Mesh& mesh, const CrackSet& crack) {
  double len = 0.0;
  for (int e : crack.edge_ids) len += mesh.edge_length[e];
  return len;
}

std::string policy_to_string(const ExtensionPolicy& policy) {
  switch (policy.kind) {
    case PolicyKind::kTip: return "TIP(b=" + std::to_string(policy.budget) + ")";
    case PolicyKind::kTipNucleate:
      return "TIP+NUCLEATE(b=" + std::to_string(policy.budget) + ")";
    case PolicyKind::kExhaustive:
      return "EXHAUSTIVE-" + std::to_string(policy.budget);
  }
  return "?";
}

namespace {

// Endpoint vertices of the crack components: vertices with exactly one
// incident crack edge.
std::vector<int> crack_tips(const Mesh& mesh, const CrackSet& crack) {
  std::vector<int> degree(mesh.n_vertices(), 0);
  for (int e : crack.edge_ids) {
    ++degree[mesh.edges[e].v0];
    ++degree[mesh.edges[e].v1];
  }
  std::vector<int> tips;
  for (int v = 0; v < mesh.n_vertices(); ++v)
    if (degree[v] == 1) tips.push_back(v);
  return tips;
}

// Connected growth from one tip: depth-first over non-crack interior edges,
// collecting every intermediate edge set up to the budget.
void grow_from(const Mesh& mesh, const CrackSet& crack, std::vector<int>& added,
               std::set<int> frontier, int budget,
               std::set<std::vector<int>>& out) {
  if (budget == 0) return;
  for (int v : std::vector<int>(frontier.begin(), frontier.end())) {
    for (int e : mesh.vertex_edges[v]) {
      if (!mesh.edge_is_interior(e)) continue;
      if (crack.contains(e)) continue;
      if (std::find(added.begin(), added.end(), e) != added.end()) continue;
      added.push_back(e);
      std::vector<int> key = added;
      std::sort(key.begin(), key.end());
      out.insert(key);
      const int other = mesh.edges[e].v0 == v ? mesh.edges[e].v1 : mesh.edges[e].v0;
      std::set<int> next = frontier;
      next.insert(other);
      grow_from(mesh, crack, added, next, budget - 1, out);
      added.pop_back();
    }
  }
}

void exhaustive_subsets(const std::vector<int>& pool, int k, std::size_t start,
                        std::vector<int>& cur, std::set<std::vector<int>>& out) {
  if (!cur.empty()) out.insert(cur);
  if (static_cast<int>(cur.size()) == k) return;
  for (std::size_t i = start; i < pool.size(); ++i) {
    cur.push_back(pool[i]);
    exhaustive_subsets(pool, k, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<CrackSet> admissible_extensions(const Mesh& mesh, const CrackSet& crack,
                                            int max_components,
                                            const ExtensionPolicy& policy) {
  if (crack.n_components > max_components)
    throw MeshError("crack exceeds the component budget");
  if (policy.budget < 1) throw MeshError("extension budget must be at least 1");

  std::set<std::vector<int>> added_sets;
  switch (policy.kind) {
    case PolicyKind::kTip:
    case PolicyKind::kTipNucleate: {
      for (int tip : crack_tips(mesh, crack)) {
        std::vector<int> added;
        grow_from(mesh, crack, added, {tip}, policy.budget, added_sets);
      }
      if (policy.kind == PolicyKind::kTipNucleate) {
        for (int e : mesh.interior_edges())
          if (!crack.contains(e)) added_sets.insert({e});
      }
      break;
    }
    case PolicyKind::kExhaustive: {
      std::vector<int> pool;
      for (int e : mesh.interior_edges())
        if (!crack.contains(e)) pool.push_back(e);
      std::vector<int> cur;
      exhaustive_subsets(pool, policy.budget, 0, cur, added_sets);
      break;
    }
  }

  std::vector<CrackSet> result;
  for (const auto& added : added_sets) {
    std::vector<int> ids = crack.edge_ids;
    ids.insert(ids.end(), added.begin(), added.end());
    CrackSet cand = make_crack(mesh, std::move(ids));
    if (cand.n_components > max_components) continue;
    result.push_back(std::move(cand));
  }
  // Canonical order: fewest added edges first, then lexicographic ids.
  std::stable_sort(result.begin(), result.end(), [](const CrackSet& a, const CrackSet& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.edge_ids < b.edge_ids;
  });
  return result;
}

DofMap build_dofmap(const Mesh& mesh, const CrackSet& crack) {
  DofMap dm;
  dm.corner_dof.assign(3 * mesh.n_triangles(), -1);

  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const auto& fan = mesh.vertex_tris[v];
    if (fan.empty()) continue;
    UnionFind uf(static_cast<int>(fan.size()));
    std::vector<int> local(mesh.n_triangles(), -1);
    for (std::size_t k = 0; k < fan.size(); ++k) local[fan[k].first] = static_cast<int>(k);
    // Two triangles of the fan stay connected across each incident non-crack
    // interior edge.
    for (int e : mesh.vertex_edges[v]) {
      if (!mesh.edge_is_interior(e)) continue;
      if (crack.contains(e)) continue;
      uf.unite(local[mesh.edges[e].tris[0]], local[mesh.edges[e].tris[1]]);
    }
    // One DOF per fan component, ordered by smallest member triangle.
    std::vector<int> root_dof(fan.size(), -1);
    for (std::size_t k = 0; k < fan.size(); ++k) {
      const int r = uf.find(static_cast<int>(k));
      if (root_dof[r] < 0) {
        root_dof[r] = dm.n_dofs++;
        dm.dof_vertex.push_back(v);
        dm.dof_dirichlet.push_back(0);
      }
      dm.corner_dof[3 * fan[k].first + fan[k].second] = root_dof[r];
    }
    // Dirichlet: the fan component sees a Dirichlet boundary edge at v.
    for (int e : mesh.vertex_edges[v]) {
      if (mesh.edge_tag[e] != BoundaryTag::kDirichlet) continue;
      const int t = mesh.edges[e].tris[0];
      const int r = uf.find(local[t]);
      dm.dof_dirichlet[root_dof[r]] = 1;
    }
  }

  std::uint64_t h = fnv1a(&mesh.hash, sizeof mesh.hash);
  h = fnv1a(dm.corner_dof.data(), dm.corner_dof.size() * sizeof(int), h);
  h = fnv1a(dm.dof_dirichlet.data(), dm.dof_dirichlet.size(), h);
  dm.hash = h;
  return dm;
}

}  // namespace qsf
