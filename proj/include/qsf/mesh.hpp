#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qsf/geometry.hpp"

namespace qsf {

struct MeshError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BoundaryTag : std::uint8_t { kInterior = 0, kDirichlet = 1, kNeumann = 2 };

enum class Side : std::uint8_t { kLeft = 0, kRight = 1, kBottom = 2, kTop = 3 };

struct Edge {
  int v0 = -1;  // v0 < v1
  int v1 = -1;
  std::array<int, 2> tris{-1, -1};
  int n_tris = 0;
};

/// Triangulated rectangle with a Dirichlet/Neumann boundary partition.
///
/// Edge ids are stable: edges are stored in lexicographic order of
/// (min vertex, max vertex). All triangles are positively oriented right
/// triangles, so the mesh is nonobtuse and the lumped-mass discrete maximum
/// principle applies.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Edge> edges;
  std::vector<BoundaryTag> edge_tag;   // kInterior for interior edges
  std::vector<double> edge_length;
  std::vector<double> tri_area;
  std::vector<std::array<int, 3>> tri_edges;
  std::vector<std::vector<int>> vertex_edges;                  // incident edge ids
  std::vector<std::vector<std::pair<int, int>>> vertex_tris;   // (tri, corner)
  std::vector<std::uint8_t> vertex_on_boundary;
  double diameter = 0.0;
  double width = 0.0, height = 0.0;
  int nx = 0, ny = 0;
  std::uint64_t hash = 0;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }
  bool edge_is_interior(int e) const { return edges[e].n_tris == 2; }
  Vec2 edge_midpoint(int e) const {
    return 0.5 * (vertices[edges[e].v0] + vertices[edges[e].v1]);
  }
  std::vector<int> interior_edges() const;
};

/// Structured right-triangle mesh of a width x height rectangle with nx x ny
/// cells, each split along the (lower-left, upper-right) diagonal. Boundary
/// edges on the listed sides are tagged Dirichlet, the rest Neumann.
Mesh build_rect_mesh(double width, double height, int nx, int ny,
                     const std::vector<Side>& dirichlet_sides);

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 1469598103934665603ull);

}  // namespace qsf
