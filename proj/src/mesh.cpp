#include "qsf/mesh.hpp"

#include <algorithm>
#include <cstring>
#include <map>

namespace qsf {

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<int> Mesh::interior_edges() const {
  std::vector<int> out;
  for (int e = 0; e < n_edges(); ++e)
    if (edge_is_interior(e)) out.push_back(e);
  return out;
}

namespace {

void add_edge(std::map<std::pair<int, int>, std::array<int, 2>>& acc, int a, int b, int tri) {
  auto key = std::minmax(a, b);
  auto it = acc.find(key);
  if (it == acc.end()) {
    acc.emplace(key, std::array<int, 2>{tri, -1});
  } else {
    it->second[1] = tri;
  }
}

}  // namespace

Mesh build_rect_mesh(double width, double height, int nx, int ny,
                     const std::vector<Side>& dirichlet_sides) {
  if (width <= 0.0 || height <= 0.0) throw MeshError("mesh dimensions must be positive");
  if (nx < 1 || ny < 1) throw MeshError("nx and ny must be at least 1");
  if (dirichlet_sides.empty()) throw MeshError("at least one Dirichlet side is required");

  Mesh m;
  m.width = width;
  m.height = height;
  m.nx = nx;
  m.ny = ny;
  m.diameter = std::sqrt(width * width + height * height);

  const double hx = width / nx;
  const double hy = height / ny;
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };

  m.vertices.resize(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.vertices[vid(i, j)] = {i * hx, j * hy};

  // Each cell splits along the (i,j)-(i+1,j+1) diagonal; both triangles CCW.
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }
  }

  std::map<std::pair<int, int>, std::array<int, 2>> edge_acc;
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t) {
    const auto& tri = m.triangles[t];
    add_edge(edge_acc, tri[0], tri[1], t);
    add_edge(edge_acc, tri[1], tri[2], t);
    add_edge(edge_acc, tri[2], tri[0], t);
  }

  // std::map iteration gives the stable lexicographic edge order.
  m.edges.reserve(edge_acc.size());
  for (const auto& [key, tris] : edge_acc) {
    Edge e;
    e.v0 = key.first;
    e.v1 = key.second;
    e.tris = tris;
    e.n_tris = (tris[1] >= 0) ? 2 : 1;
    m.edges.push_back(e);
  }

  bool dir_left = false, dir_right = false, dir_bottom = false, dir_top = false;
  for (Side s : dirichlet_sides) {
    if (s == Side::kLeft) dir_left = true;
    if (s == Side::kRight) dir_right = true;
    if (s == Side::kBottom) dir_bottom = true;
    if (s == Side::kTop) dir_top = true;
  }
  const double eps = 1e-12 * m.diameter;

  m.edge_tag.assign(m.edges.size(), BoundaryTag::kInterior);
  m.edge_length.resize(m.edges.size());
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    const Vec2 a = m.vertices[m.edges[e].v0];
    const Vec2 b = m.vertices[m.edges[e].v1];
    m.edge_length[e] = norm(b - a);
    if (m.edges[e].n_tris == 1) {
      bool dirichlet = false;
      if (a.x < eps && b.x < eps) dirichlet = dir_left;
      else if (a.x > width - eps && b.x > width - eps) dirichlet = dir_right;
      else if (a.y < eps && b.y < eps) dirichlet = dir_bottom;
      else dirichlet = dir_top;
      m.edge_tag[e] = dirichlet ? BoundaryTag::kDirichlet : BoundaryTag::kNeumann;
    }
  }

  m.tri_area.resize(m.triangles.size());
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    const Vec2 a = m.vertices[tri[0]], b = m.vertices[tri[1]], c = m.vertices[tri[2]];
    const double signed_area = 0.5 * cross(b - a, c - a);
    if (signed_area <= 0.0) throw MeshError("triangle with nonpositive area");
    m.tri_area[t] = signed_area;
  }

  m.tri_edges.resize(m.triangles.size());
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    for (int k = 0; k < m.edges[e].n_tris; ++k) {
      const int t = m.edges[e].tris[k];
      const auto& tri = m.triangles[t];
      for (int c = 0; c < 3; ++c) {
        const auto mm = std::minmax(tri[c], tri[(c + 1) % 3]);
        if (mm.first == m.edges[e].v0 && mm.second == m.edges[e].v1) {
          m.tri_edges[t][c] = static_cast<int>(e);
        }
      }
    }
  }

  m.vertex_edges.resize(m.vertices.size());
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    m.vertex_edges[m.edges[e].v0].push_back(static_cast<int>(e));
    m.vertex_edges[m.edges[e].v1].push_back(static_cast<int>(e));
  }
  m.vertex_tris.resize(m.vertices.size());
  for (int t = 0; t < static_cast<int>(m.triangles.size()); ++t)
    for (int c = 0; c < 3; ++c) m.vertex_tris[m.triangles[t][c]].emplace_back(t, c);

  m.vertex_on_boundary.assign(m.vertices.size(), 0);
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    if (m.edges[e].n_tris == 1) {
      m.vertex_on_boundary[m.edges[e].v0] = 1;
      m.vertex_on_boundary[m.edges[e].v1] = 1;
    }
  }

  std::uint64_t h = fnv1a(&width, sizeof width);
  h = fnv1a(&height, sizeof height, h);
  h = fnv1a(&nx, sizeof nx, h);
  h = fnv1a(&ny, sizeof ny, h);
  for (std::size_t e = 0; e < m.edges.size(); ++e)
    h = fnv1a(&m.edge_tag[e], sizeof(BoundaryTag), h);
  m.hash = h;
  return m;
}

}  // namespace qsf
