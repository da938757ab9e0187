#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "tdem/error.hpp"
#include "tdem/mesh.hpp"
#include "topology.hpp"

namespace tdem {

namespace detail {

std::vector<std::vector<int>> vertex_neighbors(const TriangleMesh& mesh) {
  std::vector<std::vector<int>> nbrs(mesh.vertices.size());
  for (const Face& f : mesh.faces)
    for (int k = 0; k < 3; ++k) {
      nbrs[f[k]].push_back(f[(k + 1) % 3]);
      nbrs[f[k]].push_back(f[(k + 2) % 3]);
    }
  for (auto& list : nbrs) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return nbrs;
}

}  // namespace detail

namespace {

std::string edge_name(std::uint64_t key) {
  return "(" + std::to_string(key >> 32) + ", " + std::to_string(key & 0xffffffffu) + ")";
}

}  // namespace

void validate_indices(const TriangleMesh& mesh) {
  const int n = mesh.num_vertices();
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.faces[f];
    for (int k = 0; k < 3; ++k)
      if (t[k] < 0 || t[k] >= n)
        throw TopologyError("face " + std::to_string(f) + " references vertex " +
                            std::to_string(t[k]) + " outside [0, " + std::to_string(n) + ")");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw TopologyError("face " + std::to_string(f) + " repeats a vertex");
  }
  if (mesh.population) {
    if (mesh.population->size() != mesh.faces.size())
      throw InvalidArgument("population size does not match face count");
    for (double p : *mesh.population)
      if (!(p > 0.0) || !std::isfinite(p))
        throw InvalidArgument("population must be strictly positive");
  }
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

std::vector<double> face_areas(const TriangleMesh& mesh) {
  std::vector<double> areas(mesh.faces.size());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.faces[f];
    areas[f] = triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
  }
  return areas;
}

double total_area(const TriangleMesh& mesh) {
  const auto areas = face_areas(mesh);
  return std::accumulate(areas.begin(), areas.end(), 0.0);
}

void validate_nondegenerate(const TriangleMesh& mesh) {
  if (mesh.faces.empty()) return;
  const auto areas = face_areas(mesh);
  const double mean = std::accumulate(areas.begin(), areas.end(), 0.0) / areas.size();
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (!(areas[f] >= 1e-12 * mean))
      throw GeometryError("degenerate face " + std::to_string(f) + " (area " +
                          std::to_string(areas[f]) + ")");
}

void validate_edge_manifold(const TriangleMesh& mesh) {
  std::unordered_map<std::uint64_t, int> count;
  count.reserve(3 * mesh.faces.size());
  for (const Face& t : mesh.faces)
    for (int k = 0; k < 3; ++k) {
      const auto key = detail::undirected_key(t[k], t[(k + 1) % 3]);
      if (++count[key] > 2) throw TopologyError("non-manifold edge " + edge_name(key));
    }
}

void validate_closed_oriented(const TriangleMesh& mesh) {
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(3 * mesh.faces.size());
  for (const Face& t : mesh.faces)
    for (int k = 0; k < 3; ++k) {
      const auto key = detail::directed_key(t[k], t[(k + 1) % 3]);
      if (++directed[key] > 1)
        throw TopologyError("inconsistent orientation or non-manifold edge " + edge_name(key));
    }
  for (const auto& [key, n] : directed) {
    const int from = static_cast<int>(key >> 32);
    const int to = static_cast<int>(key & 0xffffffffu);
    if (!directed.count(detail::directed_key(to, from)))
      throw TopologyError("open mesh: boundary edge " + edge_name(key));
  }
}

int count_edges(const TriangleMesh& mesh) {
  std::unordered_set<std::uint64_t> edges;
  edges.reserve(3 * mesh.faces.size());
  for (const Face& t : mesh.faces)
    for (int k = 0; k < 3; ++k) edges.insert(detail::undirected_key(t[k], t[(k + 1) % 3]));
  return static_cast<int>(edges.size());
}

int euler_characteristic(const TriangleMesh& mesh) {
  return mesh.num_vertices() - count_edges(mesh) + mesh.num_faces();
}

int euler_genus(const TriangleMesh& mesh) {
  validate_indices(mesh);
  validate_closed_oriented(mesh);
  const int chi = euler_characteristic(mesh);
  if (chi % 2 != 0) throw TopologyError("odd Euler characteristic " + std::to_string(chi));
  return (2 - chi) / 2;
}

std::vector<std::vector<int>> boundary_loops(const TriangleMesh& mesh) {
  std::unordered_set<std::uint64_t> directed;
  for (const Face& t : mesh.faces)
    for (int k = 0; k < 3; ++k) directed.insert(detail::directed_key(t[k], t[(k + 1) % 3]));
  // Boundary halfedges run opposite to the unmatched face edges.
  std::unordered_map<int, int> next;
  for (const Face& t : mesh.faces)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      if (!directed.count(detail::directed_key(b, a))) next[b] = a;
    }
  std::vector<int> starts;
  for (const auto& [v, w] : next) starts.push_back(v);
  std::sort(starts.begin(), starts.end());
  std::unordered_set<int> seen;
  std::vector<std::vector<int>> loops;
  for (int s : starts) {
    if (seen.count(s)) continue;
    std::vector<int> loop;
    for (int v = s; !seen.count(v); v = next.at(v)) {
      seen.insert(v);
      loop.push_back(v);
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

int TorusGrid::vertex(int i, int j) const {
  i = ((i % nu) + nu) % nu;
  j = ((j % nv) + nv) % nv;
  return i * nv + j;
}

TorusGrid generate_torus_mesh(double major, double minor, int nu, int nv) {
  if (!(major > minor && minor > 0.0))
    throw InvalidArgument("require R > r > 0 (got R=" + std::to_string(major) +
                          ", r=" + std::to_string(minor) + ")");
  if (nu < 3 || nv < 3) throw InvalidArgument("require nu >= 3 and nv >= 3");

  constexpr double pi = std::numbers::pi;
  TorusGrid grid;
  grid.major = major;
  grid.minor = minor;
  grid.nu = nu;
  grid.nv = nv;
  grid.mesh.vertices.reserve(static_cast<size_t>(nu) * nv);
  grid.uv.reserve(static_cast<size_t>(nu) * nv);
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const double u = 2.0 * pi * major * i / nu;
      const double v = -pi * minor + 2.0 * pi * minor * j / nv;
      const double ring = major + minor * std::cos(v / minor);
      grid.mesh.vertices.emplace_back(ring * std::cos(u / major), ring * std::sin(u / major),
                                      minor * std::sin(v / minor));
      grid.uv.emplace_back(u, v);
    }
  }
  grid.mesh.faces.reserve(2 * static_cast<size_t>(nu) * nv);
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const int a = grid.vertex(i, j);
      const int b = grid.vertex(i + 1, j);
      const int c = grid.vertex(i + 1, j + 1);
      const int d = grid.vertex(i, j + 1);
      grid.mesh.faces.push_back({a, b, c});
      grid.mesh.faces.push_back({a, c, d});
    }
  }
  return grid;
}

CutGraph grid_cut_graph(const TorusGrid& grid, int i0, int j0) {
  CutGraph cut;
  cut.base_vertex = grid.vertex(i0, j0);
  for (int k = 0; k < grid.nu; ++k) cut.loop_a.push_back(grid.vertex(i0 + k, j0));
  for (int k = 0; k < grid.nv; ++k) cut.loop_b.push_back(grid.vertex(i0, j0 + k));
  return cut;
}

TriangleMesh reglue(const CutMesh& cut) {
  TriangleMesh out;
  int n = 0;
  for (int o : cut.origin) n = std::max(n, o + 1);
  out.vertices.resize(n);
  std::vector<bool> set(n, false);
  for (int c = 0; c < static_cast<int>(cut.origin.size()); ++c) {
    const int o = cut.origin[c];
    if (!set[o]) {
      out.vertices[o] = cut.mesh.vertices[c];
      set[o] = true;
    }
  }
  out.faces.reserve(cut.mesh.faces.size());
  for (const Face& t : cut.mesh.faces)
    out.faces.push_back({cut.origin[t[0]], cut.origin[t[1]], cut.origin[t[2]]});
  out.population = cut.mesh.population;
  return out;
}

}  // namespace tdem
