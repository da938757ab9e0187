#pragma once

// Connectivity helpers shared by the mesh, cut and overlap code.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "tdem/mesh.hpp"

namespace tdem::detail {

inline std::uint64_t directed_key(int from, int to) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 32) |
         static_cast<std::uint32_t>(to);
}

inline std::uint64_t undirected_key(int a, int b) {
  return a < b ? directed_key(a, b) : directed_key(b, a);
}

/// Directed edge (from -> to) to the face that contains it in its own
/// orientation.
class HalfedgeTable {
 public:
  explicit HalfedgeTable(const TriangleMesh& mesh) {
    table_.reserve(3 * mesh.faces.size());
    for (int f = 0; f < mesh.num_faces(); ++f) {
      const Face& t = mesh.faces[f];
      for (int k = 0; k < 3; ++k) table_.emplace(directed_key(t[k], t[(k + 1) % 3]), f);
    }
  }

  /// Face holding directed edge from -> to, or -1.
  int face(int from, int to) const {
    auto it = table_.find(directed_key(from, to));
    return it == table_.end() ? -1 : it->second;
  }

 private:
  std::unordered_map<std::uint64_t, int> table_;
};

/// Sorted neighbor lists.
std::vector<std::vector<int>> vertex_neighbors(const TriangleMesh& mesh);

/// Third corner of face `t` given two of its corners.
inline int third_corner(const Face& t, int a, int b) {
  for (int k = 0; k < 3; ++k)
    if (t[k] != a && t[k] != b) return t[k];
  return -1;
}

/// Counterclockwise successor of neighbor `p` around vertex `v`: the face
/// (v, p, q) in its own orientation gives q. Returns -1 on a boundary.
inline int ccw_next(const TriangleMesh& mesh, const HalfedgeTable& he, int v, int p, int* face = nullptr) {
  const int f = he.face(v, p);
  if (f < 0) return -1;
  if (face) *face = f;
  return third_corner(mesh.faces[f], v, p);
}

}  // namespace tdem::detail
