#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace tdem {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Indexed triangle mesh. Faces are counterclockwise when seen from outside.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  /// Optional per-face population, strictly positive when present.
  std::optional<std::vector<double>> population;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
};

enum class MeshFormat { kObj, kPly };

/// Picks the format from the file extension (.obj / .ply, case-insensitive).
MeshFormat format_from_path(const std::filesystem::path& path);

/// Reads an ASCII OBJ or an ASCII / binary little-endian PLY triangle mesh.
///
/// Vertex order is preserved. Throws IoError on parse failures and
/// non-triangular faces, TopologyError on bad indices or edges shared by more
/// than two faces, GeometryError on degenerate faces.
TriangleMesh load_mesh(const std::filesystem::path& path,
                       std::optional<MeshFormat> format = std::nullopt);

/// Writes positions with 17 significant digits. When `uv` is non-empty it
/// must hold one coordinate per vertex; OBJ output then carries `vt` records
/// and `f v/vt` faces, PLY output carries `u`/`v` vertex properties.
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path,
               MeshFormat format, std::span<const Vec2> uv = {});

/// Index range, distinct corners, positive population. Throws TopologyError.
void validate_indices(const TriangleMesh& mesh);

/// Rejects faces whose area is below 1e-12 times the mean face area.
void validate_nondegenerate(const TriangleMesh& mesh);

/// Every undirected edge is shared by at most two faces.
void validate_edge_manifold(const TriangleMesh& mesh);

/// Every edge shared by exactly two faces with opposite orientation.
void validate_closed_oriented(const TriangleMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
std::vector<double> face_areas(const TriangleMesh& mesh);
double total_area(const TriangleMesh& mesh);

int count_edges(const TriangleMesh& mesh);
int euler_characteristic(const TriangleMesh& mesh);

/// Genus (2 - V + E - F) / 2 of a closed manifold mesh.
int euler_genus(const TriangleMesh& mesh);

/// Boundary loops as ordered vertex cycles (empty for a closed mesh).
std::vector<std::vector<int>> boundary_loops(const TriangleMesh& mesh);

/// Torus mesh sampled on a regular (u, v) grid.
struct TorusGrid {
  TriangleMesh mesh;
  /// Grid coordinate of each vertex: u in [0, 2 pi R), v in [-pi r, pi r).
  std::vector<Vec2> uv;
  double major = 0.0;
  double minor = 0.0;
  int nu = 0;
  int nv = 0;

  /// Vertex id of grid node (i, j); indices wrap.
  int vertex(int i, int j) const;
};

/// Regular torus grid with |V| = nu * nv and |F| = 2 nu nv. Vertex (i, j)
/// sits at u = 2 pi R i / nu, v = -pi r + 2 pi r j / nv; every grid quad is
/// split along the same diagonal.
TorusGrid generate_torus_mesh(double major, double minor, int nu, int nv);

/// Two closed edge paths through a common base vertex. Each loop starts at
/// the base vertex and does not repeat it at the end.
struct CutGraph {
  std::vector<int> loop_a;
  std::vector<int> loop_b;
  int base_vertex = 0;
};

/// Homology basis through `base_vertex` (vertex 0 by default) built from a
/// shortest-path tree and a maximum-weight dual cotree. The loops are simple,
/// meet only at the base vertex and cross there; loop_a is the longer one.
/// Throws TopologyError unless the mesh is a closed oriented genus-one mesh.
CutGraph compute_cut_graph(const TriangleMesh& mesh,
                           std::optional<int> base_vertex = std::nullopt);

/// Grid-line cut of a generated torus through node (i0, j0): loop_a runs
/// along u, loop_b along v.
CutGraph grid_cut_graph(const TorusGrid& grid, int i0 = 0, int j0 = 0);

/// Which cut copies must coincide on the torus. A left/right pair is related
/// by the translation across loop_a, a bottom/top pair by the translation
/// across loop_b.
struct SeamCorrespondence {
  std::vector<std::pair<int, int>> pairs_lr;  // (left, right)
  std::vector<std::pair<int, int>> pairs_tb;  // (bottom, top)
  /// Copies of the base vertex: bottom-left, bottom-right, top-right, top-left.
  std::array<int, 4> corner_ids{-1, -1, -1, -1};
};

struct CutMesh {
  TriangleMesh mesh;
  SeamCorrespondence seams;
  /// Original vertex of every cut vertex. The first |V| cut vertices are the
  /// original vertices in order; extra seam copies follow.
  std::vector<int> origin;
};

/// Slices the mesh open along both loops into a disk. Loop vertices are
/// duplicated, the base vertex quadrupled, face order is preserved.
CutMesh cut_along(const TriangleMesh& mesh, const CutGraph& cut);

/// Identifies seam copies again; inverse of cut_along.
TriangleMesh reglue(const CutMesh& cut);

}  // namespace tdem
