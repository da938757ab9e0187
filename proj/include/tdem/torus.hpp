#pragma once

#include <numbers>
#include <vector>

#include "tdem/mesh.hpp"

namespace tdem {

/// Ring torus with major radius R (axis to tube center) and minor radius r.
struct TorusSpec {
  double major = 2.0;
  double minor = 1.0;

  /// Throws InvalidArgument unless R > r > 0.
  void validate() const;

  double width() const { return 2.0 * std::numbers::pi * major; }
  double height() const { return 2.0 * std::numbers::pi * minor; }
  Vec2 period_u() const { return {width(), 0.0}; }
  Vec2 period_v() const { return {0.0, height()}; }
};

/// phi(u, v) = ((R + r cos(v/r)) cos(u/R), (R + r cos(v/r)) sin(u/R), r sin(v/r)).
Vec3 project_to_torus(const Vec2& p, const TorusSpec& spec);

/// Signed distance of q from the torus surface.
double torus_distance(const Vec3& q, const TorusSpec& spec);

/// Inverse of project_to_torus onto [0, 2 pi R) x [-pi r, pi r).
///
/// Branches on the signs of X, Y and on X^2 + Y^2 versus R^2 and the sign of
/// Z. Each arcsine is evaluated as the equivalent atan2, which keeps full
/// precision next to the branch boundaries. Points within `tolerance * r` of
/// the surface are accepted (they land on the nearest point along the tube
/// radius); farther points raise GeometryError.
Vec2 inverse_project(const Vec3& q, const TorusSpec& spec, double tolerance = 1e-8);

/// Wraps p into the fundamental domain by whole periods.
Vec2 canonicalize(const Vec2& p, const TorusSpec& spec);

/// Planar picture of a cut genus-one mesh on the doubly periodic plane.
///
/// Seam copies differ by whole translations: x_right = x_left + period_lr and
/// x_top = x_bottom + period_tb. For a cut along the fundamental-domain
/// boundaries these are (2 pi R, 0) and (0, 2 pi r).
struct PeriodicPlanarMesh {
  std::vector<Vec2> positions;
  std::vector<Face> faces;
  SeamCorrespondence seams;
  TorusSpec spec;
  Vec2 period_lr{0.0, 0.0};
  Vec2 period_tb{0.0, 0.0};
  /// Original (uncut) vertex of each planar vertex; may be empty.
  std::vector<int> origin;

  int num_vertices() const { return static_cast<int>(positions.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
};

struct SeamViolation {
  enum class Family { kLeftRight, kBottomTop };
  Family family;
  int first;
  int second;
  double residual;
};

/// Every seam pair whose translation residual exceeds `tol`.
std::vector<SeamViolation> check_seam_constraints(const PeriodicPlanarMesh& mesh, double tol);

/// Largest translation residual over all seam pairs.
double max_seam_residual(const PeriodicPlanarMesh& mesh);

/// Twice the signed area of the planar triangle (a, b, c).
double signed_double_area(const Vec2& a, const Vec2& b, const Vec2& c);

/// Number of faces with nonpositive signed area.
int count_flipped_faces(const PeriodicPlanarMesh& mesh);

/// Area of the straight 3D triangle through the torus images of a face.
double torus_image_area(const PeriodicPlanarMesh& mesh, int face);

/// Flattens a cut torus mesh by inverse projection, unwrapping each copy by
/// whole periods so that every face is a short planar triangle. The seam
/// translations are measured, snapped to the period lattice and then imposed
/// exactly. Throws GeometryError when a vertex is off the torus, when the
/// unwrapping is inconsistent or when a flattened face is not
/// counterclockwise.
PeriodicPlanarMesh flatten_cut_torus(const CutMesh& cut, const TorusSpec& spec);

/// Maps every planar vertex back to the torus; indexed like the uncut mesh
/// when `origin` is present, like the planar mesh otherwise.
std::vector<Vec3> map_to_torus(const PeriodicPlanarMesh& mesh);

}  // namespace tdem
