#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "tdem/mesh.hpp"
#include "tdem/torus.hpp"

namespace tdem {

using SparseOperator = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Seam-identified vertex set of a cut mesh. Every cut vertex c satisfies
/// x_c = x_rep(q) + shift_c.x() * period_lr + shift_c.y() * period_tb, where q
/// is its quotient id and rep(q) its zero-shift representative.
struct QuotientIndex {
  std::vector<int> quotient_of;
  std::vector<Eigen::Vector2i> shift;
  /// Smallest cut vertex of each class; classes are numbered in that order.
  std::vector<int> representative;
  int count = 0;

  int num_cut_vertices() const { return static_cast<int>(quotient_of.size()); }
};

/// Merges seam copies. Throws TopologyError when the shifts are inconsistent.
QuotientIndex build_quotient_index(const SeamCorrespondence& seams, int num_vertices);

/// One triangle in quotient ids with its unwrapped planar corners.
struct FaceStencil {
  std::array<int, 3> ids;
  std::array<Vec2, 3> corners;

  double area() const;
};

std::vector<FaceStencil> make_stencils(const PeriodicPlanarMesh& mesh, const QuotientIndex& q);

/// Quotient positions (one per class, taken from the representative).
std::vector<Vec2> quotient_positions(const PeriodicPlanarMesh& mesh, const QuotientIndex& q);

/// Writes quotient positions back to every cut copy, seams exact.
void broadcast_positions(PeriodicPlanarMesh& mesh, const QuotientIndex& q,
                         const std::vector<Vec2>& quotient_pos);

/// Diagonal matrix of one third of the incident face areas.
SparseOperator lumped_mass(std::span<const FaceStencil> stencils, int num_quotient);
SparseOperator lumped_mass(const PeriodicPlanarMesh& mesh, const QuotientIndex& q);

/// L_ij = -(cot a_ij + cot b_ij) / 2 off the diagonal, L_ii = -sum_j L_ij.
/// Off-diagonal entries below 1e-15 in magnitude are dropped.
SparseOperator cotangent_laplacian(std::span<const FaceStencil> stencils, int num_quotient);
SparseOperator cotangent_laplacian(const PeriodicPlanarMesh& mesh, const QuotientIndex& q);

/// Row-stochastic |V_q| x |F| area-weighted face-to-vertex averaging.
SparseOperator face_to_vertex(std::span<const FaceStencil> stencils, int num_quotient);
SparseOperator face_to_vertex(const PeriodicPlanarMesh& mesh, const QuotientIndex& q);

/// Per-face gradient of the piecewise linear interpolant of vertex values.
std::vector<Vec2> face_gradient(std::span<const FaceStencil> stencils, const Vector& values);
std::vector<Vec2> face_gradient(const PeriodicPlanarMesh& mesh, const QuotientIndex& q,
                                const Vector& values);

struct DiffusionResult {
  Vector density;
  /// ||(A + dt L) rho_next - A rho||_inf / ||A rho||_inf.
  double relative_residual = 0.0;
  int iterations = 0;
  bool used_direct_solver = false;
};

/// Solves (A + dt L) rho_next = A rho with diagonally preconditioned
/// conjugate gradients at relative tolerance 1e-12, falling back to a sparse
/// LDLT factorization if the residual check fails. Throws SolverError when
/// both fail or dt <= 0.
DiffusionResult backward_euler_step(const SparseOperator& A, const SparseOperator& L,
                                    const Vector& rho, double dt);

/// Per-face population and the densities derived from it.
struct DensityField {
  std::vector<double> population;
  std::vector<double> reference_areas;
  std::vector<double> face_density;
  Vector vertex_density;
};

/// Matrix Market coordinate dump, for debugging.
void save_matrix_market(const SparseOperator& op, const std::filesystem::path& path);

}  // namespace tdem
