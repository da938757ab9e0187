#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "tdem/mesh.hpp"
#include "tdem/operators.hpp"
#include "tdem/torus.hpp"

namespace tdem {

struct TdemConfig {
  double dt = 0.1;
  double epsilon = 1e-3;
  int n_max = 1000;
  bool overlap_correction = true;
  double seam_tolerance = 1e-9;

  /// Throws InvalidArgument unless dt > 0, epsilon > 0 and n_max >= 1.
  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  /// std / mean of the recoupled face density (population std).
  double density_error = 0.0;
  /// Variance of the face density divided by its mean; equals density_error^2.
  double variance = 0.0;
  /// Variance of the normalized vertex density M rho (area-weighted face
  /// averages on the moved mesh); a smoothed snapshot of the same field.
  double vertex_variance = 0.0;
  /// Area-weighted std / mean over the torus-image face areas.
  double weighted_error = 0.0;
  double max_displacement = 0.0;
  int flips_before = 0;
  int flips_after = 0;
  double seam_residual = 0.0;
  /// 1^T A rho before and after the diffusion solve.
  double mass_before = 0.0;
  double mass_after = 0.0;
  double mass_drift = 0.0;
  /// How far the diffused density leaves [min rho, max rho]; nonzero only on
  /// meshes whose cotangent weights go negative. Logged, not enforced.
  double max_principle_excess = 0.0;
  double solve_residual = 0.0;
  int solver_iterations = 0;
};

enum class TdemStatus { kConverged, kMaxIterations };

struct TdemReport {
  std::vector<IterationRecord> records;
  double initial_error = 0.0;
  double initial_variance = 0.0;
  /// Values of the returned iterate.
  double final_error = 0.0;
  double final_variance = 0.0;
  /// Same quantities for the normalized vertex density M rho.
  double initial_vertex_variance = 0.0;
  double final_vertex_variance = 0.0;
  int iterations = 0;
  int returned_iteration = 0;
  TdemStatus status = TdemStatus::kConverged;
  /// Largest displacement of any vertex between the input and the returned
  /// iterate, measured in the plane.
  double total_displacement = 0.0;
  double max_seam_residual = 0.0;
  double max_mass_drift = 0.0;
  int residual_folds = 0;
  double wall_seconds = 0.0;
};

/// Planar mesh plus everything an iteration updates.
struct TdemState {
  PeriodicPlanarMesh mesh;
  QuotientIndex quotient;
  DensityField density;
  int iteration = 0;
};

/// rho(T) = P(T) / Area(phi(T)) with the straight 3D triangle through the
/// vertex images; vertex densities are the area-weighted averages.
DensityField initial_modified_density(const PeriodicPlanarMesh& mesh, const QuotientIndex& q,
                                      std::span<const double> population);

/// Population std / mean over the entries (0 for a constant field).
double density_error(std::span<const double> density);

/// Variance of density / mean(density).
double normalized_variance(std::span<const double> density);

TdemState make_tdem_state(PeriodicPlanarMesh mesh, std::span<const double> population);

/// One diffusion, advection, correction and recoupling pass.
IterationRecord tdem_iteration(TdemState& state, const TdemConfig& config);

struct OverlapReport {
  int flips_before = 0;
  int flips_after = 0;
  int local_rounds = 0;
  bool used_global_embedding = false;
};

/// Untangles folded faces by re-embedding the vertices of flipped faces with
/// a uniform-weight periodic Laplace system, growing the free region ring by
/// ring; a global periodic Tutte embedding is the last resort. Seam copies
/// move together, so seam residuals are unchanged.
OverlapReport correct_overlaps(PeriodicPlanarMesh& mesh, const QuotientIndex& q);

struct PlanarTdemResult {
  PeriodicPlanarMesh planar;
  TdemReport report;
};

/// Runs the iteration on an already flattened mesh until the density error
/// drops below epsilon or n_max iterations have run. Without convergence the
/// iterate with the lowest error is returned.
PlanarTdemResult run_tdem_planar(const PeriodicPlanarMesh& initial,
                                 std::span<const double> population, const TdemConfig& config);

struct FlattenedTorus {
  CutGraph cut;
  PeriodicPlanarMesh planar;
};

/// Cuts (along `cut`, or a computed cut graph) and flattens a mesh whose
/// vertices lie on the torus.
FlattenedTorus flatten_torus_mesh(const TriangleMesh& mesh, const TorusSpec& spec,
                                  std::optional<CutGraph> cut = std::nullopt);

struct TdemResult {
  TriangleMesh mapped;
  PeriodicPlanarMesh planar;
  CutGraph cut;
  TdemReport report;
};

/// Density-equalizing self-map of a torus mesh: flatten, iterate, map back.
/// `mapped` shares the input connectivity and vertex order.
TdemResult run_tdem(const TriangleMesh& torus_mesh, const TorusSpec& spec,
                    std::span<const double> population, const TdemConfig& config,
                    std::optional<CutGraph> cut = std::nullopt);

/// One row per iteration.
void write_report_csv(const TdemReport& report, const std::filesystem::path& path);

}  // namespace tdem
