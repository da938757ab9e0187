#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "tdem/engine.hpp"
#include "tdem/mesh.hpp"
#include "tdem/torus.hpp"

namespace tdem {

enum class HarmonicWeights { kCotangent, kUniform };

struct InitialMapOptions {
  /// Preferred edge weights; cotangent weights fall back to uniform ones when
  /// they fold the planar image.
  HarmonicWeights weights = HarmonicWeights::kCotangent;
  std::optional<CutGraph> cut;
};

/// Map of a genus-one surface onto the torus.
struct Parameterization {
  TriangleMesh source;
  TorusSpec target_spec;
  /// Image of every source vertex, on the torus.
  std::vector<Vec3> vertex_images;
  /// Cut-mesh coordinates in the plane with their seam pairing.
  PeriodicPlanarMesh planar;
  CutGraph cut;
  HarmonicWeights weights_used = HarmonicWeights::kCotangent;

  /// Torus images with the source connectivity.
  TriangleMesh image_mesh() const;
};

/// Doubly periodic harmonic map of the cut surface: seam copies differ by
/// (2 pi R, 0) and (0, 2 pi r), the base vertex sits at the origin and every
/// other vertex is the weighted average of its neighbors. Throws
/// TopologyError for genus other than one and GeometryError when even the
/// uniform-weight map folds.
Parameterization initial_parameterization(const TriangleMesh& mesh, const TorusSpec& spec,
                                          const InitialMapOptions& options = {});

struct ParameterizationResult {
  Parameterization initial;
  Parameterization final_map;
  TdemReport report;
};

/// Composes the initial map with a density-equalizing map of the torus
/// driven by `population` (one value per source face).
ParameterizationResult run_parameterization(const TriangleMesh& mesh, const TorusSpec& spec,
                                            std::span<const double> population,
                                            const TdemConfig& config,
                                            const InitialMapOptions& options = {});

/// Source face areas: equalizing this population preserves area ratios.
std::vector<double> area_preserving_population(const TriangleMesh& mesh);

struct AreaDistortion {
  static constexpr int kBins = 50;
  static constexpr double kLow = -3.0;
  static constexpr double kHigh = 3.0;

  std::vector<double> per_face;
  double mean_abs = 0.0;
  /// Counts on [-3, 3] in 50 equal bins; values outside go to the end bins.
  std::array<int, kBins> histogram{};

  static double bin_lower(int bin) { return kLow + (kHigh - kLow) * bin / kBins; }
};

/// d(T) = log((Area(T) / A) / (Area(f(T)) / A_f)) over straight triangles.
/// Throws GeometryError on a zero-area image face and InvalidArgument when
/// the vertex counts differ.
AreaDistortion area_distortion(const TriangleMesh& source, std::span<const Vec3> image);
AreaDistortion area_distortion(const Parameterization& param);

}  // namespace tdem
