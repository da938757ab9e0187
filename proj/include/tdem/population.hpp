#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tdem/mesh.hpp"
#include "tdem/torus.hpp"

namespace tdem {

/// Named per-face population used as the TDEM input.
///
///   uniform              area of each input face (already equalized)
///   constant             1 on every face
///   cos_u                2 - cos(u)
///   sinusoid             1.2 - sin(u) sin(v)
///   ball[:u0,v0,rad,in,out]
///                        `in` inside a periodic disk, `out` elsewhere;
///                        defaults to center (pi R, pi r / 2), radius r / 2,
///                        values 2 and 1
///   csv:PATH             face_index,value rows
///
/// Analytic populations are evaluated at the face centroid in the
/// fundamental domain.
struct PopulationSpec {
  enum class Kind { kUniform, kConstant, kCosU, kSinusoid, kBall, kCsv };
  Kind kind = Kind::kUniform;
  bool default_ball = true;
  double u0 = 0.0, v0 = 0.0, radius = 0.0, inside = 2.0, outside = 1.0;
  std::filesystem::path csv;
};

/// Throws InvalidArgument on unknown names or malformed parameters.
PopulationSpec parse_population_spec(const std::string& text);

std::vector<double> evaluate_population(const PopulationSpec& spec, const TriangleMesh& mesh,
                                        const PeriodicPlanarMesh& planar);

/// Reads `face_index,value` rows (an optional header line is skipped). Every
/// face must be given exactly once with a positive value.
std::vector<double> read_population_csv(const std::filesystem::path& path, int num_faces);

}  // namespace tdem
