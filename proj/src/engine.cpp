#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "tdem/engine.hpp"
#include "tdem/error.hpp"

namespace tdem {

namespace {

std::vector<double> image_areas(const PeriodicPlanarMesh& mesh) {
  std::vector<double> areas(mesh.faces.size());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    areas[f] = torus_image_area(mesh, f);
    if (!(areas[f] > 0.0))
      throw GeometryError("face " + std::to_string(f) + " has zero torus-image area");
  }
  return areas;
}

void recouple(DensityField& d, const std::vector<double>& areas) {
  d.reference_areas = areas;
  for (size_t f = 0; f < areas.size(); ++f) d.face_density[f] = d.population[f] / areas[f];
}

double weighted_error(const std::vector<double>& rho, const std::vector<double>& w) {
  double sw = 0.0, mean = 0.0;
  for (size_t i = 0; i < rho.size(); ++i) {
    sw += w[i];
    mean += w[i] * rho[i];
  }
  mean /= sw;
  double var = 0.0;
  for (size_t i = 0; i < rho.size(); ++i) var += w[i] * (rho[i] - mean) * (rho[i] - mean);
  return std::sqrt(var / sw) / mean;
}

Vector as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double vertex_variance(const PeriodicPlanarMesh& mesh, const QuotientIndex& q,
                       const std::vector<double>& face_density) {
  const Vector v = face_to_vertex(mesh, q) * as_vector(face_density);
  return normalized_variance(std::span<const double>(v.data(), static_cast<size_t>(v.size())));
}

}  // namespace

void TdemConfig::validate() const {
  if (!(dt > 0.0 && std::isfinite(dt))) throw InvalidArgument("dt must be positive");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (n_max < 1) throw InvalidArgument("n_max must be at least 1");
  if (!(seam_tolerance > 0.0)) throw InvalidArgument("seam tolerance must be positive");
}

double density_error(std::span<const double> density) {
  if (density.empty()) return 0.0;
  double mean = 0.0;
  for (double x : density) mean += x;
  mean /= static_cast<double>(density.size());
  double var = 0.0;
  for (double x : density) var += (x - mean) * (x - mean);
  var /= static_cast<double>(density.size());
  return std::sqrt(var) / mean;
}

double normalized_variance(std::span<const double> density) {
  const double e = density_error(density);
  return e * e;
}

DensityField initial_modified_density(const PeriodicPlanarMesh& mesh, const QuotientIndex& q,
                                      std::span<const double> population) {
  if (static_cast<int>(population.size()) != mesh.num_faces())
    throw InvalidArgument("population has " + std::to_string(population.size()) +
                          " values for " + std::to_string(mesh.num_faces()) + " faces");
  for (size_t f = 0; f < population.size(); ++f)
    if (!(population[f] > 0.0) || !std::isfinite(population[f]))
      throw InvalidArgument("population of face " + std::to_string(f) + " is not positive");
  DensityField d;
  d.population.assign(population.begin(), population.end());
  d.face_density.resize(population.size());
  recouple(d, image_areas(mesh));
  d.vertex_density = face_to_vertex(mesh, q) * as_vector(d.face_density);
  return d;
}

TdemState make_tdem_state(PeriodicPlanarMesh mesh, std::span<const double> population) {
  TdemState s;
  s.quotient = build_quotient_index(mesh.seams, mesh.num_vertices());
  s.mesh = std::move(mesh);
  s.density = initial_modified_density(s.mesh, s.quotient, population);
  return s;
}

IterationRecord tdem_iteration(TdemState& state, const TdemConfig& config) {
  PeriodicPlanarMesh& mesh = state.mesh;
  const QuotientIndex& q = state.quotient;
  IterationRecord rec;
  rec.iteration = ++state.iteration;

  const std::vector<FaceStencil> stencils = make_stencils(mesh, q);
  const SparseOperator A = lumped_mass(stencils, q.count);
  const SparseOperator L = cotangent_laplacian(stencils, q.count);
  const SparseOperator M = face_to_vertex(stencils, q.count);

  // Diffuse the vertex density.
  const Vector rho = M * as_vector(state.density.face_density);
  const DiffusionResult diffused = backward_euler_step(A, L, rho, config.dt);
  const Vector& next = diffused.density;
  rec.mass_before = (A * rho).sum();
  rec.mass_after = (A * next).sum();
  rec.mass_drift = std::abs(rec.mass_after - rec.mass_before) / std::abs(rec.mass_before);
  rec.max_principle_excess =
      std::max({0.0, next.maxCoeff() - rho.maxCoeff(), rho.minCoeff() - next.minCoeff()});
  rec.solve_residual = diffused.relative_residual;
  rec.solver_iterations = diffused.iterations;

  // Vertex gradients pooled from the faces, then v = -grad(rho) / rho.
  const std::vector<Vec2> grad = face_gradient(stencils, next);
  Vector gx(grad.size()), gy(grad.size());
  for (size_t f = 0; f < grad.size(); ++f) {
    gx[f] = grad[f].x();
    gy[f] = grad[f].y();
  }
  const Vector vgx = M * gx, vgy = M * gy;

  const std::vector<Vec2> before = quotient_positions(mesh, q);
  std::vector<Vec2> moved = before;
  for (int i = 0; i < q.count; ++i) {
    if (!(next[i] > 0.0))
      throw SolverError("diffused density is not positive at vertex " + std::to_string(i));
    moved[i] -= (config.dt / next[i]) * Vec2(vgx[i], vgy[i]);
  }
  broadcast_positions(mesh, q, moved);

  rec.flips_before = count_flipped_faces(mesh);
  rec.flips_after = rec.flips_before;
  if (rec.flips_before > 0 && config.overlap_correction)
    rec.flips_after = correct_overlaps(mesh, q).flips_after;

  const std::vector<Vec2> after = quotient_positions(mesh, q);
  for (int i = 0; i < q.count; ++i)
    rec.max_displacement = std::max(rec.max_displacement, (after[i] - before[i]).norm());
  rec.seam_residual = max_seam_residual(mesh);

  // Recouple the density to the moved geometry.
  recouple(state.density, image_areas(mesh));
  state.density.vertex_density = next;
  rec.density_error = density_error(state.density.face_density);
  rec.variance = rec.density_error * rec.density_error;
  rec.weighted_error = weighted_error(state.density.face_density, state.density.reference_areas);
  rec.vertex_variance = vertex_variance(mesh, q, state.density.face_density);
  return rec;
}

PlanarTdemResult run_tdem_planar(const PeriodicPlanarMesh& initial,
                                 std::span<const double> population, const TdemConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  TdemState state = make_tdem_state(initial, population);

  PlanarTdemResult result;
  TdemReport& report = result.report;
  report.initial_error = density_error(state.density.face_density);
  report.initial_variance = report.initial_error * report.initial_error;
  report.initial_vertex_variance =
      vertex_variance(state.mesh, state.quotient, state.density.face_density);
  report.max_seam_residual = max_seam_residual(state.mesh);

  std::vector<Vec2> best = state.mesh.positions;
  double best_error = report.initial_error;
  int best_iteration = 0;
  double error = report.initial_error;
  while (error >= config.epsilon && state.iteration < config.n_max) {
    const IterationRecord rec = tdem_iteration(state, config);
    report.records.push_back(rec);
    report.max_seam_residual = std::max(report.max_seam_residual, rec.seam_residual);
    report.max_mass_drift = std::max(report.max_mass_drift, rec.mass_drift);
    if (rec.seam_residual > config.seam_tolerance)
      throw GeometryError("seam residual " + std::to_string(rec.seam_residual) +
                          " exceeds tolerance at iteration " + std::to_string(rec.iteration));
    error = rec.density_error;
    if (error < best_error) {
      best_error = error;
      best = state.mesh.positions;
      best_iteration = rec.iteration;
    }
  }
  report.iterations = state.iteration;
  report.status = error < config.epsilon ? TdemStatus::kConverged : TdemStatus::kMaxIterations;

  result.planar = std::move(state.mesh);
  if (report.status == TdemStatus::kMaxIterations && best_iteration != report.iterations)
    result.planar.positions = std::move(best);
  else
    best_iteration = report.iterations;
  report.returned_iteration = best_iteration;
  report.final_error =
      best_iteration == 0 ? report.initial_error : report.records[best_iteration - 1].density_error;
  report.final_variance = report.final_error * report.final_error;
  report.final_vertex_variance = best_iteration == 0
                                     ? report.initial_vertex_variance
                                     : report.records[best_iteration - 1].vertex_variance;
  report.residual_folds = count_flipped_faces(result.planar);
  for (int c = 0; c < initial.num_vertices(); ++c)
    report.total_displacement = std::max(
        report.total_displacement, (result.planar.positions[c] - initial.positions[c]).norm());
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

FlattenedTorus flatten_torus_mesh(const TriangleMesh& mesh, const TorusSpec& spec,
                                  std::optional<CutGraph> cut) {
  spec.validate();
  validate_indices(mesh);
  validate_closed_oriented(mesh);
  FlattenedTorus out;
  out.cut = cut ? *cut : compute_cut_graph(mesh);
  out.planar = flatten_cut_torus(cut_along(mesh, out.cut), spec);
  return out;
}

TdemResult run_tdem(const TriangleMesh& torus_mesh, const TorusSpec& spec,
                    std::span<const double> population, const TdemConfig& config,
                    std::optional<CutGraph> cut) {
  config.validate();
  FlattenedTorus flat = flatten_torus_mesh(torus_mesh, spec, std::move(cut));
  PlanarTdemResult planar = run_tdem_planar(flat.planar, population, config);
  TdemResult result;
  result.mapped.vertices = map_to_torus(planar.planar);
  result.mapped.faces = torus_mesh.faces;
  result.mapped.population = torus_mesh.population;
  result.planar = std::move(planar.planar);
  result.cut = std::move(flat.cut);
  result.report = std::move(planar.report);
  return result;
}

void write_report_csv(const TdemReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "iteration,density_error,variance,vertex_variance,weighted_error,max_displacement,"
         "flips_before,flips_after,seam_residual,mass_before,mass_after,mass_drift,"
         "max_principle_excess,solve_residual,solver_iterations\n";
  char line[512];
  for (const IterationRecord& r : report.records) {
    std::snprintf(line, sizeof(line),
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                  r.iteration, r.density_error, r.variance, r.vertex_variance, r.weighted_error,
                  r.max_displacement,
                  r.flips_before, r.flips_after, r.seam_residual, r.mass_before, r.mass_after,
                  r.mass_drift, r.max_principle_excess, r.solve_residual, r.solver_iterations);
    out << line;
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace tdem
