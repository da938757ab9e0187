#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>

#include <Eigen/SparseCholesky>

#include "tdem/error.hpp"
#include "tdem/parameterization.hpp"

namespace tdem {

namespace {

using EdgeKey = std::tuple<int, int, int, int>;  // (i, j, shift x, shift y), i < j

double cot3(const Vec3& apex, const Vec3& a, const Vec3& b) {
  const Vec3 e1 = a - apex, e2 = b - apex;
  const double cross = e1.cross(e2).norm();
  if (!(cross > 0.0)) throw GeometryError("degenerate source face");
  return e1.dot(e2) / cross;
}

// Edge weights keyed by quotient endpoints and the lattice shift between them.
std::map<EdgeKey, double> harmonic_weights(const CutMesh& cut, const QuotientIndex& q,
                                           HarmonicWeights kind) {
  std::map<EdgeKey, double> weights;
  for (const Face& f : cut.mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[(k + 1) % 3], b = f[(k + 2) % 3];
      int i = q.quotient_of[a], j = q.quotient_of[b];
      Eigen::Vector2i s = q.shift[b] - q.shift[a];
      if (i > j) {
        std::swap(i, j);
        s = -s;
      }
      const EdgeKey key{i, j, s.x(), s.y()};
      if (kind == HarmonicWeights::kUniform) {
        weights[key] = 1.0;
      } else {
        const auto& p = cut.mesh.vertices;
        weights[key] += 0.5 * cot3(p[f[k]], p[a], p[b]);
      }
    }
  }
  return weights;
}

std::vector<Vec2> solve_periodic_harmonic(const std::map<EdgeKey, double>& weights,
                                          int count, int pinned, const Vec2& period_lr,
                                          const Vec2& period_tb) {
  auto slot = [&](int v) { return v < pinned ? v : v - 1; };
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(count - 1, 2);
  // Row of vertex v: sum_w c (x_v - x_w - o_vw) = 0.
  auto add = [&](int v, int w, double c, const Vec2& offset_vw) {
    if (v == pinned) return;
    const int r = slot(v);
    entries.emplace_back(r, r, c);
    if (w != pinned) entries.emplace_back(r, slot(w), -c);
    rhs.row(r) += c * offset_vw.transpose();
  };
  for (const auto& [key, c] : weights) {
    const auto [i, j, sx, sy] = key;
    const Vec2 o = sx * period_lr + sy * period_tb;
    add(i, j, c, o);
    add(j, i, c, -o);
  }
  SparseOperator K(count - 1, count - 1);
  K.setFromTriplets(entries.begin(), entries.end());
  Eigen::SimplicialLDLT<SparseOperator> solver(K);
  if (solver.info() != Eigen::Success) throw SolverError("harmonic map system is singular");
  const Eigen::MatrixX2d x = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !x.allFinite())
    throw SolverError("harmonic map solve failed");
  std::vector<Vec2> out(count, Vec2::Zero());
  for (int v = 0; v < count; ++v)
    if (v != pinned) out[v] = x.row(slot(v)).transpose();
  return out;
}

}  // namespace

TriangleMesh Parameterization::image_mesh() const {
  TriangleMesh m;
  m.vertices = vertex_images;
  m.faces = source.faces;
  return m;
}

Parameterization initial_parameterization(const TriangleMesh& mesh, const TorusSpec& spec,
                                          const InitialMapOptions& options) {
  spec.validate();
  validate_indices(mesh);
  const int genus = euler_genus(mesh);
  if (genus != 1) throw TopologyError("genus " + std::to_string(genus) + ", require genus 1");

  Parameterization param;
  param.source = mesh;
  param.target_spec = spec;
  param.cut = options.cut ? *options.cut : compute_cut_graph(mesh);
  const CutMesh cut = cut_along(mesh, param.cut);
  const QuotientIndex q = build_quotient_index(cut.seams, cut.mesh.num_vertices());

  PeriodicPlanarMesh& planar = param.planar;
  planar.faces = cut.mesh.faces;
  planar.seams = cut.seams;
  planar.spec = spec;
  planar.period_lr = spec.period_u();
  planar.period_tb = spec.period_v();
  planar.origin = cut.origin;
  planar.positions.resize(cut.mesh.num_vertices());

  std::vector<HarmonicWeights> attempts{options.weights};
  if (options.weights == HarmonicWeights::kCotangent) attempts.push_back(HarmonicWeights::kUniform);
  const int pinned = q.quotient_of[param.cut.base_vertex];
  bool ok = false;
  for (HarmonicWeights kind : attempts) {
    std::vector<Vec2> pos;
    try {
      pos = solve_periodic_harmonic(harmonic_weights(cut, q, kind), q.count, pinned,
                                    planar.period_lr, planar.period_tb);
    } catch (const SolverError&) {
      if (kind == attempts.back()) throw;
      continue;
    }
    broadcast_positions(planar, q, pos);
    if (count_flipped_faces(planar) == 0) {
      param.weights_used = kind;
      ok = true;
      break;
    }
  }
  if (!ok)
    throw GeometryError("initial harmonic map folds with " + std::to_string(
                            count_flipped_faces(planar)) + " flipped faces");
  param.vertex_images = map_to_torus(planar);
  return param;
}

ParameterizationResult run_parameterization(const TriangleMesh& mesh, const TorusSpec& spec,
                                            std::span<const double> population,
                                            const TdemConfig& config,
                                            const InitialMapOptions& options) {
  config.validate();
  ParameterizationResult result;
  result.initial = initial_parameterization(mesh, spec, options);
  PlanarTdemResult g = run_tdem_planar(result.initial.planar, population, config);
  result.final_map = result.initial;
  result.final_map.planar = std::move(g.planar);
  result.final_map.vertex_images = map_to_torus(result.final_map.planar);
  result.report = std::move(g.report);
  return result;
}

std::vector<double> area_preserving_population(const TriangleMesh& mesh) {
  return face_areas(mesh);
}

AreaDistortion area_distortion(const TriangleMesh& source, std::span<const Vec3> image) {
  if (static_cast<int>(image.size()) != source.num_vertices())
    throw InvalidArgument("image has " + std::to_string(image.size()) + " vertices, source has " +
                          std::to_string(source.num_vertices()));
  const std::vector<double> a = face_areas(source);
  std::vector<double> b(source.faces.size());
  for (int f = 0; f < source.num_faces(); ++f) {
    const Face& t = source.faces[f];
    b[f] = triangle_area(image[t[0]], image[t[1]], image[t[2]]);
    if (!(b[f] > 0.0)) throw GeometryError("image face " + std::to_string(f) + " has zero area");
  }
  double total_a = 0.0, total_b = 0.0;
  for (size_t f = 0; f < a.size(); ++f) {
    total_a += a[f];
    total_b += b[f];
  }

  AreaDistortion d;
  d.per_face.resize(a.size());
  double sum_abs = 0.0;
  for (size_t f = 0; f < a.size(); ++f) {
    d.per_face[f] = std::log((a[f] / total_a) / (b[f] / total_b));
    sum_abs += std::abs(d.per_face[f]);
    const double t = (d.per_face[f] - AreaDistortion::kLow) /
                     (AreaDistortion::kHigh - AreaDistortion::kLow);
    const int bin = std::clamp(static_cast<int>(std::floor(t * AreaDistortion::kBins)), 0,
                               AreaDistortion::kBins - 1);
    ++d.histogram[bin];
  }
  d.mean_abs = a.empty() ? 0.0 : sum_abs / static_cast<double>(a.size());
  return d;
}

AreaDistortion area_distortion(const Parameterization& param) {
  return area_distortion(param.source, param.vertex_images);
}

}  // namespace tdem
