#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "test_helpers.hpp"
#include "tdem/error.hpp"
#include "tdem/parameterization.hpp"

using namespace tdem;
using doctest::Approx;

namespace {

// Cut through the grid node at (u, v) = (0, 0), which is where the base vertex is pinned.
InitialMapOptions uniform_on_grid(const TorusGrid& g, int nv) {
  InitialMapOptions opt;
  opt.weights = HarmonicWeights::kUniform;
  opt.cut = grid_cut_graph(g, 0, nv / 2);
  return opt;
}

}  // namespace

TEST_CASE("uniform harmonic map of a torus grid is the grid itself") {
  // With any base vertex the map is the grid up to a translation.
  {
    const TorusGrid g = generate_torus_mesh(3, 1, 18, 10);
    InitialMapOptions opt;
    opt.weights = HarmonicWeights::kUniform;
    opt.cut = grid_cut_graph(g);
    const Parameterization p = initial_parameterization(g.mesh, {3, 1}, opt);
    const Vec2 t = p.planar.positions[0] - g.uv[p.planar.origin[0]];
    for (int c = 0; c < p.planar.num_vertices(); ++c) {
      Vec2 d = p.planar.positions[c] - g.uv[p.planar.origin[c]] - t;
      d.x() -= p.target_spec.width() * std::round(d.x() / p.target_spec.width());
      d.y() -= p.target_spec.height() * std::round(d.y() / p.target_spec.height());
      CHECK(d.norm() < 1e-8);
    }
  }
  const TorusSpec spec{3, 1};
  const TorusGrid g = generate_torus_mesh(3, 1, 18, 10);
  const Parameterization p = initial_parameterization(g.mesh, spec, uniform_on_grid(g, 10));
  CHECK(p.weights_used == HarmonicWeights::kUniform);
  CHECK(count_flipped_faces(p.planar) == 0);
  CHECK(max_seam_residual(p.planar) < 1e-12);
  CHECK(g.uv[p.cut.base_vertex].norm() < 1e-12);
  for (size_t v = 0; v < p.vertex_images.size(); ++v)
    CHECK((p.vertex_images[v] - g.mesh.vertices[v]).norm() < 1e-8);
  const AreaDistortion d = area_distortion(p);
  CHECK(d.mean_abs < 1e-6);
}

TEST_CASE("equalizing an already equal map keeps it") {
  const TorusSpec spec{3, 1};
  const TorusGrid g = generate_torus_mesh(3, 1, 18, 10);
  const ParameterizationResult r = run_parameterization(
      g.mesh, spec, area_preserving_population(g.mesh), {}, uniform_on_grid(g, 10));
  CHECK(r.report.iterations == 0);
  CHECK(area_distortion(r.initial).mean_abs < 1e-6);
  CHECK(area_distortion(r.final_map).mean_abs < 1e-6);
}

TEST_CASE("area distortion is scale invariant and histogrammed") {
  const TorusGrid g = generate_torus_mesh(3, 1, 20, 12);
  std::vector<Vec3> image = g.mesh.vertices;
  for (size_t v = 0; v < image.size(); ++v) image[v].z() *= 1.0 + 0.3 * std::sin(double(v));
  const AreaDistortion a = area_distortion(g.mesh, image);
  for (Vec3& p : image) p *= 7.3;
  const AreaDistortion b = area_distortion(g.mesh, image);
  REQUIRE(a.per_face.size() == g.mesh.faces.size());
  for (size_t f = 0; f < a.per_face.size(); ++f) CHECK(a.per_face[f] == Approx(b.per_face[f]).epsilon(1e-9));
  CHECK(a.mean_abs > 0.01);
  CHECK(std::accumulate(a.histogram.begin(), a.histogram.end(), 0) ==
        static_cast<int>(g.mesh.faces.size()));
  CHECK(AreaDistortion::bin_lower(0) == -3.0);
  CHECK(AreaDistortion::bin_lower(25) == Approx(0.0));

  // Extreme values are clamped into the end bins.
  TriangleMesh tri;
  tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 5, 0}};
  tri.faces = {{0, 1, 2}, {1, 3, 2}};
  const std::vector<Vec3> squashed = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.5001, 0.5001, 0}};
  const AreaDistortion e = area_distortion(tri, squashed);
  CHECK(e.per_face[1] > AreaDistortion::kHigh);
  CHECK(e.histogram.back() == 1);

  const std::vector<Vec3> short_image(3, Vec3::Zero());
  CHECK_THROWS_AS(area_distortion(tri, short_image), InvalidArgument);
}

TEST_CASE("non-torus topologies are rejected") {
  CHECK_THROWS_WITH_AS(initial_parameterization(test::tetrahedron(), {2, 1}),
                       "genus 0, require genus 1", TopologyError);
}

TEST_CASE("bumpy torus: area distortion drops after equalization") {
  const TriangleMesh mesh = load_mesh(test::data_mesh("bumpy_torus.obj"));
  const TorusSpec spec{2, 1};
  const ParameterizationResult r =
      run_parameterization(mesh, spec, area_preserving_population(mesh), {});
  const double h = area_distortion(r.initial).mean_abs;
  const double f = area_distortion(r.final_map).mean_abs;
  CHECK(f <= 0.5 * h);
  CHECK(r.report.residual_folds == 0);
  CHECK(count_flipped_faces(r.final_map.planar) == 0);
  CHECK(r.final_map.image_mesh().faces == mesh.faces);
  for (const Vec3& p : r.final_map.vertex_images) CHECK(std::abs(torus_distance(p, spec)) < 1e-9);
}
