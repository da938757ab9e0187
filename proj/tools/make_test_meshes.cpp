// Writes the bundled genus-one sample meshes.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>

#include "tdem/error.hpp"
#include "tdem/mesh.hpp"

namespace {

using tdem::TriangleMesh;
using tdem::Vec3;
constexpr double kPi = std::numbers::pi;

// Closed tube over a periodic (s, t) grid in [0, 1)^2, oriented outward.
TriangleMesh tube(int nu, int nv, const std::function<Vec3(double, double)>& surface) {
  TriangleMesh mesh;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) mesh.vertices.push_back(surface(double(i) / nu, double(j) / nv));
  auto id = [&](int i, int j) { return ((i % nu) * nv) + (j % nv); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      // Alternate the diagonal so the triangulation is not uniformly sheared.
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        mesh.faces.push_back({a, b, c});
        mesh.faces.push_back({a, c, d});
      } else {
        mesh.faces.push_back({a, b, d});
        mesh.faces.push_back({b, c, d});
      }
    }
  double volume = 0.0;
  for (const auto& f : mesh.faces)
    volume += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]]));
  if (volume < 0.0)
    for (auto& f : mesh.faces) std::swap(f[1], f[2]);
  return mesh;
}

TriangleMesh bumpy_torus() {
  return tube(72, 28, [](double s, double t) {
    const double theta = 2 * kPi * s, phi = 2 * kPi * t;
    const double ring = 2.0 * (1.0 + 0.1 * std::cos(2 * theta));
    const double rad = 0.7 * (1.0 + 0.25 * std::sin(3 * theta) * std::cos(2 * phi));
    const double w = ring + rad * std::cos(phi);
    return Vec3(w * std::cos(theta), w * std::sin(theta), rad * std::sin(phi));
  });
}

TriangleMesh trefoil_tube() {
  return tube(150, 16, [](double s, double t) {
    const double a = 2 * kPi * s, phi = 2 * kPi * t;
    const Vec3 c(std::sin(a) + 2 * std::sin(2 * a), std::cos(a) - 2 * std::cos(2 * a),
                 -std::sin(3 * a));
    const Vec3 d1(std::cos(a) + 4 * std::cos(2 * a), -std::sin(a) + 4 * std::sin(2 * a),
                  -3 * std::cos(3 * a));
    const Vec3 d2(-std::sin(a) - 8 * std::sin(2 * a), -std::cos(a) + 8 * std::cos(2 * a),
                  9 * std::sin(3 * a));
    const Vec3 T = d1.normalized();
    const Vec3 N = (d2 - d2.dot(T) * T).normalized();
    const Vec3 B = T.cross(N);
    return Vec3(c + 0.35 * (std::cos(phi) * N + std::sin(phi) * B));
  });
}

// Strongly graded spacing in both directions on an elliptic tube.
TriangleMesh graded_torus() {
  return tube(60, 30, [](double s, double t) {
    const double theta = 2 * kPi * (s + 0.12 * std::sin(2 * kPi * s));
    const double phi = 2 * kPi * (t + 0.12 * std::sin(2 * kPi * t));
    const double w = 2.0 + 0.8 * std::cos(phi);
    return Vec3(w * std::cos(theta), w * std::sin(theta), 0.5 * std::sin(phi));
  });
}

TriangleMesh twisted_ring() {
  return tube(80, 20, [](double s, double t) {
    const double theta = 2 * kPi * s, phi = 2 * kPi * t;
    const double x = 0.9 * std::cos(phi), y = 0.35 * std::sin(phi);
    const double c = std::cos(theta), sn = std::sin(theta);
    const double radial = c * x - sn * y, vertical = sn * x + c * y;
    const double w = 2.5 + radial;
    return Vec3(w * c, w * sn, vertical);
  });
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data/meshes";
  std::filesystem::create_directories(dir);
  const std::pair<const char*, TriangleMesh> meshes[] = {
      {"bumpy_torus.obj", bumpy_torus()},
      {"trefoil_tube.obj", trefoil_tube()},
      {"graded_torus.obj", graded_torus()},
      {"twisted_ring.obj", twisted_ring()},
  };
  try {
    for (const auto& [name, mesh] : meshes) {
      tdem::validate_closed_oriented(mesh);
      if (tdem::euler_genus(mesh) != 1) throw tdem::TopologyError(std::string(name) + " is not genus one");
      tdem::save_mesh(mesh, dir / name, tdem::MeshFormat::kObj);
      std::printf("%s: %d vertices, %d faces\n", name, mesh.num_vertices(), mesh.num_faces());
    }
  } catch (const tdem::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
