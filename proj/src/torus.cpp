#include <cmath>
#include <numbers>
#include <queue>
#include <string>

#include "tdem/error.hpp"
#include "tdem/torus.hpp"
#include "topology.hpp"

namespace tdem {

namespace {

constexpr double kPi = std::numbers::pi;

// x - k * period with k = floor((x - lo) / period), landing in [lo, lo + period).
// Returns x unchanged when it is already inside, which makes the wrap idempotent.
double wrap(double x, double lo, double period) {
  const double k = std::floor((x - lo) / period);
  double y = k == 0.0 ? x : x - k * period;
  if (y >= lo + period) y -= period;
  if (y < lo) y += period;
  if (y >= lo + period) y = lo;
  return y;
}

Vec2 nearest_lattice(const Vec2& d, double width, double height) {
  return {std::round(d.x() / width) * width, std::round(d.y() / height) * height};
}

}  // namespace

void TorusSpec::validate() const {
  if (!(std::isfinite(major) && std::isfinite(minor) && major > minor && minor > 0.0))
    throw InvalidArgument("invalid torus radii R=" + std::to_string(major) +
                          " r=" + std::to_string(minor) + ", require R > r > 0");
}

Vec3 project_to_torus(const Vec2& p, const TorusSpec& spec) {
  const double R = spec.major, r = spec.minor;
  const double ring = R + r * std::cos(p.y() / r);
  return {ring * std::cos(p.x() / R), ring * std::sin(p.x() / R), r * std::sin(p.y() / r)};
}

double torus_distance(const Vec3& q, const TorusSpec& spec) {
  const double rho = std::hypot(q.x(), q.y());
  return std::hypot(rho - spec.major, q.z()) - spec.minor;
}

Vec2 inverse_project(const Vec3& q, const TorusSpec& spec, double tolerance) {
  const double R = spec.major, r = spec.minor;
  const double X = q.x(), Y = q.y(), Z = q.z();
  const double dist = torus_distance(q, spec);
  if (!(std::abs(dist) <= tolerance * r))
    throw GeometryError("point is " + std::to_string(dist) + " away from the torus surface");

  // Each branch uses an angle in [-pi/2, pi/2] measured against |X| (resp.
  // |rho - R|); atan2 gives the same value as the arcsine on the unit circle.
  const double rho = std::hypot(X, Y);
  const double theta = std::atan2(Y, std::abs(X));
  double u;
  if (X >= 0.0 && Y >= 0.0) {
    u = R * theta;
  } else if (X < 0.0) {
    u = R * (kPi - theta);
  } else {
    u = R * (2.0 * kPi + theta);
  }

  const double psi = std::atan2(Z, std::abs(rho - R));
  double v;
  if (rho >= R) {
    v = r * psi;
  } else if (Z > 0.0) {
    v = r * (kPi - psi);
  } else {
    v = r * (-kPi - psi);
  }
  return canonicalize({u, v}, spec);
}

Vec2 canonicalize(const Vec2& p, const TorusSpec& spec) {
  return {wrap(p.x(), 0.0, spec.width()), wrap(p.y(), -kPi * spec.minor, spec.height())};
}

std::vector<SeamViolation> check_seam_constraints(const PeriodicPlanarMesh& mesh, double tol) {
  std::vector<SeamViolation> out;
  auto scan = [&](const auto& pairs, const Vec2& shift, SeamViolation::Family family) {
    for (auto [a, b] : pairs) {
      const double res = (mesh.positions[b] - mesh.positions[a] - shift).norm();
      if (res > tol) out.push_back({family, a, b, res});
    }
  };
  scan(mesh.seams.pairs_lr, mesh.period_lr, SeamViolation::Family::kLeftRight);
  scan(mesh.seams.pairs_tb, mesh.period_tb, SeamViolation::Family::kBottomTop);
  return out;
}

double max_seam_residual(const PeriodicPlanarMesh& mesh) {
  double worst = 0.0;
  for (auto [a, b] : mesh.seams.pairs_lr)
    worst = std::max(worst, (mesh.positions[b] - mesh.positions[a] - mesh.period_lr).norm());
  for (auto [a, b] : mesh.seams.pairs_tb)
    worst = std::max(worst, (mesh.positions[b] - mesh.positions[a] - mesh.period_tb).norm());
  return worst;
}

double signed_double_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

int count_flipped_faces(const PeriodicPlanarMesh& mesh) {
  int flipped = 0;
  for (const Face& f : mesh.faces)
    if (signed_double_area(mesh.positions[f[0]], mesh.positions[f[1]], mesh.positions[f[2]]) <=
        0.0)
      ++flipped;
  return flipped;
}

double torus_image_area(const PeriodicPlanarMesh& mesh, int face) {
  const Face& f = mesh.faces[face];
  return triangle_area(project_to_torus(mesh.positions[f[0]], mesh.spec),
                       project_to_torus(mesh.positions[f[1]], mesh.spec),
                       project_to_torus(mesh.positions[f[2]], mesh.spec));
}

PeriodicPlanarMesh flatten_cut_torus(const CutMesh& cut, const TorusSpec& spec) {
  spec.validate();
  const TriangleMesh& mesh = cut.mesh;
  const int n = mesh.num_vertices();
  const double W = spec.width(), H = spec.height();

  std::vector<Vec2> raw(n);
  for (int v = 0; v < n; ++v) {
    try {
      raw[v] = inverse_project(mesh.vertices[v], spec);
    } catch (const GeometryError& e) {
      throw GeometryError("vertex " + std::to_string(v) + ": " + e.what());
    }
  }

  // Unwrap breadth-first from the bottom-left corner so that every edge is
  // short in the plane.
  const auto nbrs = detail::vertex_neighbors(mesh);
  const int start = cut.seams.corner_ids[0] >= 0 ? cut.seams.corner_ids[0] : 0;
  std::vector<Vec2> pos(n);
  std::vector<bool> placed(n, false);
  std::queue<int> queue;
  pos[start] = raw[start];
  placed[start] = true;
  queue.push(start);
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop();
    for (int w : nbrs[v]) {
      if (placed[w]) continue;
      pos[w] = raw[w] + nearest_lattice(pos[v] - raw[w], W, H);
      placed[w] = true;
      queue.push(w);
    }
  }
  for (int v = 0; v < n; ++v)
    if (!placed[v]) throw TopologyError("cut mesh is not connected");
  for (int v = 0; v < n; ++v)
    for (int w : nbrs[v]) {
      const Vec2 d = pos[w] - pos[v];
      if (std::abs(d.x()) >= 0.5 * W || std::abs(d.y()) >= 0.5 * H)
        throw GeometryError("edge " + std::to_string(v) + "-" + std::to_string(w) +
                            " spans half a period; mesh too coarse to unwrap");
    }

  // Seam translations are exact lattice vectors.
  auto measure = [&](const std::vector<std::pair<int, int>>& pairs, const char* name) {
    if (pairs.empty()) throw TopologyError(std::string("no ") + name + " seam pairs");
    const Vec2 first = nearest_lattice(pos[pairs[0].second] - pos[pairs[0].first], W, H);
    for (auto [a, b] : pairs) {
      const Vec2 d = pos[b] - pos[a];
      if ((nearest_lattice(d, W, H) - first).norm() > 1e-9 * (W + H) ||
          (d - first).norm() > 1e-6 * (W + H))
        throw GeometryError(std::string("inconsistent ") + name + " seam translation");
    }
    return first;
  };
  PeriodicPlanarMesh out;
  out.period_lr = measure(cut.seams.pairs_lr, "left/right");
  out.period_tb = measure(cut.seams.pairs_tb, "bottom/top");
  const double det = out.period_lr.x() * out.period_tb.y() - out.period_lr.y() * out.period_tb.x();
  if (std::abs(det - W * H) > 1e-9 * W * H)
    throw GeometryError("cut loops do not span the torus once (lattice determinant " +
                        std::to_string(det / (W * H)) + ")");

  // Seam copies sit exactly at their primary copy plus a lattice shift.
  if (!cut.origin.empty()) {
    Eigen::Matrix2d basis;
    basis << out.period_lr, out.period_tb;
    const Eigen::Matrix2d inv = basis.inverse();
    for (int c = 0; c < n; ++c) {
      const int o = cut.origin[c];
      if (o == c) continue;
      const Vec2 k = (inv * (pos[c] - pos[o])).array().round().matrix();
      pos[c] = pos[o] + k.x() * out.period_lr + k.y() * out.period_tb;
    }
  }

  out.positions = std::move(pos);
  out.faces = mesh.faces;
  out.seams = cut.seams;
  out.spec = spec;
  out.origin = cut.origin;
  for (int f = 0; f < out.num_faces(); ++f) {
    const Face& t = out.faces[f];
    if (signed_double_area(out.positions[t[0]], out.positions[t[1]], out.positions[t[2]]) <= 0.0)
      throw GeometryError("flattened face " + std::to_string(f) +
                          " is not counterclockwise; is the mesh oriented outward?");
  }
  return out;
}

std::vector<Vec3> map_to_torus(const PeriodicPlanarMesh& mesh) {
  if (mesh.origin.empty()) {
    std::vector<Vec3> out;
    out.reserve(mesh.positions.size());
    for (const Vec2& p : mesh.positions) out.push_back(project_to_torus(p, mesh.spec));
    return out;
  }
  int count = 0;
  for (int o : mesh.origin) count = std::max(count, o + 1);
  std::vector<Vec3> out(count);
  std::vector<bool> set(count, false);
  for (int c = 0; c < mesh.num_vertices(); ++c) {
    const int o = mesh.origin[c];
    if (set[o]) continue;
    out[o] = project_to_torus(mesh.positions[c], mesh.spec);
    set[o] = true;
  }
  return out;
}

}  // namespace tdem
