#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <unsupported/Eigen/SparseExtra>

#include "tdem/error.hpp"
#include "tdem/operators.hpp"

namespace tdem {

namespace {

using Triplet = Eigen::Triplet<double>;

constexpr double kPruneThreshold = 1e-15;

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

double checked_double_area(const FaceStencil& s, size_t face) {
  const double a2 = signed_double_area(s.corners[0], s.corners[1], s.corners[2]);
  if (!(a2 > 0.0))
    throw GeometryError("face " + std::to_string(face) + " has nonpositive planar area");
  return a2;
}

}  // namespace

QuotientIndex build_quotient_index(const SeamCorrespondence& seams, int num_vertices) {
  std::vector<int> parent(num_vertices);
  std::iota(parent.begin(), parent.end(), 0);
  // Seam graph with the lattice step taken along each directed link.
  std::vector<std::vector<std::pair<int, Eigen::Vector2i>>> links(num_vertices);
  auto add = [&](const std::vector<std::pair<int, int>>& pairs, Eigen::Vector2i step) {
    for (auto [a, b] : pairs) {
      if (a < 0 || b < 0 || a >= num_vertices || b >= num_vertices)
        throw TopologyError("seam pair refers to a missing vertex");
      links[a].emplace_back(b, step);
      links[b].emplace_back(a, -step);
      const int ra = find_root(parent, a), rb = find_root(parent, b);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  };
  add(seams.pairs_lr, {1, 0});
  add(seams.pairs_tb, {0, 1});

  QuotientIndex q;
  q.quotient_of.assign(num_vertices, -1);
  q.shift.assign(num_vertices, Eigen::Vector2i::Zero());
  std::vector<bool> seen(num_vertices, false);
  for (int v = 0; v < num_vertices; ++v) {
    if (find_root(parent, v) != v) continue;
    const int id = q.count++;
    q.representative.push_back(v);
    std::queue<int> queue;
    queue.push(v);
    seen[v] = true;
    q.quotient_of[v] = id;
    while (!queue.empty()) {
      const int a = queue.front();
      queue.pop();
      for (const auto& [b, step] : links[a]) {
        const Eigen::Vector2i s = q.shift[a] + step;
        if (seen[b]) {
          if (s != q.shift[b])
            throw TopologyError("inconsistent seam shifts at vertex " + std::to_string(b));
          continue;
        }
        seen[b] = true;
        q.shift[b] = s;
        q.quotient_of[b] = id;
        queue.push(b);
      }
    }
  }
  return q;
}

double FaceStencil::area() const {
  return 0.5 * signed_double_area(corners[0], corners[1], corners[2]);
}

std::vector<FaceStencil> make_stencils(const PeriodicPlanarMesh& mesh, const QuotientIndex& q) {
  std::vector<FaceStencil> out;
  out.reserve(mesh.faces.size());
  for (const Face& f : mesh.faces) {
    FaceStencil s;
    for (int k = 0; k < 3; ++k) {
      s.ids[k] = q.quotient_of[f[k]];
      s.corners[k] = mesh.positions[f[k]];
    }
    out.push_back(s);
  }
  return out;
}

std::vector<Vec2> quotient_positions(const PeriodicPlanarMesh& mesh, const QuotientIndex& q) {
  std::vector<Vec2> out(q.count);
  for (int i = 0; i < q.count; ++i) out[i] = mesh.positions[q.representative[i]];
  return out;
}

void broadcast_positions(PeriodicPlanarMesh& mesh, const QuotientIndex& q,
                         const std::vector<Vec2>& quotient_pos) {
  for (int c = 0; c < mesh.num_vertices(); ++c) {
    const Eigen::Vector2i& s = q.shift[c];
    Vec2 p = quotient_pos[q.quotient_of[c]];
    if (s.x() != 0) p += s.x() * mesh.period_lr;
    if (s.y() != 0) p += s.y() * mesh.period_tb;
    mesh.positions[c] = p;
  }
}

SparseOperator lumped_mass(std::span<const FaceStencil> stencils, int num_quotient) {
  Vector diag = Vector::Zero(num_quotient);
  for (size_t f = 0; f < stencils.size(); ++f) {
    const double third = checked_double_area(stencils[f], f) / 6.0;
    for (int id : stencils[f].ids) diag[id] += third;
  }
  SparseOperator A(num_quotient, num_quotient);
  A.reserve(Eigen::VectorXi::Ones(num_quotient));
  for (int i = 0; i < num_quotient; ++i) A.insert(i, i) = diag[i];
  A.makeCompressed();
  return A;
}

SparseOperator lumped_mass(const PeriodicPlanarMesh& mesh, const QuotientIndex& q) {
  return lumped_mass(make_stencils(mesh, q), q.count);
}

SparseOperator cotangent_laplacian(std::span<const FaceStencil> stencils, int num_quotient) {
  std::vector<Triplet> off;
  off.reserve(6 * stencils.size());
  for (size_t f = 0; f < stencils.size(); ++f) {
    const FaceStencil& s = stencils[f];
    const double a2 = checked_double_area(s, f);
    for (int k = 0; k < 3; ++k) {
      const int i = (k + 1) % 3, j = (k + 2) % 3;
      const Vec2 e1 = s.corners[i] - s.corners[k];
      const Vec2 e2 = s.corners[j] - s.corners[k];
      const double w = -0.5 * e1.dot(e2) / a2;
      if (s.ids[i] == s.ids[j]) continue;
      off.emplace_back(s.ids[i], s.ids[j], w);
      off.emplace_back(s.ids[j], s.ids[i], w);
    }
  }
  SparseOperator summed(num_quotient, num_quotient);
  summed.setFromTriplets(off.begin(), off.end());

  std::vector<Triplet> entries;
  entries.reserve(summed.nonZeros() + num_quotient);
  for (int col = 0; col < num_quotient; ++col) {
    double total = 0.0;
    for (SparseOperator::InnerIterator it(summed, col); it; ++it) {
      if (std::abs(it.value()) < kPruneThreshold) continue;
      entries.emplace_back(it.row(), col, it.value());
      total += it.value();
    }
    entries.emplace_back(col, col, -total);
  }
  SparseOperator L(num_quotient, num_quotient);
  L.setFromTriplets(entries.begin(), entries.end());
  return L;
}

SparseOperator cotangent_laplacian(const PeriodicPlanarMesh& mesh, const QuotientIndex& q) {
  return cotangent_laplacian(make_stencils(mesh, q), q.count);
}

SparseOperator face_to_vertex(std::span<const FaceStencil> stencils, int num_quotient) {
  Vector pooled = Vector::Zero(num_quotient);
  std::vector<double> areas(stencils.size());
  for (size_t f = 0; f < stencils.size(); ++f) {
    areas[f] = 0.5 * checked_double_area(stencils[f], f);
    for (int id : stencils[f].ids) pooled[id] += areas[f];
  }
  std::vector<Triplet> entries;
  entries.reserve(3 * stencils.size());
  for (size_t f = 0; f < stencils.size(); ++f)
    for (int id : stencils[f].ids)
      entries.emplace_back(id, static_cast<int>(f), areas[f] / pooled[id]);
  SparseOperator M(num_quotient, static_cast<int>(stencils.size()));
  M.setFromTriplets(entries.begin(), entries.end());
  return M;
}

SparseOperator face_to_vertex(const PeriodicPlanarMesh& mesh, const QuotientIndex& q) {
  return face_to_vertex(make_stencils(mesh, q), q.count);
}

std::vector<Vec2> face_gradient(std::span<const FaceStencil> stencils, const Vector& values) {
  std::vector<Vec2> out;
  out.reserve(stencils.size());
  for (size_t f = 0; f < stencils.size(); ++f) {
    const FaceStencil& s = stencils[f];
    const double a2 = checked_double_area(s, f);
    const auto& x = s.corners;
    const Vec2 w = values[s.ids[0]] * (x[2] - x[1]) + values[s.ids[1]] * (x[0] - x[2]) +
                   values[s.ids[2]] * (x[1] - x[0]);
    // n x w with n = (0, 0, 1).
    out.emplace_back(-w.y() / a2, w.x() / a2);
  }
  return out;
}

std::vector<Vec2> face_gradient(const PeriodicPlanarMesh& mesh, const QuotientIndex& q,
                                const Vector& values) {
  return face_gradient(make_stencils(mesh, q), values);
}

DiffusionResult backward_euler_step(const SparseOperator& A, const SparseOperator& L,
                                    const Vector& rho, double dt) {
  if (!(dt > 0.0)) throw SolverError("time step must be positive");
  const SparseOperator S = A + dt * L;
  const Vector b = A * rho;
  const double scale = std::max(b.lpNorm<Eigen::Infinity>(), 1e-300);

  DiffusionResult result;
  Eigen::ConjugateGradient<SparseOperator, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(1e-12);
  cg.setMaxIterations(std::max<Eigen::Index>(1000, 4 * S.rows()));
  cg.compute(S);
  if (cg.info() == Eigen::Success) {
    result.density = cg.solveWithGuess(b, rho);
    result.iterations = static_cast<int>(cg.iterations());
    result.relative_residual = (S * result.density - b).lpNorm<Eigen::Infinity>() / scale;
    if (cg.info() == Eigen::Success && result.relative_residual <= 1e-10) return result;
  }

  Eigen::SimplicialLDLT<SparseOperator> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw SolverError("diffusion system factorization failed");
  result.density = ldlt.solve(b);
  result.used_direct_solver = true;
  result.iterations = 0;
  result.relative_residual = (S * result.density - b).lpNorm<Eigen::Infinity>() / scale;
  if (!(result.relative_residual <= 1e-10))
    throw SolverError("diffusion solve residual " + std::to_string(result.relative_residual));
  return result;
}

void save_matrix_market(const SparseOperator& op, const std::filesystem::path& path) {
  if (!Eigen::saveMarket(op, path.string())) throw IoError("cannot write " + path.string());
}

}  // namespace tdem
