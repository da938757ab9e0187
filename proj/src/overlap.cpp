#include <algorithm>
#include <set>
#include <string>
#include <tuple>

#include <Eigen/SparseCholesky>

#include "tdem/engine.hpp"
#include "tdem/error.hpp"

namespace tdem {

namespace {

constexpr int kMaxLocalRounds = 8;

// Quotient edge i -> j with the planar offset x_j - x_i - (q_j - q_i).
struct PeriodicEdge {
  int i, j;
  Vec2 offset;
};

std::vector<PeriodicEdge> periodic_edges(const PeriodicPlanarMesh& mesh, const QuotientIndex& q) {
  std::set<std::tuple<int, int, int, int>> seen;
  std::vector<PeriodicEdge> edges;
  for (const Face& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k], b = f[(k + 1) % 3];
      int i = q.quotient_of[a], j = q.quotient_of[b];
      Eigen::Vector2i s = q.shift[b] - q.shift[a];
      if (i > j) {
        std::swap(i, j);
        s = -s;
      }
      if (!seen.emplace(i, j, s.x(), s.y()).second) continue;
      edges.push_back({i, j, s.x() * mesh.period_lr + s.y() * mesh.period_tb});
    }
  }
  return edges;
}

std::vector<std::vector<std::pair<int, Vec2>>> periodic_adjacency(
    const std::vector<PeriodicEdge>& edges, int n) {
  std::vector<std::vector<std::pair<int, Vec2>>> adj(n);
  for (const PeriodicEdge& e : edges) {
    adj[e.i].emplace_back(e.j, e.offset);
    adj[e.j].emplace_back(e.i, -e.offset);
  }
  return adj;
}

// Uniform-weight Laplace solve for the vertices flagged in `free`; others
// stay put. Each free vertex lands at the average of its neighbors' images.
void laplace_reembed(std::vector<Vec2>& pos,
                     const std::vector<std::vector<std::pair<int, Vec2>>>& adj,
                     const std::vector<bool>& free) {
  const int n = static_cast<int>(pos.size());
  std::vector<int> slot(n, -1);
  int m = 0;
  for (int v = 0; v < n; ++v)
    if (free[v]) slot[v] = m++;
  if (m == 0) return;

  std::vector<Eigen::Triplet<double>> entries;
  Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(m, 2);
  for (int v = 0; v < n; ++v) {
    if (slot[v] < 0) continue;
    const int r = slot[v];
    entries.emplace_back(r, r, static_cast<double>(adj[v].size()));
    for (const auto& [w, offset] : adj[v]) {
      rhs.row(r) += offset.transpose();
      if (slot[w] >= 0) {
        entries.emplace_back(r, slot[w], -1.0);
      } else {
        rhs.row(r) += pos[w].transpose();
      }
    }
  }
  SparseOperator K(m, m);
  K.setFromTriplets(entries.begin(), entries.end());
  Eigen::SimplicialLDLT<SparseOperator> solver(K);
  if (solver.info() != Eigen::Success) throw SolverError("overlap re-embedding is singular");
  const Eigen::MatrixX2d x = solver.solve(rhs);
  for (int v = 0; v < n; ++v)
    if (slot[v] >= 0) pos[v] = x.row(slot[v]).transpose();
}

std::vector<int> flipped_faces(const PeriodicPlanarMesh& mesh) {
  std::vector<int> out;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.faces[f];
    if (signed_double_area(mesh.positions[t[0]], mesh.positions[t[1]], mesh.positions[t[2]]) <=
        0.0)
      out.push_back(f);
  }
  return out;
}

}  // namespace

OverlapReport correct_overlaps(PeriodicPlanarMesh& mesh, const QuotientIndex& q) {
  OverlapReport report;
  std::vector<int> flipped = flipped_faces(mesh);
  report.flips_before = static_cast<int>(flipped.size());
  report.flips_after = report.flips_before;
  if (flipped.empty()) return report;

  const auto adj = periodic_adjacency(periodic_edges(mesh, q), q.count);
  std::vector<bool> free(q.count, false);
  std::vector<Vec2> pos = quotient_positions(mesh, q);
  for (int round = 1; round <= kMaxLocalRounds && !flipped.empty(); ++round) {
    // Free the corners of every flipped face, then one more ring each round
    // after the first.
    for (int f : flipped)
      for (int c : mesh.faces[f]) free[q.quotient_of[c]] = true;
    if (round > 1) {
      const std::vector<bool> grown = free;
      for (int v = 0; v < q.count; ++v)
        if (grown[v])
          for (const auto& [w, offset] : adj[v]) free[w] = true;
    }
    if (std::all_of(free.begin(), free.end(), [](bool b) { return b; })) break;
    laplace_reembed(pos, adj, free);
    broadcast_positions(mesh, q, pos);
    flipped = flipped_faces(mesh);
    report.local_rounds = round;
  }

  if (!flipped.empty()) {
    // Periodic Tutte embedding of the whole mesh, one vertex pinned.
    std::fill(free.begin(), free.end(), true);
    free[0] = false;
    laplace_reembed(pos, adj, free);
    broadcast_positions(mesh, q, pos);
    flipped = flipped_faces(mesh);
    report.used_global_embedding = true;
  }
  report.flips_after = static_cast<int>(flipped.size());
  return report;
}

}  // namespace tdem
