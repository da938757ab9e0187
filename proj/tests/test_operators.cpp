#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "tdem/error.hpp"
#include "tdem/operators.hpp"

using namespace tdem;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

FaceStencil stencil(std::array<int, 3> ids, std::array<Vec2, 3> corners) {
  return FaceStencil{ids, corners};
}

std::vector<FaceStencil> unit_square() {
  const Vec2 p0(0, 0), p1(1, 0), p2(1, 1), p3(0, 1);
  return {stencil({0, 1, 2}, {p0, p1, p2}), stencil({0, 2, 3}, {p0, p2, p3})};
}

// A jittered planar patch with distinct vertices, used for affine checks.
std::vector<FaceStencil> jittered_patch(int n, std::vector<Vec2>& pts) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> jit(-0.2, 0.2);
  pts.clear();
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) pts.emplace_back(i + jit(rng), j + jit(rng));
  std::vector<FaceStencil> out;
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      out.push_back(stencil({a, b, c}, {pts[a], pts[b], pts[c]}));
      out.push_back(stencil({a, c, d}, {pts[a], pts[c], pts[d]}));
    }
  return out;
}

struct FlatGrid {
  TorusGrid grid;
  PeriodicPlanarMesh mesh;
  QuotientIndex q;
};

FlatGrid flat_grid(double R, double r, int nu, int nv) {
  FlatGrid g{generate_torus_mesh(R, r, nu, nv), {}, {}};
  g.mesh = flatten_cut_torus(cut_along(g.grid.mesh, grid_cut_graph(g.grid)), {R, r});
  g.q = build_quotient_index(g.mesh.seams, g.mesh.num_vertices());
  return g;
}

Eigen::MatrixXd dense(const SparseOperator& m) { return Eigen::MatrixXd(m); }

}  // namespace

TEST_CASE("lumped mass of a single triangle") {
  const std::vector<FaceStencil> s{stencil({0, 1, 2}, {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)})};
  const Eigen::MatrixXd M = dense(lumped_mass(s, 3));
  for (int i = 0; i < 3; ++i) {
    CHECK(M(i, i) == Approx(1.0 / 6).epsilon(1e-15));
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(M(i, j) == 0.0);
  }
}

TEST_CASE("cotangent Laplacian of the unit square") {
  const Eigen::MatrixXd L = dense(cotangent_laplacian(unit_square(), 4));
  Eigen::Matrix4d expect;
  expect << 1, -0.5, 0, -0.5,
           -0.5, 1, -0.5, 0,
            0, -0.5, 1, -0.5,
           -0.5, 0, -0.5, 1;
  CHECK((L - expect).cwiseAbs().maxCoeff() < 1e-14);
  const SparseOperator Ls = cotangent_laplacian(unit_square(), 4);
  CHECK(Ls.coeff(0, 2) == 0.0);
}

TEST_CASE("degenerate stencils are rejected") {
  const std::vector<FaceStencil> s{stencil({0, 1, 2}, {Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)})};
  CHECK_THROWS_AS(lumped_mass(s, 3), GeometryError);
  CHECK_THROWS_AS(cotangent_laplacian(s, 3), GeometryError);
}

TEST_CASE("periodic grid operators: constants, symmetry, semidefiniteness, mass") {
  const FlatGrid g = flat_grid(3, 1, 14, 9);
  const SparseOperator L = cotangent_laplacian(g.mesh, g.q);
  const SparseOperator M = lumped_mass(g.mesh, g.q);
  REQUIRE(L.rows() == g.q.count);
  REQUIRE(g.q.count == 14 * 9);

  const Vector ones = Vector::Ones(g.q.count);
  CHECK((L * ones).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::MatrixXd Ld = dense(L);
  CHECK((Ld - Ld.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Ld);
  CHECK(eig.eigenvalues().minCoeff() > -1e-10);
  // Exactly one zero mode on a connected mesh.
  CHECK(eig.eigenvalues()(1) > 1e-6);

  const double area = 4 * kPi * kPi * 3 * 1;
  CHECK(M.diagonal().sum() == Approx(area).epsilon(1e-12));
  CHECK(M.diagonal().minCoeff() > 0.0);
}

TEST_CASE("face_to_vertex averages and preserves constants") {
  const FlatGrid g = flat_grid(2, 1, 10, 8);
  const SparseOperator F = face_to_vertex(g.mesh, g.q);
  CHECK(F.rows() == g.q.count);
  CHECK(F.cols() == g.mesh.num_faces());
  const Vector c = Vector::Constant(g.mesh.num_faces(), 2.5);
  CHECK((F * c - Vector::Constant(g.q.count, 2.5)).cwiseAbs().maxCoeff() < 1e-14);
  // Area-weighted: M * (F * rho) integrates rho over faces.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> val(0.5, 2);
  Vector rho(g.mesh.num_faces());
  for (auto& x : rho) x = val(rng);
  const auto st = make_stencils(g.mesh, g.q);
  double integral = 0.0;
  for (size_t f = 0; f < st.size(); ++f) integral += rho[f] * st[f].area();
  const SparseOperator M = lumped_mass(g.mesh, g.q);
  CHECK((M * (F * rho)).sum() == Approx(integral).epsilon(1e-12));
}

TEST_CASE("face gradient is exact for affine functions") {
  std::vector<Vec2> pts;
  const auto st = jittered_patch(6, pts);
  const double a = 1.7, b = -0.3, c = 4.0;
  Vector f(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) f[i] = a * pts[i].x() + b * pts[i].y() + c;
  for (const Vec2& grad : face_gradient(st, f)) {
    CHECK(grad.x() == Approx(a).epsilon(1e-12));
    CHECK(grad.y() == Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("quotient operators match operators built without cutting") {
  const FlatGrid g = flat_grid(3, 1, 12, 8);
  const TorusSpec s{3, 1};
  // Stencils straight from the uncut grid, unwrapping each face around its first corner.
  std::vector<FaceStencil> direct;
  for (const Face& t : g.grid.mesh.faces) {
    std::array<Vec2, 3> c;
    for (int k = 0; k < 3; ++k) {
      Vec2 p = g.grid.uv[t[k]];
      if (k > 0) {
        const Vec2 d = p - c[0];
        p.x() -= s.width() * std::round(d.x() / s.width());
        p.y() -= s.height() * std::round(d.y() / s.height());
      }
      c[k] = p;
    }
    direct.push_back(stencil({t[0], t[1], t[2]}, c));
  }
  const int n = static_cast<int>(g.grid.mesh.vertices.size());
  const Eigen::MatrixXd Ld = dense(cotangent_laplacian(direct, n));
  const Eigen::MatrixXd Md = dense(lumped_mass(direct, n));
  const Eigen::MatrixXd Lq = dense(cotangent_laplacian(g.mesh, g.q));
  const Eigen::MatrixXd Mq = dense(lumped_mass(g.mesh, g.q));
  double worst = 0.0;
  for (int a = 0; a < n; ++a) {
    const int qa = g.q.quotient_of[a];
    worst = std::max(worst, std::abs(Mq(qa, qa) - Md(a, a)));
    for (int b = 0; b < n; ++b) worst = std::max(worst, std::abs(Lq(qa, g.q.quotient_of[b]) - Ld(a, b)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("backward Euler: 2x2 oracle") {
  SparseOperator A(2, 2), L(2, 2);
  A.setIdentity();
  L.insert(0, 0) = 1;
  L.insert(0, 1) = -1;
  L.insert(1, 0) = -1;
  L.insert(1, 1) = 1;
  const DiffusionResult r = backward_euler_step(A, L, Vector(Eigen::Vector2d(2, 0)), 1.0);
  CHECK(r.density[0] == Approx(4.0 / 3).epsilon(1e-12));
  CHECK(r.density[1] == Approx(2.0 / 3).epsilon(1e-12));
  CHECK(r.relative_residual <= 1e-10);
  CHECK_THROWS_AS(backward_euler_step(A, L, Vector(Eigen::Vector2d(2, 0)), 0.0), SolverError);
}

TEST_CASE("backward Euler: constants, conservation and the maximum principle") {
  const FlatGrid g = flat_grid(3, 1, 24, 12);
  const SparseOperator L = cotangent_laplacian(g.mesh, g.q);
  const SparseOperator A = lumped_mass(g.mesh, g.q);

  const Vector flat = Vector::Constant(g.q.count, 3.0);
  CHECK((backward_euler_step(A, L, flat, 0.1).density - flat).cwiseAbs().maxCoeff() < 1e-10);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> val(0.2, 5);
  Vector rho(g.q.count);
  for (auto& x : rho) x = val(rng);
  const double mass = (A * rho).sum();
  for (double dt : {0.01, 0.1, 1.0}) {
    CAPTURE(dt);
    const DiffusionResult r = backward_euler_step(A, L, rho, dt);
    CHECK(std::abs((A * r.density).sum() - mass) <= 1e-10 * mass);
    // Rectangle-diagonal grids have nonnegative cotangent weights.
    CHECK(r.density.minCoeff() >= rho.minCoeff() - 1e-12);
    CHECK(r.density.maxCoeff() <= rho.maxCoeff() + 1e-12);
    CHECK(r.density.maxCoeff() - r.density.minCoeff() < rho.maxCoeff() - rho.minCoeff());
  }
}

TEST_CASE("quotient index identifies every seam copy") {
  const FlatGrid g = flat_grid(3, 1, 9, 7);
  CHECK(g.q.count == 63);
  for (auto [l, r] : g.mesh.seams.pairs_lr) {
    CHECK(g.q.quotient_of[l] == g.q.quotient_of[r]);
    const Vec2 d = g.mesh.positions[r] - g.mesh.positions[l];
    const Eigen::Vector2i k = g.q.shift[r] - g.q.shift[l];
    CHECK((d - (k.x() * g.mesh.period_lr + k.y() * g.mesh.period_tb)).norm() < 1e-12);
  }
  for (auto [b, t] : g.mesh.seams.pairs_tb) CHECK(g.q.quotient_of[b] == g.q.quotient_of[t]);
  const auto qp = quotient_positions(g.mesh, g.q);
  PeriodicPlanarMesh copy = g.mesh;
  broadcast_positions(copy, g.q, qp);
  for (int v = 0; v < copy.num_vertices(); ++v)
    CHECK((copy.positions[v] - g.mesh.positions[v]).norm() < 1e-12);
}
