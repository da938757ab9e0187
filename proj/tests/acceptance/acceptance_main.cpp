// Acceptance harness: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tdem/cli.hpp"
#include "tdem/engine.hpp"
#include "tdem/operators.hpp"
#include "tdem/parameterization.hpp"
#include "tdem/population.hpp"

using namespace tdem;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

// The ~7k-face (3, 1) grid used by the reproduction runs.
constexpr int kNu = 70, kNv = 50;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [violated]");
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Worst per-iteration conservation and seam values over every logged run.
struct RunLog {
  int runs = 0;
  int iterations = 0;
  double mass_drift = 0.0;
  double seam_residual = 0.0;

  void add(const TdemReport& r) {
    ++runs;
    iterations += static_cast<int>(r.records.size());
    for (const IterationRecord& rec : r.records) {
      mass_drift = std::max(mass_drift, rec.mass_drift);
      seam_residual = std::max(seam_residual, rec.seam_residual);
    }
  }
};

RunLog g_log;

struct GridRun {
  TorusGrid grid;
  TdemResult result;
  double seconds = 0.0;
};

GridRun run_grid(double R, double r, int nu, int nv, const std::string& population,
                 std::optional<CutGraph> cut = std::nullopt) {
  GridRun out{generate_torus_mesh(R, r, nu, nv), {}, 0.0};
  const FlattenedTorus flat =
      flatten_torus_mesh(out.grid.mesh, {R, r}, cut ? cut : std::optional(grid_cut_graph(out.grid)));
  const auto p = evaluate_population(parse_population_spec(population), out.grid.mesh, flat.planar);
  const auto t0 = std::chrono::steady_clock::now();
  out.result = run_tdem(out.grid.mesh, {R, r}, p, {}, flat.cut);
  out.seconds = seconds_since(t0);
  g_log.add(out.result.report);
  return out;
}

Verdict table1() {
  Verdict v;
  struct Row {
    const char* population;
    double initial;
  };
  for (const Row& row : {Row{"cos_u", 0.196}, Row{"sinusoid", 0.218}}) {
    const GridRun g = run_grid(3, 1, kNu, kNv, row.population);
    const TdemReport& rep = g.result.report;
    const std::string tag = std::string(row.population) + ": ";
    v.require(std::abs(rep.initial_variance - row.initial) <= 0.02,
              tag + "initial Var " + fmt("%.4f", rep.initial_variance));
    v.require(rep.final_variance <= 1e-3, tag + "final Var " + fmt("%.3e", rep.final_variance) +
                                              " (vertex " + fmt("%.2e", rep.final_vertex_variance) +
                                              ")");
    v.require(g.seconds <= 60.0, tag + fmt("%.1f s", g.seconds));
  }
  v.detail = std::to_string(2 * kNu * kNv) + " faces; " + v.detail;
  return v;
}

Verdict table2() {
  Verdict v;
  struct Row {
    double R;
    int nu, nv;
    double reference;
  };
  const Row rows[] = {{2, 140, 100, 0.3045}, {4, 160, 48, 0.1910}, {6, 180, 42, 0.1699},
                      {8, 210, 42, 0.1583}, {10, 240, 42, 0.1483}};
  double previous = 1e300;
  for (const Row& row : rows) {
    const GridRun g = run_grid(row.R, 1, row.nu, row.nv, "sinusoid");
    const TdemReport& rep = g.result.report;
    const std::string tag = "R=" + fmt("%g", row.R) + ": ";
    v.require(rep.initial_variance < previous, tag + "initial " + fmt("%.4f", rep.initial_variance));
    v.require(std::abs(rep.initial_variance - row.reference) <= 0.03,
              tag + "|diff| " + fmt("%.4f", std::abs(rep.initial_variance - row.reference)));
    v.require(rep.final_variance <= 1e-3, tag + "final " + fmt("%.2e", rep.final_variance));
    previous = rep.initial_variance;
  }
  return v;
}

Verdict cut_independence() {
  Verdict v;
  const TorusGrid grid = generate_torus_mesh(3, 1, kNu, kNv);
  // Grid-line cut through vertex 0 versus a computed cut rooted across the torus.
  const int far_base = (kNu / 2) * kNv + kNv / 3;
  const GridRun a = run_grid(3, 1, kNu, kNv, "ball", grid_cut_graph(grid));
  const GridRun b = run_grid(3, 1, kNu, kNv, "ball", compute_cut_graph(grid.mesh, far_base));
  v.require(a.result.cut.base_vertex != b.result.cut.base_vertex, "distinct base vertices");
  const double va = a.result.report.final_variance, vb = b.result.report.final_variance;
  v.require(std::max(va, vb) <= 2.0 * std::min(va, vb),
            "final Var " + fmt("%.3e", va) + " vs " + fmt("%.3e", vb));
  double dist = 0.0;
  for (size_t i = 0; i < a.result.mapped.vertices.size(); ++i)
    dist = std::max(dist, (a.result.mapped.vertices[i] - b.result.mapped.vertices[i]).norm());
  v.require(dist <= 1e-2 * 1.0, "max position gap " + fmt("%.2e", dist));
  return v;
}

Verdict identity() {
  Verdict v;
  struct Case {
    double R, r;
    int nu, nv;
  };
  for (const Case& c : {Case{3, 1, kNu, kNv}, Case{2, 1, 40, 24}, Case{10, 1, 120, 16},
                        Case{1.5, 0.4, 30, 18}}) {
    const TorusGrid g = generate_torus_mesh(c.R, c.r, c.nu, c.nv);
    const TdemResult res =
        run_tdem(g.mesh, {c.R, c.r}, face_areas(g.mesh), {}, grid_cut_graph(g));
    g_log.add(res.report);
    double disp = res.report.total_displacement;
    for (size_t i = 0; i < g.mesh.vertices.size(); ++i)
      disp = std::max(disp, (res.mapped.vertices[i] - g.mesh.vertices[i]).norm());
    v.require(disp <= 1e-9 * c.r,
              "(" + fmt("%g", c.R) + "," + fmt("%g", c.r) + ") max displacement " + fmt("%.1e", disp));
  }
  return v;
}

Verdict conservation() {
  Verdict v;
  v.require(g_log.mass_drift <= 1e-10, "max relative drift " + fmt("%.2e", g_log.mass_drift) +
                                           " over " + std::to_string(g_log.iterations) +
                                           " steps in " + std::to_string(g_log.runs) + " runs");
  return v;
}

Verdict seams() {
  Verdict v;
  v.require(g_log.seam_residual <= 1e-9, "max residual " + fmt("%.2e", g_log.seam_residual) +
                                             " over " + std::to_string(g_log.iterations) +
                                             " iterations");
  return v;
}

Verdict operators() {
  Verdict v;
  // Unit square split along (0,0)-(1,1): weights 1/2 on the sides, 0 on the diagonal.
  {
    const Vec2 p0(0, 0), p1(1, 0), p2(1, 1), p3(0, 1);
    const std::vector<FaceStencil> sq{FaceStencil{{0, 1, 2}, {p0, p1, p2}},
                                      FaceStencil{{0, 2, 3}, {p0, p2, p3}}};
    const Eigen::MatrixXd L = Eigen::MatrixXd(cotangent_laplacian(sq, 4));
    const double c45 = std::cos(kPi / 4) / std::sin(kPi / 4), c90 = 0.0;
    Eigen::Matrix4d expect = Eigen::Matrix4d::Zero();
    auto edge = [&](int i, int j, double w) {
      expect(i, j) -= w;
      expect(j, i) -= w;
      expect(i, i) += w;
      expect(j, j) += w;
    };
    edge(0, 1, c45 / 2);
    edge(1, 2, c45 / 2);
    edge(2, 3, c45 / 2);
    edge(3, 0, c45 / 2);
    edge(0, 2, (c90 + c90) / 2);
    const double err = (L - expect).cwiseAbs().maxCoeff();
    v.require(err <= 1e-14, "unit-square Laplacian error " + fmt("%.1e", err));
  }
  // Random affine fields on a jittered patch.
  {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> jit(-0.25, 0.25), coef(-5, 5);
    const int n = 8;
    std::vector<Vec2> pts;
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) pts.emplace_back(i + jit(rng), j + jit(rng));
    std::vector<FaceStencil> st;
    auto id = [](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
        st.push_back({{a, b, c}, {pts[a], pts[b], pts[c]}});
        st.push_back({{a, c, d}, {pts[a], pts[c], pts[d]}});
      }
    double err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const double ga = coef(rng), gb = coef(rng), gc = coef(rng);
      Vector f(pts.size());
      for (size_t i = 0; i < pts.size(); ++i) f[i] = ga * pts[i].x() + gb * pts[i].y() + gc;
      for (const Vec2& g : face_gradient(st, f)) err = std::max(err, (g - Vec2(ga, gb)).norm());
    }
    v.require(err <= 1e-12, "affine gradient error " + fmt("%.1e", err));
  }
  // Face-to-vertex averaging rows and cut-vs-uncut assembly on a flat periodic grid.
  {
    const TorusSpec spec{3, 1};
    const TorusGrid g = generate_torus_mesh(3, 1, 16, 10);
    const PeriodicPlanarMesh m = flatten_cut_torus(cut_along(g.mesh, grid_cut_graph(g)), spec);
    const QuotientIndex q = build_quotient_index(m.seams, m.num_vertices());
    const SparseOperator F = face_to_vertex(m, q);
    const Vector rows = F * Vector::Ones(F.cols());
    const double row_err = (rows.array() - 1.0).abs().maxCoeff();
    v.require(row_err <= 1e-14, "averaging row sums error " + fmt("%.1e", row_err));

    std::vector<FaceStencil> direct;
    for (const Face& t : g.mesh.faces) {
      std::array<Vec2, 3> c;
      for (int k = 0; k < 3; ++k) {
        Vec2 p = g.uv[t[k]];
        if (k > 0) {
          const Vec2 d = p - c[0];
          p.x() -= spec.width() * std::round(d.x() / spec.width());
          p.y() -= spec.height() * std::round(d.y() / spec.height());
        }
        c[k] = p;
      }
      direct.push_back({{t[0], t[1], t[2]}, c});
    }
    const int nv = g.mesh.num_vertices();
    const Eigen::MatrixXd Ld = Eigen::MatrixXd(cotangent_laplacian(direct, nv));
    const Eigen::MatrixXd Md = Eigen::MatrixXd(lumped_mass(direct, nv));
    const Eigen::MatrixXd Lq = Eigen::MatrixXd(cotangent_laplacian(m, q));
    const Eigen::MatrixXd Mq = Eigen::MatrixXd(lumped_mass(m, q));
    double diff = 0.0;
    for (int a = 0; a < nv; ++a) {
      const int qa = q.quotient_of[a];
      diff = std::max(diff, std::abs(Mq(qa, qa) - Md(a, a)));
      for (int b = 0; b < nv; ++b)
        diff = std::max(diff, std::abs(Lq(qa, q.quotient_of[b]) - Ld(a, b)));
    }
    v.require(diff <= 1e-12, "cut vs uncut difference " + fmt("%.1e", diff));
  }
  return v;
}

Verdict projection() {
  Verdict v;
  const TorusSpec s{3, 1};
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uu(0, s.width()), vv(-kPi * s.minor, kPi * s.minor);
  std::uniform_real_distribution<double> jitter(-1e-7, 1e-7);
  const double nearby_u[] = {0, kPi / 2 * s.major, kPi * s.major, 1.5 * kPi * s.major, s.width()};
  const double nearby_v[] = {-kPi * s.minor, -kPi / 2 * s.minor, 0, kPi / 2 * s.minor,
                             kPi * s.minor};
  double worst = 0.0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    Vec2 p(uu(rng), vv(rng));
    if (k % 3 == 1) p.x() = nearby_u[k % 5] + jitter(rng);
    if (k % 3 == 2) p.y() = nearby_v[(k / 3) % 5] + jitter(rng);
    p = canonicalize(p, s);
    const Vec2 q = inverse_project(project_to_torus(p, s), s);
    double du = std::abs(q.x() - p.x()), dv = std::abs(q.y() - p.y());
    du = std::min(du, s.width() - du);
    dv = std::min(dv, s.height() - dv);
    worst = std::max(worst, std::hypot(du, dv));
  }
  v.require(worst <= 1e-10 * (s.major + s.minor),
            std::to_string(n) + " points, max error " + fmt("%.1e", worst));
  return v;
}

Verdict parameterization() {
  Verdict v;
  const TorusSpec spec{2, 1};
  for (const char* name : {"bumpy_torus.obj", "trefoil_tube.obj", "graded_torus.obj",
                           "twisted_ring.obj"}) {
    const TriangleMesh mesh = load_mesh(fs::path(TDEM_DATA_DIR) / name);
    const auto t0 = std::chrono::steady_clock::now();
    const ParameterizationResult r =
        run_parameterization(mesh, spec, area_preserving_population(mesh), {});
    const double secs = seconds_since(t0);
    const double h = area_distortion(r.initial).mean_abs;
    const double f = area_distortion(r.final_map).mean_abs;
    double off = 0.0;
    for (const Vec3& p : r.final_map.vertex_images) off = std::max(off, std::abs(torus_distance(p, spec)));
    const int folds = count_flipped_faces(r.final_map.planar);
    const double improvement = 100.0 * (1.0 - f / h);
    v.require(improvement >= 50.0 && folds == 0 && off <= 1e-10 * spec.minor && secs <= 120.0,
              std::string(name) + " " + fmt("%.1f%%", improvement) + ", folds " +
                  std::to_string(folds) + ", off-torus " + fmt("%.1e", off) + ", " +
                  fmt("%.1f s", secs));
  }
  return v;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tdem");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism() {
  Verdict v;
  const fs::path dir = fs::path(TDEM_TEST_TMP) / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (const char* run : {"a", "b"}) {
    const std::string mesh = (dir / (std::string(run) + "_torus.obj")).string();
    const int c1 = cli({"make-torus", "--major", "3", "--minor", "1", "--nu", std::to_string(kNu),
                        "--nv", std::to_string(kNv), "--out", mesh});
    const int c2 = cli({"tdem", "--mesh", mesh, "--population", "cos_u", "--out-prefix",
                        (dir / run).string()});
    v.require(c1 == 0 && c2 == 0, std::string("run ") + run + " exit codes " +
                                      std::to_string(c1) + "," + std::to_string(c2));
  }
  for (const char* suffix : {"_torus.obj", "_torus.uv.csv", "_torus.torus.json", ".mapped.obj",
                             ".planar.obj", ".report.csv"}) {
    const std::string a = slurp(dir / (std::string("a") + suffix));
    const std::string b = slurp(dir / (std::string("b") + suffix));
    v.require(!a.empty() && a == b, std::string(suffix) + " identical");
  }
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<Verdict()> check;
  };
  // Conservation and seam checks read the logs of the runs before them.
  const Criterion criteria[] = {
      {1, "variance reduction on the (3,1) torus", table1},
      {2, "initial variance trend over R", table2},
      {3, "cut-path independence", cut_independence},
      {4, "identity for a uniform population", identity},
      {5, "population conservation", conservation},
      {6, "seam translation residual", seams},
      {7, "operator oracles", operators},
      {8, "projection round trip", projection},
      {9, "parameterization improvement", parameterization},
      {10, "determinism", determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    if (!v.pass) ++failed;
    std::printf("criterion %d %s: %s (%s) [%.1f s]\n", c.id, c.title, v.pass ? "PASS" : "FAIL",
                v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
