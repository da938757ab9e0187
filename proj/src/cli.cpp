#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tdem/cli.hpp"
#include "tdem/engine.hpp"
#include "tdem/error.hpp"
#include "tdem/mesh.hpp"
#include "tdem/parameterization.hpp"
#include "tdem/population.hpp"
#include "tdem/torus.hpp"

namespace tdem {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct MakeTorusOptions {
  double major = 3.0;
  double minor = 1.0;
  int nu = 64;
  int nv = 32;
  std::string out;
};

struct TdemOptions {
  std::string mesh;
  std::string population = "uniform";
  TdemConfig config;
  std::optional<double> major;
  std::optional<double> minor;
  std::optional<int> base_vertex;
  bool no_overlap_correction = false;
  bool strict = false;
  std::string out_prefix;
};

struct ParameterizeOptions {
  std::string mesh;
  double major = 2.0;
  double minor = 1.0;
  std::string population = "area";
  std::string weights = "cotangent";
  TdemConfig config;
  std::optional<int> base_vertex;
  bool strict = false;
  std::string out_prefix;
};

struct MetricsOptions {
  std::string source;
  std::string mapped;
  std::optional<std::string> population;
  std::optional<double> major;
  std::optional<double> minor;
  std::string out_prefix;
};

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

fs::path with_suffix(const std::string& prefix, const std::string& suffix) {
  return fs::path(prefix + suffix);
}

void ensure_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (!parent.empty() && !fs::exists(parent)) {
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw IoError("cannot create directory " + parent.string());
  }
}

std::ofstream open_output(const fs::path& path) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

fs::path sidecar_path(const fs::path& mesh) {
  return mesh.parent_path() / (mesh.stem().string() + ".torus.json");
}

TorusSpec resolve_spec(const fs::path& mesh, std::optional<double> major,
                       std::optional<double> minor) {
  TorusSpec spec;
  if (major && minor) {
    spec = {*major, *minor};
  } else {
    const fs::path side = sidecar_path(mesh);
    std::ifstream in(side);
    if (!in)
      throw InvalidArgument("torus radii not given: pass --major and --minor or provide " +
                            side.string());
    Json j;
    try {
      in >> j;
      spec = {j.at("major").get<double>(), j.at("minor").get<double>()};
    } catch (const Json::exception& e) {
      throw IoError("bad sidecar " + side.string() + ": " + e.what());
    }
    if (major) spec.major = *major;
    if (minor) spec.minor = *minor;
  }
  spec.validate();
  return spec;
}

TriangleMesh planar_mesh(const PeriodicPlanarMesh& planar) {
  TriangleMesh m;
  m.vertices.reserve(planar.positions.size());
  for (const Vec2& p : planar.positions) m.vertices.emplace_back(p.x(), p.y(), 0.0);
  m.faces = planar.faces;
  return m;
}

// Normalized texture coordinates of each source vertex in [0, 1]^2.
std::vector<Vec2> texture_coordinates(const PeriodicPlanarMesh& planar, int num_vertices) {
  std::vector<Vec2> uv(num_vertices, Vec2::Zero());
  std::vector<bool> set(num_vertices, false);
  const double pi = std::numbers::pi;
  for (int c = 0; c < planar.num_vertices(); ++c) {
    const int o = planar.origin.empty() ? c : planar.origin[c];
    if (o >= num_vertices || set[o]) continue;
    const Vec2 p = canonicalize(planar.positions[c], planar.spec);
    uv[o] = {p.x() / planar.spec.width(), (p.y() + pi * planar.spec.minor) / planar.spec.height()};
    set[o] = true;
  }
  return uv;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_make_torus(const MakeTorusOptions& o, std::ostream& out) {
  TorusSpec{o.major, o.minor}.validate();
  if (o.nu < 3 || o.nv < 3) throw InvalidArgument("require nu >= 3 and nv >= 3");
  const fs::path path(o.out);
  const MeshFormat format = format_from_path(path);

  const TorusGrid grid = generate_torus_mesh(o.major, o.minor, o.nu, o.nv);
  ensure_parent(path);
  save_mesh(grid.mesh, path, format);

  const fs::path stem = path.parent_path() / path.stem();
  std::ofstream uv = open_output(stem.string() + ".uv.csv");
  uv << "vertex,u,v\n";
  for (int v = 0; v < grid.mesh.num_vertices(); ++v)
    uv << v << ',' << fmt17(grid.uv[v].x()) << ',' << fmt17(grid.uv[v].y()) << '\n';
  if (!uv) throw IoError("failed writing uv sidecar");

  Json side;
  side["major"] = o.major;
  side["minor"] = o.minor;
  side["nu"] = o.nu;
  side["nv"] = o.nv;
  std::ofstream js = open_output(stem.string() + ".torus.json");
  js << side.dump(2) << '\n';
  if (!js) throw IoError("failed writing torus sidecar");

  Json summary;
  summary["command"] = "make-torus";
  summary["out"] = o.out;
  summary["vertices"] = grid.mesh.num_vertices();
  summary["faces"] = grid.mesh.num_faces();
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_tdem(const TdemOptions& o, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  TdemConfig config = o.config;
  config.overlap_correction = !o.no_overlap_correction;
  config.validate();
  if (o.out_prefix.empty()) throw InvalidArgument("--out-prefix is required");
  const PopulationSpec pop_spec = parse_population_spec(o.population);
  const TorusSpec spec = resolve_spec(o.mesh, o.major, o.minor);

  const TriangleMesh mesh = load_mesh(o.mesh);
  std::optional<CutGraph> cut;
  if (o.base_vertex) cut = compute_cut_graph(mesh, *o.base_vertex);
  const FlattenedTorus flat = flatten_torus_mesh(mesh, spec, cut);
  const std::vector<double> population = evaluate_population(pop_spec, mesh, flat.planar);
  const TdemResult result = run_tdem(mesh, spec, population, config, flat.cut);
  const TdemReport& report = result.report;

  ensure_parent(with_suffix(o.out_prefix, ".mapped.obj"));
  save_mesh(result.mapped, with_suffix(o.out_prefix, ".mapped.obj"), MeshFormat::kObj);
  save_mesh(planar_mesh(result.planar), with_suffix(o.out_prefix, ".planar.obj"),
            MeshFormat::kObj);
  write_report_csv(report, with_suffix(o.out_prefix, ".report.csv"));

  const bool converged = report.status == TdemStatus::kConverged;
  Json summary;
  summary["command"] = "tdem";
  summary["mesh"] = fs::path(o.mesh).filename().string();
  summary["population"] = o.population;
  summary["major"] = spec.major;
  summary["minor"] = spec.minor;
  summary["vertices"] = mesh.num_vertices();
  summary["faces"] = mesh.num_faces();
  summary["initial_variance"] = report.initial_variance;
  summary["final_variance"] = report.final_variance;
  summary["initial_vertex_variance"] = report.initial_vertex_variance;
  summary["final_vertex_variance"] = report.final_vertex_variance;
  summary["initial_error"] = report.initial_error;
  summary["final_error"] = report.final_error;
  summary["iterations"] = report.iterations;
  summary["returned_iteration"] = report.returned_iteration;
  summary["converged"] = converged;
  summary["max_displacement"] = report.total_displacement;
  summary["max_seam_residual"] = report.max_seam_residual;
  summary["max_mass_drift"] = report.max_mass_drift;
  summary["residual_folds"] = report.residual_folds;
  summary["time_s"] = seconds_since(start);
  out << summary.dump() << '\n';

  if (!converged) {
    err << "warning: density error " << report.final_error << " still above epsilon "
        << config.epsilon << " after " << report.iterations << " iterations\n";
    if (o.strict) return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_parameterize(const ParameterizeOptions& o, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  o.config.validate();
  if (o.out_prefix.empty()) throw InvalidArgument("--out-prefix is required");
  const TorusSpec spec{o.major, o.minor};
  spec.validate();
  InitialMapOptions options;
  if (o.weights == "cotangent") {
    options.weights = HarmonicWeights::kCotangent;
  } else if (o.weights == "uniform") {
    options.weights = HarmonicWeights::kUniform;
  } else {
    throw InvalidArgument("unknown weights '" + o.weights + "'");
  }
  std::optional<PopulationSpec> csv_population;
  if (o.population.rfind("csv:", 0) == 0) {
    csv_population = parse_population_spec(o.population);
  } else if (o.population != "area" && o.population != "uniform") {
    throw InvalidArgument("population must be area, uniform or csv:PATH");
  }

  const TriangleMesh mesh = load_mesh(o.mesh);
  const int genus = euler_genus(mesh);
  if (genus != 1) throw TopologyError("genus " + std::to_string(genus) + ", require genus 1");
  if (o.base_vertex) options.cut = compute_cut_graph(mesh, *o.base_vertex);

  std::vector<double> population;
  if (csv_population) {
    population = read_population_csv(csv_population->csv, mesh.num_faces());
  } else if (o.population == "area") {
    population = area_preserving_population(mesh);
  } else {
    population.assign(mesh.faces.size(), 1.0);
  }

  const ParameterizationResult result = run_parameterization(mesh, spec, population, o.config,
                                                             options);
  const AreaDistortion dh = area_distortion(result.initial);
  const AreaDistortion df = area_distortion(result.final_map);

  const TriangleMesh image = result.final_map.image_mesh();
  ensure_parent(with_suffix(o.out_prefix, ".mapped.obj"));
  save_mesh(image, with_suffix(o.out_prefix, ".mapped.obj"), MeshFormat::kObj,
            texture_coordinates(result.final_map.planar, mesh.num_vertices()));
  save_mesh(planar_mesh(result.final_map.planar), with_suffix(o.out_prefix, ".planar.obj"),
            MeshFormat::kObj);
  write_report_csv(result.report, with_suffix(o.out_prefix, ".report.csv"));
  {
    std::ofstream csv = open_output(with_suffix(o.out_prefix, ".d_area.csv"));
    csv << "face,d_area_h,d_area_f\n";
    for (int f = 0; f < mesh.num_faces(); ++f)
      csv << f << ',' << fmt17(dh.per_face[f]) << ',' << fmt17(df.per_face[f]) << '\n';
    if (!csv) throw IoError("failed writing d_area csv");
  }
  {
    std::ofstream csv = open_output(with_suffix(o.out_prefix, ".histogram.csv"));
    csv << "bin_lower,bin_upper,count_h,count_f\n";
    for (int b = 0; b < AreaDistortion::kBins; ++b)
      csv << fmt17(AreaDistortion::bin_lower(b)) << ',' << fmt17(AreaDistortion::bin_lower(b + 1))
          << ',' << dh.histogram[b] << ',' << df.histogram[b] << '\n';
    if (!csv) throw IoError("failed writing histogram csv");
  }

  const bool converged = result.report.status == TdemStatus::kConverged;
  Json summary;
  summary["command"] = "parameterize";
  summary["mesh"] = fs::path(o.mesh).filename().string();
  summary["population"] = o.population;
  summary["major"] = spec.major;
  summary["minor"] = spec.minor;
  summary["weights"] =
      result.initial.weights_used == HarmonicWeights::kCotangent ? "cotangent" : "uniform";
  summary["vertices"] = mesh.num_vertices();
  summary["faces"] = mesh.num_faces();
  summary["mean_abs_d_area_h"] = dh.mean_abs;
  summary["mean_abs_d_area_f"] = df.mean_abs;
  summary["improvement_percent"] =
      dh.mean_abs > 0.0 ? 100.0 * (dh.mean_abs - df.mean_abs) / dh.mean_abs : 0.0;
  summary["initial_variance"] = result.report.initial_variance;
  summary["final_variance"] = result.report.final_variance;
  summary["iterations"] = result.report.iterations;
  summary["converged"] = converged;
  summary["residual_folds"] = result.report.residual_folds;
  summary["max_seam_residual"] = result.report.max_seam_residual;
  summary["time_s"] = seconds_since(start);
  out << summary.dump() << '\n';

  if (!converged) {
    err << "warning: density error " << result.report.final_error << " still above epsilon "
        << o.config.epsilon << " after " << result.report.iterations << " iterations\n";
    if (o.strict) return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_metrics(const MetricsOptions& o, std::ostream& out) {
  std::optional<TorusSpec> spec;
  if (o.major || o.minor) {
    if (!(o.major && o.minor)) throw InvalidArgument("give both --major and --minor");
    spec = TorusSpec{*o.major, *o.minor};
    spec->validate();
  }
  std::optional<PopulationSpec> pop_spec;
  if (o.population) pop_spec = parse_population_spec(*o.population);

  const TriangleMesh source = load_mesh(o.source);
  const TriangleMesh mapped = load_mesh(o.mapped);
  if (source.num_vertices() != mapped.num_vertices() || source.faces != mapped.faces)
    throw TopologyError("source and mapped meshes do not share connectivity");

  const AreaDistortion d = area_distortion(source, mapped.vertices);
  Json summary;
  summary["command"] = "metrics";
  summary["source"] = fs::path(o.source).filename().string();
  summary["mapped"] = fs::path(o.mapped).filename().string();
  summary["faces"] = source.num_faces();
  summary["mean_abs_d_area"] = d.mean_abs;

  if (pop_spec) {
    PeriodicPlanarMesh planar;
    const bool analytic = pop_spec->kind != PopulationSpec::Kind::kUniform &&
                          pop_spec->kind != PopulationSpec::Kind::kConstant &&
                          pop_spec->kind != PopulationSpec::Kind::kCsv;
    if (analytic) {
      if (!spec) throw InvalidArgument("population '" + *o.population + "' needs --major/--minor");
      planar = flatten_torus_mesh(source, *spec).planar;
    } else {
      planar.faces = source.faces;
    }
    const std::vector<double> population = evaluate_population(*pop_spec, source, planar);
    const std::vector<double> areas = face_areas(mapped);
    std::vector<double> rho(areas.size());
    for (size_t f = 0; f < areas.size(); ++f) rho[f] = population[f] / areas[f];
    summary["population"] = *o.population;
    summary["variance"] = normalized_variance(rho);
    summary["density_error"] = density_error(rho);
  }
  if (spec) {
    double worst = 0.0;
    for (const Vec3& p : mapped.vertices) worst = std::max(worst, std::abs(torus_distance(p, *spec)));
    summary["max_torus_residual"] = worst;
    summary["max_torus_residual_over_r"] = worst / spec->minor;
  }

  if (!o.out_prefix.empty()) {
    std::ofstream csv = open_output(with_suffix(o.out_prefix, ".d_area.csv"));
    csv << "face,d_area\n";
    for (int f = 0; f < source.num_faces(); ++f) csv << f << ',' << fmt17(d.per_face[f]) << '\n';
    std::ofstream hist = open_output(with_suffix(o.out_prefix, ".histogram.csv"));
    hist << "bin_lower,bin_upper,count\n";
    for (int b = 0; b < AreaDistortion::kBins; ++b)
      hist << fmt17(AreaDistortion::bin_lower(b)) << ',' << fmt17(AreaDistortion::bin_lower(b + 1))
           << ',' << d.histogram[b] << '\n';
    if (!csv || !hist) throw IoError("failed writing metrics csv");
  }
  out << summary.dump() << '\n';
  return kExitOk;
}

void add_tdem_config(CLI::App* cmd, TdemConfig& config) {
  cmd->add_option("--dt", config.dt, "time step")->capture_default_str();
  cmd->add_option("--epsilon", config.epsilon, "density error threshold")->capture_default_str();
  cmd->add_option("--nmax", config.n_max, "iteration cap")->capture_default_str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Toroidal density-equalizing maps and parameterizations", "tdem"};
  app.set_config("--config", "", "key=value config file; command-line flags take precedence");
  app.require_subcommand(1);

  MakeTorusOptions mt;
  auto* make = app.add_subcommand("make-torus", "generate a torus grid mesh");
  make->add_option("--major", mt.major, "major radius R")->capture_default_str();
  make->add_option("--minor", mt.minor, "minor radius r")->capture_default_str();
  make->add_option("--nu", mt.nu, "toroidal divisions")->capture_default_str();
  make->add_option("--nv", mt.nv, "poloidal divisions")->capture_default_str();
  make->add_option("--out", mt.out, "output mesh (.obj or .ply)")->required();

  TdemOptions td;
  auto* tdem_cmd = app.add_subcommand("tdem", "density-equalizing map of a torus mesh");
  tdem_cmd->add_option("--mesh", td.mesh, "torus mesh")->required();
  tdem_cmd->add_option("--population", td.population,
                       "uniform|constant|cos_u|sinusoid|ball[:u0,v0,rad,in,out]|csv:PATH")
      ->capture_default_str();
  add_tdem_config(tdem_cmd, td.config);
  tdem_cmd->add_option("--major", td.major, "major radius (default: sidecar)");
  tdem_cmd->add_option("--minor", td.minor, "minor radius (default: sidecar)");
  tdem_cmd->add_option("--base-vertex", td.base_vertex, "base vertex of the cut graph");
  tdem_cmd->add_flag("--no-overlap-correction", td.no_overlap_correction,
                     "disable fold repair");
  tdem_cmd->add_flag("--strict", td.strict, "exit 3 when epsilon is not reached");
  tdem_cmd->add_option("--out-prefix", td.out_prefix, "output path prefix")->required();

  ParameterizeOptions pz;
  auto* param = app.add_subcommand("parameterize", "toroidal parameterization of a genus-one mesh");
  param->add_option("--mesh", pz.mesh, "genus-one mesh")->required();
  param->add_option("--major", pz.major, "target major radius")->capture_default_str();
  param->add_option("--minor", pz.minor, "target minor radius")->capture_default_str();
  param->add_option("--population", pz.population, "area|uniform|csv:PATH")->capture_default_str();
  param->add_option("--weights", pz.weights, "cotangent|uniform")->capture_default_str();
  add_tdem_config(param, pz.config);
  param->add_option("--base-vertex", pz.base_vertex, "base vertex of the cut graph");
  param->add_flag("--strict", pz.strict, "exit 3 when epsilon is not reached");
  param->add_option("--out-prefix", pz.out_prefix, "output path prefix")->required();

  MetricsOptions mo;
  auto* metrics = app.add_subcommand("metrics", "area distortion and density metrics");
  metrics->add_option("--source", mo.source, "source mesh")->required();
  metrics->add_option("--mapped", mo.mapped, "mapped mesh with the same connectivity")->required();
  metrics->add_option("--population", mo.population, "population for the density variance");
  metrics->add_option("--major", mo.major, "torus major radius for on-surface residuals");
  metrics->add_option("--minor", mo.minor, "torus minor radius for on-surface residuals");
  metrics->add_option("--out-prefix", mo.out_prefix, "write d_area and histogram CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (*make) return cmd_make_torus(mt, out);
    if (*tdem_cmd) return cmd_tdem(td, out, err);
    if (*param) return cmd_parameterize(pz, out, err);
    if (*metrics) return cmd_metrics(mo, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const SolverError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace tdem
