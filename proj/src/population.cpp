#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tdem/error.hpp"
#include "tdem/population.hpp"

namespace tdem {

namespace {

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("bad number '" + item + "' in " + what);
    }
  }
  return out;
}

Vec2 centroid(const PeriodicPlanarMesh& planar, int f) {
  const Face& t = planar.faces[f];
  const Vec2 c = (planar.positions[t[0]] + planar.positions[t[1]] + planar.positions[t[2]]) / 3.0;
  return canonicalize(c, planar.spec);
}

// Signed offset in [-period / 2, period / 2).
double periodic_delta(double d, double period) {
  return d - period * std::floor(d / period + 0.5);
}

}  // namespace

PopulationSpec parse_population_spec(const std::string& text) {
  PopulationSpec spec;
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (name == "uniform" || name == "area") {
    spec.kind = PopulationSpec::Kind::kUniform;
  } else if (name == "constant") {
    spec.kind = PopulationSpec::Kind::kConstant;
  } else if (name == "cos_u") {
    spec.kind = PopulationSpec::Kind::kCosU;
  } else if (name == "sinusoid") {
    spec.kind = PopulationSpec::Kind::kSinusoid;
  } else if (name == "ball") {
    spec.kind = PopulationSpec::Kind::kBall;
    if (!args.empty()) {
      const auto v = parse_numbers(args, "ball population");
      if (v.size() != 5) throw InvalidArgument("ball population needs u0,v0,radius,in,out");
      spec.default_ball = false;
      spec.u0 = v[0];
      spec.v0 = v[1];
      spec.radius = v[2];
      spec.inside = v[3];
      spec.outside = v[4];
      if (!(spec.radius > 0.0 && spec.inside > 0.0 && spec.outside > 0.0))
        throw InvalidArgument("ball radius and values must be positive");
    }
  } else if (name == "csv") {
    if (args.empty()) throw InvalidArgument("csv population needs a path");
    spec.kind = PopulationSpec::Kind::kCsv;
    spec.csv = args;
  } else {
    throw InvalidArgument("unknown population '" + text + "'");
  }
  return spec;
}

std::vector<double> evaluate_population(const PopulationSpec& spec, const TriangleMesh& mesh,
                                        const PeriodicPlanarMesh& planar) {
  const int nf = planar.num_faces();
  std::vector<double> out(nf);
  const double R = planar.spec.major, r = planar.spec.minor;
  switch (spec.kind) {
    case PopulationSpec::Kind::kUniform:
      out = face_areas(mesh);
      break;
    case PopulationSpec::Kind::kConstant:
      std::fill(out.begin(), out.end(), 1.0);
      break;
    case PopulationSpec::Kind::kCosU:
      for (int f = 0; f < nf; ++f) out[f] = 2.0 - std::cos(centroid(planar, f).x());
      break;
    case PopulationSpec::Kind::kSinusoid:
      for (int f = 0; f < nf; ++f) {
        const Vec2 c = centroid(planar, f);
        out[f] = 1.2 - std::sin(c.x()) * std::sin(c.y());
      }
      break;
    case PopulationSpec::Kind::kBall: {
      const double u0 = spec.default_ball ? std::numbers::pi * R : spec.u0;
      const double v0 = spec.default_ball ? 0.5 * std::numbers::pi * r : spec.v0;
      const double rad = spec.default_ball ? 0.5 * r : spec.radius;
      for (int f = 0; f < nf; ++f) {
        const Vec2 c = centroid(planar, f);
        const double du = periodic_delta(c.x() - u0, planar.spec.width());
        const double dv = periodic_delta(c.y() - v0, planar.spec.height());
        out[f] = std::hypot(du, dv) <= rad ? spec.inside : spec.outside;
      }
      break;
    }
    case PopulationSpec::Kind::kCsv:
      out = read_population_csv(spec.csv, nf);
      break;
  }
  return out;
}

std::vector<double> read_population_csv(const std::filesystem::path& path, int num_faces) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> out(num_faces, 0.0);
  std::vector<bool> given(num_faces, false);
  std::string text;
  int line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    const auto comma = text.find(',');
    if (comma == std::string::npos)
      throw IoError("expected face_index,value at line " + std::to_string(line_no));
    long face = 0;
    double value = 0.0;
    try {
      face = std::stol(text.substr(0, comma));
      value = std::stod(text.substr(comma + 1));
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header
      throw IoError("malformed population row at line " + std::to_string(line_no));
    }
    if (face < 0 || face >= num_faces)
      throw InvalidArgument("population face index " + std::to_string(face) + " out of range");
    if (given[face])
      throw InvalidArgument("population face " + std::to_string(face) + " given twice");
    if (!(value > 0.0) || !std::isfinite(value))
      throw InvalidArgument("population of face " + std::to_string(face) + " is not positive");
    out[face] = value;
    given[face] = true;
  }
  for (int f = 0; f < num_faces; ++f)
    if (!given[f]) throw InvalidArgument("population missing face " + std::to_string(f));
  return out;
}

}  // namespace tdem
