#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "tdem/error.hpp"
#include "tdem/mesh.hpp"

namespace tdem {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// OBJ face token "v", "v/vt", "v//vn" or "v/vt/vn"; returns 0-based vertex id.
int parse_obj_index(const std::string& token, int num_vertices, int line) {
  const std::string head = token.substr(0, token.find('/'));
  long value = 0;
  try {
    size_t used = 0;
    value = std::stol(head, &used);
    if (used != head.size()) throw std::invalid_argument(head);
  } catch (const std::exception&) {
    throw IoError("bad face index '" + token + "' at line " + std::to_string(line));
  }
  if (value < 0) value += num_vertices + 1;
  if (value <= 0 || value > num_vertices)
    throw TopologyError("face index " + head + " out of range at line " + std::to_string(line));
  return static_cast<int>(value - 1);
}

TriangleMesh read_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  TriangleMesh mesh;
  std::string text;
  int line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    std::istringstream line(text);
    std::string tag;
    if (!(line >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(line >> p.x() >> p.y() >> p.z()))
        throw IoError("malformed vertex at line " + std::to_string(line_no));
      mesh.vertices.push_back(p);
    } else if (tag == "f") {
      std::vector<std::string> tokens;
      for (std::string t; line >> t;) tokens.push_back(t);
      if (tokens.size() != 3)
        throw IoError("non-triangular face at line " + std::to_string(line_no));
      Face f;
      for (int k = 0; k < 3; ++k)
        f[k] = parse_obj_index(tokens[k], mesh.num_vertices(), line_no);
      mesh.faces.push_back(f);
    }
    // vt, vn, groups and materials carry nothing we need.
  }
  return mesh;
}

enum class PlyEncoding { kAscii, kBinaryLittleEndian };

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  long count = 0;
  std::vector<PlyProperty> properties;
};

int ply_type_size(const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "int32" || type == "uint32" ||
      type == "float" || type == "float32")
    return 4;
  if (type == "double" || type == "float64") return 8;
  throw IoError("unknown PLY property type '" + type + "'");
}

template <typename T>
T read_raw(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("unexpected end of binary PLY data");
  return value;
}

// Assumes a little-endian host, which is what binary_little_endian needs.
double read_binary_scalar(std::istream& in, const std::string& type) {
  if (type == "char" || type == "int8") return read_raw<std::int8_t>(in);
  if (type == "uchar" || type == "uint8") return read_raw<std::uint8_t>(in);
  if (type == "short" || type == "int16") return read_raw<std::int16_t>(in);
  if (type == "ushort" || type == "uint16") return read_raw<std::uint16_t>(in);
  if (type == "int" || type == "int32") return read_raw<std::int32_t>(in);
  if (type == "uint" || type == "uint32") return read_raw<std::uint32_t>(in);
  if (type == "float" || type == "float32") return read_raw<float>(in);
  if (type == "double" || type == "float64") return read_raw<double>(in);
  throw IoError("unknown PLY property type '" + type + "'");
}

TriangleMesh read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  std::string text;
  std::getline(in, text);
  if (text.rfind("ply", 0) != 0) throw IoError(path.string() + " is not a PLY file");

  PlyEncoding encoding = PlyEncoding::kAscii;
  std::vector<PlyElement> elements;
  bool header_done = false;
  while (std::getline(in, text)) {
    if (!text.empty() && text.back() == '\r') text.pop_back();
    std::istringstream line(text);
    std::string tag;
    line >> tag;
    if (tag == "format") {
      std::string kind;
      line >> kind;
      if (kind == "ascii") {
        encoding = PlyEncoding::kAscii;
      } else if (kind == "binary_little_endian") {
        encoding = PlyEncoding::kBinaryLittleEndian;
      } else {
        throw IoError("unsupported PLY format '" + kind + "'");
      }
    } else if (tag == "element") {
      PlyElement e;
      line >> e.name >> e.count;
      elements.push_back(e);
    } else if (tag == "property") {
      if (elements.empty()) throw IoError("PLY property before any element");
      PlyProperty p;
      std::string type;
      line >> type;
      if (type == "list") {
        p.is_list = true;
        line >> p.count_type >> p.type >> p.name;
        ply_type_size(p.count_type);
      } else {
        p.type = type;
        line >> p.name;
      }
      ply_type_size(p.type);
      elements.back().properties.push_back(p);
    } else if (tag == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw IoError("PLY header not terminated");

  TriangleMesh mesh;
  for (const PlyElement& element : elements) {
    const bool is_vertex = element.name == "vertex";
    const bool is_face = element.name == "face";
    int ix = -1, iy = -1, iz = -1, ilist = -1;
    for (int k = 0; k < static_cast<int>(element.properties.size()); ++k) {
      const auto& name = element.properties[k].name;
      if (name == "x") ix = k;
      if (name == "y") iy = k;
      if (name == "z") iz = k;
      if (element.properties[k].is_list && (name == "vertex_indices" || name == "vertex_index"))
        ilist = k;
    }
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0))
      throw IoError("PLY vertex element lacks x/y/z");
    if (is_face && ilist < 0) throw IoError("PLY face element lacks vertex_indices");

    for (long row = 0; row < element.count; ++row) {
      std::istringstream ascii_line;
      if (encoding == PlyEncoding::kAscii) {
        if (!std::getline(in, text)) throw IoError("unexpected end of PLY data");
        ascii_line.str(text);
      }
      auto next_scalar = [&](const std::string& type) -> double {
        if (encoding == PlyEncoding::kBinaryLittleEndian) return read_binary_scalar(in, type);
        double value;
        if (!(ascii_line >> value)) throw IoError("malformed PLY data row");
        return value;
      };

      Vec3 p = Vec3::Zero();
      Face f{};
      for (int k = 0; k < static_cast<int>(element.properties.size()); ++k) {
        const PlyProperty& prop = element.properties[k];
        if (prop.is_list) {
          const long n = static_cast<long>(next_scalar(prop.count_type));
          if (k == ilist && is_face && n != 3)
            throw IoError("non-triangular face at face " + std::to_string(row));
          for (long j = 0; j < n; ++j) {
            const double value = next_scalar(prop.type);
            if (k == ilist && is_face) f[j] = static_cast<int>(value);
          }
        } else {
          const double value = next_scalar(prop.type);
          if (k == ix) p.x() = value;
          if (k == iy) p.y() = value;
          if (k == iz) p.z() = value;
        }
      }
      if (is_vertex) mesh.vertices.push_back(p);
      if (is_face) mesh.faces.push_back(f);
    }
  }
  return mesh;
}

void write_obj(const TriangleMesh& mesh, const std::filesystem::path& path,
               std::span<const Vec2> uv) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const Vec3& p : mesh.vertices)
    out << "v " << fmt17(p.x()) << ' ' << fmt17(p.y()) << ' ' << fmt17(p.z()) << '\n';
  for (const Vec2& t : uv) out << "vt " << fmt17(t.x()) << ' ' << fmt17(t.y()) << '\n';
  for (const Face& f : mesh.faces) {
    out << 'f';
    for (int k = 0; k < 3; ++k) {
      out << ' ' << f[k] + 1;
      if (!uv.empty()) out << '/' << f[k] + 1;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_ply(const TriangleMesh& mesh, const std::filesystem::path& path,
               std::span<const Vec2> uv) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << mesh.num_vertices() << '\n'
      << "property double x\nproperty double y\nproperty double z\n";
  if (!uv.empty()) out << "property double u\nproperty double v\n";
  out << "element face " << mesh.num_faces() << '\n'
      << "property list uchar int vertex_indices\nend_header\n";
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    const Vec3& p = mesh.vertices[i];
    out << fmt17(p.x()) << ' ' << fmt17(p.y()) << ' ' << fmt17(p.z());
    if (!uv.empty()) out << ' ' << fmt17(uv[i].x()) << ' ' << fmt17(uv[i].y());
    out << '\n';
  }
  for (const Face& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

MeshFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".obj") return MeshFormat::kObj;
  if (ext == ".ply") return MeshFormat::kPly;
  throw IoError("unrecognized mesh extension '" + ext + "'");
}

TriangleMesh load_mesh(const std::filesystem::path& path, std::optional<MeshFormat> format) {
  const MeshFormat fmt = format.value_or(format_from_path(path));
  TriangleMesh mesh = fmt == MeshFormat::kObj ? read_obj(path) : read_ply(path);
  validate_indices(mesh);
  validate_edge_manifold(mesh);
  validate_nondegenerate(mesh);
  return mesh;
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format,
               std::span<const Vec2> uv) {
  if (!uv.empty() && static_cast<int>(uv.size()) != mesh.num_vertices())
    throw InvalidArgument("uv count " + std::to_string(uv.size()) + " != vertex count " +
                          std::to_string(mesh.num_vertices()));
  if (format == MeshFormat::kObj) {
    write_obj(mesh, path, uv);
  } else {
    write_ply(mesh, path, uv);
  }
}

}  // namespace tdem
