#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "tdem/mesh.hpp"

namespace tdem::test {

inline std::filesystem::path scratch_dir() {
  const std::filesystem::path dir(TDEM_TEST_TMP);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_text(const std::string& name, const std::string& text) {
  const auto path = scratch_dir() / name;
  std::ofstream(path) << text;
  return path;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::filesystem::path data_mesh(const std::string& name) {
  return std::filesystem::path(TDEM_DATA_DIR) / name;
}

inline TriangleMesh tetrahedron() {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  m.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  return m;
}

}  // namespace tdem::test
