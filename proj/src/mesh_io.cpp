#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fcfv/mesh.hpp"

namespace fcfv {

// Plain-text format:
//   fcfv-mesh <dim> <n_vertices> <n_cells> <n_boundary_faces>
//   <dim floats per vertex line>
//   <dim+1 zero-based indices per cell line>
//   <dim indices + dirichlet|neumann per boundary-face line>
void write_mesh(const SimplicialMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << std::setprecision(17);
  out << "fcfv-mesh " << mesh.dim << ' ' << mesh.n_vertices() << ' ' << mesh.n_cells() << ' '
      << mesh.n_boundary_faces() << '\n';
  for (const auto& v : mesh.vertices) {
    for (int d = 0; d < mesh.dim; ++d) out << (d ? " " : "") << v[d];
    out << '\n';
  }
  for (const auto& c : mesh.cells) {
    for (int l = 0; l <= mesh.dim; ++l) out << (l ? " " : "") << c[l];
    out << '\n';
  }
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (!mesh.is_boundary_face(f)) continue;
    for (int l = 0; l < mesh.dim; ++l) out << mesh.faces[f][l] << ' ';
    out << (mesh.face_tags[f] == FaceTag::Neumann ? "neumann" : "dirichlet") << '\n';
  }
}

SimplicialMesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  auto fail = [&](int line, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
  };

  int line = 1;
  std::string magic;
  int dim = 0, nv = 0, nc = 0, nb = 0;
  if (!(in >> magic >> dim >> nv >> nc >> nb) || magic != "fcfv-mesh")
    fail(1, "malformed header (expected 'fcfv-mesh <dim> <nv> <nc> <nb>')");
  if (dim != 2 && dim != 3) fail(1, "dim must be 2 or 3");
  if (nv < dim + 1 || nc < 1 || nb < 0) fail(1, "malformed counts");

  SimplicialMesh mesh;
  mesh.dim = dim;
  for (int i = 0; i < nv; ++i) {
    ++line;
    Vec3 v{0, 0, 0};
    for (int d = 0; d < dim; ++d)
      if (!(in >> v[d])) fail(line, "malformed vertex line");
    mesh.vertices.push_back(v);
  }
  for (int i = 0; i < nc; ++i) {
    ++line;
    std::array<int, 4> c{-1, -1, -1, -1};
    for (int l = 0; l <= dim; ++l) {
      if (!(in >> c[l])) fail(line, "malformed cell line");
      if (c[l] < 0 || c[l] >= nv)
        fail(line, "vertex index " + std::to_string(c[l]) + " out of range");
    }
    mesh.cells.push_back(c);
  }

  build_connectivity(mesh);

  std::map<std::array<int, 3>, int> face_ids;
  for (int f = 0; f < mesh.n_faces(); ++f) face_ids[mesh.faces[f]] = f;

  for (int i = 0; i < nb; ++i) {
    ++line;
    std::array<int, 3> key{-1, -1, -1};
    std::string tag;
    for (int l = 0; l < dim; ++l) {
      if (!(in >> key[l])) fail(line, "malformed boundary-face line");
      if (key[l] < 0 || key[l] >= nv)
        fail(line, "vertex index " + std::to_string(key[l]) + " out of range");
    }
    if (!(in >> tag)) fail(line, "missing boundary tag");
    std::sort(key.begin(), key.begin() + dim);
    auto it = face_ids.find(key);
    if (it == face_ids.end()) fail(line, "boundary face not found in mesh");
    if (!mesh.is_boundary_face(it->second)) fail(line, "tagged face is interior");
    if (tag == "dirichlet")
      mesh.face_tags[it->second] = FaceTag::Dirichlet;
    else if (tag == "neumann")
      mesh.face_tags[it->second] = FaceTag::Neumann;
    else
      fail(line, "unknown boundary tag '" + tag + "'");
  }
  return mesh;
}

}  // namespace fcfv
