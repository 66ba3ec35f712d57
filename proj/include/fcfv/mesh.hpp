#ifndef FCFV_MESH_HPP
#define FCFV_MESH_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fcfv {

using Vec3 = std::array<double, 3>;

enum class FaceTag : std::uint8_t { Interior, Dirichlet, Neumann };

struct Box {
  Vec3 lo{0.0, 0.0, 0.0};
  Vec3 hi{1.0, 1.0, 1.0};
};

/// Simplicial mesh (triangles in 2D, tetrahedra in 3D) with globally
/// numbered faces. Local face j of a cell is the face opposite local
/// vertex j. Meshes are immutable after construction; every operation
/// below returns a new mesh.
struct SimplicialMesh {
  int dim = 2;
  std::vector<Vec3> vertices;                    // z == 0 in 2D
  std::vector<std::array<int, 4>> cells;         // last entry -1 in 2D
  std::vector<std::array<int, 3>> faces;         // sorted vertex ids, last -1 in 2D
  std::vector<std::array<int, 4>> cell_faces;    // global face id per local face
  std::vector<std::array<int, 2>> face_cells;    // adjacent cells, -1 if none
  std::vector<FaceTag> face_tags;                // per global face

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_faces() const { return static_cast<int>(faces.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int nodes_per_cell() const { return dim + 1; }
  int nodes_per_face() const { return dim; }
  bool is_boundary_face(int f) const { return face_cells[f][1] < 0; }
  int n_boundary_faces() const;
};

struct CellGeometry {
  double volume = 0.0;                  // |Omega_e|
  std::array<double, 4> face_areas{};   // |Gamma_{e,j}|
  std::array<Vec3, 4> normals{};        // outward unit normals
  double h = 0.0;                       // longest edge
  Vec3 centroid{};
};

// Predicate selecting the Neumann part of the boundary; evaluated at the
// face centroid. Null predicate means all-Dirichlet.
using NeumannPredicate = std::function<bool(const Vec3&)>;

SimplicialMesh generate_structured(int dim, int n_per_side, const Box& box = {});

// Structured mesh with per-axis vertex coordinates (used by the stretched
// generator; coords[d] must be strictly increasing).
SimplicialMesh generate_tensor(int dim, const std::vector<std::vector<double>>& coords);

// Fills faces / cell_faces / face_cells / face_tags from `cells`.
// Face numbering is lexicographic by sorted vertex tuple so sparsity
// patterns are reproducible. Throws on non-manifold input.
void build_connectivity(SimplicialMesh& mesh);

CellGeometry cell_geometry(const SimplicialMesh& mesh, int e);

// Returns a copy with boundary faces whose centroid satisfies the
// predicate tagged Neumann, the rest Dirichlet.
SimplicialMesh with_boundary_tags(const SimplicialMesh& mesh, const NeumannPredicate& neumann);

// Randomly displaces interior vertices by at most
// magnitude_fraction * (shortest incident edge). Connectivity unchanged.
SimplicialMesh distort(const SimplicialMesh& mesh, double magnitude_fraction, std::uint64_t seed);

// Structured mesh graded toward the last-axis lower boundary so the
// max-over-cells longest/shortest edge ratio is ~s.
SimplicialMesh generate_stretched(int dim, int n_per_side, double s, const Box& box = {});

double stretching_factor(const SimplicialMesh& mesh);
double max_cell_size(const SimplicialMesh& mesh);

// Conforming longest-edge bisection of base_mesh until every cell
// satisfies h_e <= size_at_point(centroid), up to `max_depth` bisection
// generations per cell.
SimplicialMesh refine_by_sizemap(const SimplicialMesh& base_mesh,
                                 const std::function<double(const Vec3&)>& size_at_point,
                                 int max_depth = 12);

SimplicialMesh read_mesh(const std::string& path);
void write_mesh(const SimplicialMesh& mesh, const std::string& path);

}  // namespace fcfv

#endif
