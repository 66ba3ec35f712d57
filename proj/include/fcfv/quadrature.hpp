#ifndef FCFV_QUADRATURE_HPP
#define FCFV_QUADRATURE_HPP

#include <functional>
#include <vector>

#include "fcfv/mesh.hpp"

namespace fcfv {

/// Quadrature point in barycentric coordinates with weight normalised so
/// the weights sum to 1 (multiply by the simplex measure to integrate).
struct QuadPoint {
  std::array<double, 4> bary{};
  double weight = 0.0;
};

// Simplex rules used across the code base.
const std::vector<QuadPoint>& edge_gauss3();        // degree 5
const std::vector<QuadPoint>& tri_midpoint3();      // degree 2
const std::vector<QuadPoint>& tri_4pt();            // degree 3
const std::vector<QuadPoint>& tri_dunavant6();      // degree 4
const std::vector<QuadPoint>& tet_4pt();            // degree 2
const std::vector<QuadPoint>& tet_keast11();        // degree 4

// Integrates fn over the simplex spanned by `verts` (n of them) with the
// given rule; `measure` is the simplex length/area/volume.
double integrate_simplex(const std::vector<QuadPoint>& rule, const Vec3* verts, int n,
                         double measure, const std::function<double(const Vec3&)>& fn);

// Average of fn over face f of the mesh (3-point Gauss on edges, 4-point
// rule on triangular facets).
double face_average(const SimplicialMesh& mesh, int f, const std::function<double(const Vec3&)>& fn);

}  // namespace fcfv

#endif
