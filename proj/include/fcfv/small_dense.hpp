#ifndef FCFV_SMALL_DENSE_HPP
#define FCFV_SMALL_DENSE_HPP

#include <array>

#include "fcfv/mesh.hpp"

namespace fcfv {

/// Which numerical flux is used: the second-order scheme projects the
/// cell solution onto face-wise constants, the first-order one does not.
enum class Variant { SecondOrder, FirstOrder };

/// Dense n x n matrix with n in {3, 4}; the per-cell solve of the local
/// problem never grows beyond that.
struct CellMatrix {
  int n = 3;
  std::array<double, 16> a{};  // row-major

  double& operator()(int i, int j) { return a[i * n + j]; }
  double operator()(int i, int j) const { return a[i * n + j]; }
};

/// Face-average weights: entry l is 1/n_fn for nodes on the local face,
/// 0 otherwise. Dotting with nodal values gives the face average of a
/// linear field.
struct ProjectionVector {
  int n = 3;
  std::array<double, 4> p{};
};

// n = dim+1 cell nodes, local face i is opposite node i, faces carry
// dim nodes each.
ProjectionVector projection_vector(int n_cell_nodes, int local_face);

// Per-cell boundary mass matrix of the local problem. With projection:
// m_IJ = sum_k |G_k| tau_k chi_k(I) chi_k(J) / n_fn^2. Without: the exact
// linear face mass matrices scaled by tau_k.
CellMatrix build_me(const CellGeometry& geom, int n_cell_nodes,
                    const std::array<double, 4>& taus, Variant variant);

// Closed-form cofactor inverse; throws on a near-singular matrix.
CellMatrix invert_cellmatrix(const CellMatrix& m);

void matvec(const CellMatrix& m, const double* x, double* y);

}  // namespace fcfv

#endif
