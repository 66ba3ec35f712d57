#include "fcfv/small_dense.hpp"

#include <cmath>
#include <stdexcept>

namespace fcfv {

ProjectionVector projection_vector(int n_cell_nodes, int local_face) {
  if (local_face < 0 || local_face >= n_cell_nodes)
    throw std::invalid_argument("invalid local face index");
  ProjectionVector pv;
  pv.n = n_cell_nodes;
  const double w = 1.0 / (n_cell_nodes - 1);  // n_fn = dim = n-1
  for (int l = 0; l < n_cell_nodes; ++l) pv.p[l] = (l == local_face) ? 0.0 : w;
  return pv;
}

CellMatrix build_me(const CellGeometry& geom, int n_cell_nodes,
                    const std::array<double, 4>& taus, Variant variant) {
  const int n = n_cell_nodes;
  const int nfn = n - 1;
  CellMatrix m;
  m.n = n;
  for (int k = 0; k < n; ++k) {
    if (!(taus[k] > 0.0)) throw std::invalid_argument("stabilisation tau must be positive");
    const double area = geom.face_areas[k];
    if (variant == Variant::SecondOrder) {
      const double c = area * taus[k] / (nfn * nfn);
      for (int i = 0; i < n; ++i) {
        if (i == k) continue;
        for (int j = 0; j < n; ++j)
          if (j != k) m(i, j) += c;
      }
    } else {
      // Exact face mass matrix of linear shape functions restricted to
      // face k: edge (|G|/6)[2 1;1 2], triangle (|G|/12)(I+ones).
      const double diag = nfn == 2 ? area / 3.0 : area / 6.0;
      const double off = nfn == 2 ? area / 6.0 : area / 12.0;
      for (int i = 0; i < n; ++i) {
        if (i == k) continue;
        for (int j = 0; j < n; ++j)
          if (j != k) m(i, j) += taus[k] * (i == j ? diag : off);
      }
    }
  }
  return m;
}

namespace {

double det3(const CellMatrix& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

// 3x3 minor of a 4x4 matrix with row r and column c removed.
double minor4(const CellMatrix& m, int r, int c) {
  double sub[3][3];
  int ii = 0;
  for (int i = 0; i < 4; ++i) {
    if (i == r) continue;
    int jj = 0;
    for (int j = 0; j < 4; ++j) {
      if (j == c) continue;
      sub[ii][jj++] = m(i, j);
    }
    ++ii;
  }
  return sub[0][0] * (sub[1][1] * sub[2][2] - sub[1][2] * sub[2][1]) -
         sub[0][1] * (sub[1][0] * sub[2][2] - sub[1][2] * sub[2][0]) +
         sub[0][2] * (sub[1][0] * sub[2][1] - sub[1][1] * sub[2][0]);
}

}  // namespace

CellMatrix invert_cellmatrix(const CellMatrix& m) {
  CellMatrix inv;
  inv.n = m.n;
  double scale = 0.0;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) scale = std::max(scale, std::abs(m(i, j)));
  double scale_n = 1.0;
  for (int i = 0; i < m.n; ++i) scale_n *= scale;

  if (m.n == 3) {
    const double d = det3(m);
    if (std::abs(d) <= 1e-14 * scale_n)
      throw std::runtime_error("near-singular cell matrix, |det|/scale = " +
                               std::to_string(std::abs(d) / scale_n));
    inv(0, 0) = (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) / d;
    inv(0, 1) = (m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2)) / d;
    inv(0, 2) = (m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1)) / d;
    inv(1, 0) = (m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2)) / d;
    inv(1, 1) = (m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0)) / d;
    inv(1, 2) = (m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2)) / d;
    inv(2, 0) = (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0)) / d;
    inv(2, 1) = (m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1)) / d;
    inv(2, 2) = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)) / d;
    return inv;
  }
  if (m.n != 4) throw std::invalid_argument("only 3x3 and 4x4 supported");

  double cof[4][4];
  double det = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) cof[i][j] = ((i + j) % 2 ? -1.0 : 1.0) * minor4(m, i, j);
  for (int j = 0; j < 4; ++j) det += m(0, j) * cof[0][j];
  if (std::abs(det) <= 1e-14 * scale_n)
    throw std::runtime_error("near-singular cell matrix, |det|/scale = " +
                             std::to_string(std::abs(det) / scale_n));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) inv(i, j) = cof[j][i] / det;  // adjugate transpose
  return inv;
}

void matvec(const CellMatrix& m, const double* x, double* y) {
  for (int i = 0; i < m.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.n; ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
}

}  // namespace fcfv
