#ifndef FCFV_SPARSE_HPP
#define FCFV_SPARSE_HPP

#include <string>
#include <vector>

namespace fcfv {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed-row matrix with the right-hand side attached; built once
/// from a triplet stream, pattern immutable afterwards.
struct SparseSystem {
  int n = 0;
  std::vector<int> row_offsets;  // n+1
  std::vector<int> col_indices;  // sorted within each row
  std::vector<double> values;
  std::vector<double> rhs;

  bool same_pattern(const SparseSystem& other) const {
    return n == other.n && row_offsets == other.row_offsets && col_indices == other.col_indices;
  }
};

enum class SolveMethod { Direct, CG, MinRes, BiCGStab };

// Duplicate (i,j) contributions are summed; the merged layout is
// deterministic for a deterministic triplet order.
SparseSystem assemble(const std::vector<Triplet>& triplets, int n);

// Relative residual ||Ax-b||/||b|| <= tol on exit (direct: sparse LU).
// CG negates the system first; the assembled Poisson matrix is negative
// definite as written.
std::vector<double> solve(const SparseSystem& system, SolveMethod method, double tol = 1e-10);

SolveMethod parse_solve_method(const std::string& name);

// Matrix Market coordinate dump for external verification.
void write_matrix_market(const SparseSystem& system, const std::string& path);

}  // namespace fcfv

#endif
