#include "fcfv/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

namespace fcfv {

SparseSystem assemble(const std::vector<Triplet>& triplets, int n) {
  for (const auto& t : triplets)
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      throw std::runtime_error("triplet index (" + std::to_string(t.row) + "," +
                               std::to_string(t.col) + ") out of range for n=" + std::to_string(n));

  std::vector<std::size_t> order(triplets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return triplets[a].row != triplets[b].row ? triplets[a].row < triplets[b].row
                                              : triplets[a].col < triplets[b].col;
  });

  SparseSystem sys;
  sys.n = n;
  sys.row_offsets.assign(n + 1, 0);
  sys.rhs.assign(n, 0.0);
  int prev_row = -1, prev_col = -1;
  for (std::size_t k : order) {
    const auto& t = triplets[k];
    if (t.row == prev_row && t.col == prev_col) {
      sys.values.back() += t.value;
    } else {
      sys.col_indices.push_back(t.col);
      sys.values.push_back(t.value);
      ++sys.row_offsets[t.row + 1];
      prev_row = t.row;
      prev_col = t.col;
    }
  }
  for (int i = 0; i < n; ++i) sys.row_offsets[i + 1] += sys.row_offsets[i];
  return sys;
}

namespace {

Eigen::SparseMatrix<double> to_eigen(const SparseSystem& s) {
  Eigen::SparseMatrix<double> A(s.n, s.n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(s.values.size());
  for (int i = 0; i < s.n; ++i)
    for (int k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k)
      trip.emplace_back(i, s.col_indices[k], s.values[k]);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

void check_residual(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& b, double tol) {
  double bn = b.norm();
  if (bn == 0.0) return;
  double rel = (A * x - b).norm() / bn;
  if (!(rel <= 10.0 * tol) || !std::isfinite(rel))
    throw std::runtime_error("solver failed to reach tolerance, relative residual = " +
                             std::to_string(rel));
}

}  // namespace

std::vector<double> solve(const SparseSystem& system, SolveMethod method, double tol) {
  if (system.n == 0) return {};
  Eigen::SparseMatrix<double> A = to_eigen(system);
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(system.rhs.data(), system.n);
  Eigen::VectorXd x;

  switch (method) {
    case SolveMethod::Direct: {
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
      lu.compute(A);
      if (lu.info() != Eigen::Success) throw std::runtime_error("sparse LU factorisation failed");
      x = lu.solve(b);
      break;
    }
    case SolveMethod::CG: {
      // The condensed FCFV systems are negative definite; flip the sign in
      // that case so CG sees an SPD matrix. The solver keeps a reference,
      // so the (possibly negated) matrix must outlive it.
      const double sign = A.coeff(0, 0) < 0.0 ? -1.0 : 1.0;
      const Eigen::SparseMatrix<double> As = sign * A;
      const Eigen::VectorXd bs = sign * b;
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
      cg.setTolerance(tol);
      cg.setMaxIterations(10 * system.n);
      cg.compute(As);
      x = cg.solve(bs);
      if (cg.info() != Eigen::Success)
        throw std::runtime_error("CG did not converge within 10n iterations");
      break;
    }
    case SolveMethod::MinRes: {
      Eigen::MINRES<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> mr;
      mr.setTolerance(tol);
      mr.setMaxIterations(10 * system.n);
      mr.compute(A);
      x = mr.solve(b);
      if (mr.info() != Eigen::Success)
        throw std::runtime_error("MINRES did not converge within 10n iterations");
      break;
    }
    case SolveMethod::BiCGStab: {
      Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> bi;
      bi.setTolerance(tol);
      bi.setMaxIterations(10 * system.n);
      bi.compute(A);
      x = bi.solve(b);
      if (bi.info() != Eigen::Success)
        throw std::runtime_error("BiCGStab did not converge within 10n iterations");
      break;
    }
  }
  check_residual(A, x, b, method == SolveMethod::Direct ? 1e-8 : tol);
  return std::vector<double>(x.data(), x.data() + system.n);
}

SolveMethod parse_solve_method(const std::string& name) {
  if (name == "direct") return SolveMethod::Direct;
  if (name == "cg") return SolveMethod::CG;
  if (name == "minres") return SolveMethod::MinRes;
  if (name == "bicgstab") return SolveMethod::BiCGStab;
  throw std::invalid_argument("unknown solver '" + name + "'");
}

void write_matrix_market(const SparseSystem& system, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << system.n << ' ' << system.n << ' ' << system.values.size() << '\n';
  out << std::setprecision(17);
  for (int i = 0; i < system.n; ++i)
    for (int k = system.row_offsets[i]; k < system.row_offsets[i + 1]; ++k)
      out << i + 1 << ' ' << system.col_indices[k] + 1 << ' ' << system.values[k] << '\n';
}

}  // namespace fcfv
