#ifndef FCFV_POISSON_HPP
#define FCFV_POISSON_HPP

#include <functional>
#include <string>
#include <vector>

#include "fcfv/mesh.hpp"
#include "fcfv/parallel.hpp"
#include "fcfv/small_dense.hpp"
#include "fcfv/sparse.hpp"

namespace fcfv {

using ScalarField = std::function<double(const Vec3&)>;
using VectorField = std::function<Vec3(const Vec3&)>;

struct PoissonProblem {
  const SimplicialMesh* mesh = nullptr;
  ScalarField source;          // s
  ScalarField dirichlet_data;  // u_D
  ScalarField neumann_data;    // t = n . grad u
  double tau = 1e2;            // per-face stabilisation (constant)
};

/// Everything of the local problem that does not involve the trace:
/// m_e^{-1}, b_e, z_e plus the geometric data reused by assembly and
/// recovery.
struct PoissonLocalPrecomp {
  CellGeometry geom;
  CellMatrix m_inv;
  std::array<double, 4> b{};   // b_e = f_e + sum_D tau_j d_j
  Vec3 z{};                    // z_e = sum_D |G_j| n_j u_Dj
  std::array<double, 4> mib{}; // m_e^{-1} b_e
  std::array<double, 4> taus{};
};

struct PoissonSolution {
  std::vector<double> trace;                  // per unknown face (B-face), by unknown index
  std::vector<std::array<double, 4>> u;       // nodal values per cell
  std::vector<Vec3> q;                        // constant gradient variable per cell
  std::vector<int> face_unknown;              // global face id -> unknown index or -1
  Variant variant = Variant::SecondOrder;

  double trace_on_face(int f) const { return face_unknown[f] >= 0 ? trace[face_unknown[f]] : 0.0; }
};

// Boundary datum represented by its face average (Gauss quadrature).
double face_data(const PoissonProblem& problem, int face);

PoissonLocalPrecomp local_precompute(const PoissonProblem& problem, int e, Variant variant);

// One scalar unknown per non-Dirichlet face. `face_unknown` (if non-null)
// receives the face -> unknown map. All-Dirichlet meshes give n = 0.
SparseSystem assemble_global(const PoissonProblem& problem, Variant variant,
                             std::vector<int>* face_unknown = nullptr, Exec exec = Exec::Parallel);

// Exposed for the adaptivity reuse property: the raw per-cell triplet
// stream feeding assemble_global.
void global_triplets(const PoissonProblem& problem, Variant variant,
                     const std::vector<int>& face_unknown, std::vector<Triplet>& triplets,
                     std::vector<double>& rhs, Exec exec);

struct PoissonTimings {
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
  double recovery_seconds = 0.0;
};

PoissonSolution solve(const PoissonProblem& problem, Variant variant,
                      SolveMethod method = SolveMethod::Direct, double tol = 1e-10,
                      Exec exec = Exec::Parallel, PoissonTimings* timings = nullptr);

struct ErrorPair {
  double u = 0.0;
  double q = 0.0;
  bool absolute = false;  // set when the exact solution has zero norm
};

// Relative L2 errors with a degree-4 cell rule; exact_grad is grad u
// (the mixed variable satisfies q = -grad u).
ErrorPair l2_errors(const SimplicialMesh& mesh, const PoissonSolution& solution,
                    const ScalarField& exact_u, const VectorField& exact_grad);

// Solution dump: one CSV row per cell, then one per face.
void write_solution_csv(const SimplicialMesh& mesh, const PoissonSolution& solution,
                        const std::string& path);

}  // namespace fcfv

#endif
