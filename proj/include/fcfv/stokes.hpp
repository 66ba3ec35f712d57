#ifndef FCFV_STOKES_HPP
#define FCFV_STOKES_HPP

#include <functional>
#include <string>
#include <vector>

#include "fcfv/mesh.hpp"
#include "fcfv/parallel.hpp"
#include "fcfv/small_dense.hpp"
#include "fcfv/sparse.hpp"

namespace fcfv {

using Vec3Field = std::function<Vec3(const Vec3&)>;
using Mat3 = std::array<std::array<double, 3>, 3>;  // [a][b] = d u_b / d x_a style
using Mat3Field = std::function<Mat3(const Vec3&)>;

struct StokesProblem {
  const SimplicialMesh* mesh = nullptr;
  double viscosity = 1.0;
  Vec3Field body_force;      // s
  Vec3Field dirichlet_data;  // u_D
  Vec3Field pseudo_traction; // t, per the velocity-pressure flux convention
  double tau = 1e2;
};

/// Per-cell data independent of the trace. The vector local matrix is
/// nsd copies of the scalar one, so only the scalar inverse is stored.
struct StokesLocalPrecomp {
  CellGeometry geom;
  CellMatrix m_inv;
  std::array<std::array<double, 4>, 3> b{};    // B_e, component-major
  Mat3 z{};                                    // Z_e[a][b] = sum_D |G_j| n_j[a] u_Dj[b]
  std::array<std::array<double, 4>, 3> mib{};  // m^{-1} b per component
  std::array<double, 4> taus{};
};

struct StokesSolution {
  std::vector<double> trace;                       // nsd values per unknown face, contiguous
  std::vector<double> rho;                         // mean pressure per cell
  std::vector<std::array<std::array<double, 4>, 3>> u;  // nodal velocities, component-major
  std::vector<Mat3> L;                             // scaled-gradient variable per cell
  std::vector<double> p;                           // cellwise constant pressure (= rho)
  std::vector<int> face_unknown;                   // face id -> unknown face index or -1
};

StokesLocalPrecomp local_precompute(const StokesProblem& problem, int e, Variant variant);

// Unknowns: nsd per non-Dirichlet face, then one mean pressure per cell,
// plus one zero-mean-pressure constraint when the boundary is all
// Dirichlet. `n_trace_unknowns` (if non-null) gets nsd * (#B-faces).
SparseSystem assemble_global(const StokesProblem& problem, Variant variant,
                             std::vector<int>* face_unknown = nullptr,
                             int* n_trace_unknowns = nullptr, Exec exec = Exec::Parallel);

struct StokesTimings {
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
  double recovery_seconds = 0.0;
};

StokesSolution solve(const StokesProblem& problem, Variant variant,
                     SolveMethod method = SolveMethod::Direct, double tol = 1e-10,
                     Exec exec = Exec::Parallel, StokesTimings* timings = nullptr);

struct StokesErrors {
  double u = 0.0;
  double L = 0.0;
  double p = 0.0;
  bool absolute = false;
};

// exact_grad[a][b] = d u_b / d x_a; the mixed variable satisfies
// L = -sqrt(nu) grad u.
StokesErrors l2_errors(const SimplicialMesh& mesh, double viscosity,
                       const StokesSolution& solution, const Vec3Field& exact_u,
                       const Mat3Field& exact_grad, const std::function<double(const Vec3&)>& exact_p);

// Max over cells of |sum_B |G|u_hat.n + sum_D |G|u_D.n| (discrete
// incompressibility residual).
double max_incompressibility_residual(const StokesProblem& problem, const StokesSolution& solution);

void write_solution_csv(const SimplicialMesh& mesh, const StokesSolution& solution,
                        const std::string& path);

}  // namespace fcfv

#endif
