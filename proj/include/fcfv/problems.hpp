#ifndef FCFV_PROBLEMS_HPP
#define FCFV_PROBLEMS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fcfv/mesh.hpp"
#include "fcfv/poisson.hpp"
#include "fcfv/stokes.hpp"

namespace fcfv {

enum class Equation { Poisson, Stokes };

/// Manufactured test problem: exact fields with
/// hand-derived derivatives and source. residual_check guards the
/// transcriptions.
struct ProblemSpec {
  std::string name;
  int dim = 2;
  Equation equation = Equation::Poisson;

  // Poisson fields (scalar)
  ScalarField exact_u;
  VectorField exact_grad_u;
  ScalarField exact_laplacian_u;
  ScalarField source;

  // Stokes fields (vector); grad[a][b] = d u_b / d x_a
  Vec3Field exact_velocity;
  Mat3Field exact_velocity_grad;
  Vec3Field exact_velocity_laplacian;
  std::function<double(const Vec3&)> exact_pressure;
  VectorField exact_pressure_grad;
  Vec3Field body_force;

  NeumannPredicate neumann_boundary;  // null => all Dirichlet
  double viscosity = 1.0;
  double tau = 1e2;
  double epsilon = 1e-2;  // default adaptivity tolerance

  PoissonProblem make_poisson(const SimplicialMesh& mesh) const;
  StokesProblem make_stokes(const SimplicialMesh& mesh) const;

  // Tags the box boundary per the problem's layout.
  SimplicialMesh tag_mesh(const SimplicialMesh& mesh) const;
};

const std::vector<ProblemSpec>& catalog();
const ProblemSpec& find_problem(const std::string& name);

// Max PDE residual of the exact fields at n random interior points of the
// unit box. Checks source consistency and, for Stokes, the divergence.
double residual_check(const ProblemSpec& spec, int n_samples, std::uint64_t seed);

}  // namespace fcfv

#endif
