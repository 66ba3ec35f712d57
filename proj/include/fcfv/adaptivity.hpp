#ifndef FCFV_ADAPTIVITY_HPP
#define FCFV_ADAPTIVITY_HPP

#include <string>
#include <vector>

#include "fcfv/mesh.hpp"
#include "fcfv/poisson.hpp"
#include "fcfv/problems.hpp"
#include "fcfv/stokes.hpp"

namespace fcfv {

/// Cellwise projection-difference indicator
/// E_e = [ |Omega_e|^{-1} int (u_tilde - u)^2 ]^{1/2}
/// between the first-order (no projection) and second-order solutions.
struct IndicatorField {
  std::vector<double> E;       // per cell
  std::vector<double> h;       // per cell, longest edge
  std::vector<double> h_star;  // filled by target_sizes
  double max_E = 0.0;
};

enum class ExponentMode { Aggressive, Richardson };

IndicatorField indicator(const SimplicialMesh& mesh, const PoissonSolution& second,
                         const PoissonSolution& first);
IndicatorField indicator(const SimplicialMesh& mesh, const StokesSolution& second,
                         const StokesSolution& first);

// h* = h (eps/E)^a with a = 2 + nsd/2 (aggressive) or 1/(1 + nsd/2)
// (richardson); clamped to [h/4, 2h] per iteration, E = 0 cells get 2h.
void target_sizes(IndicatorField& field, int dim, double epsilon, ExponentMode mode);

struct AdaptIteration {
  int n_cells = 0;
  double max_indicator = 0.0;
  double max_exact = 0.0;    // max cellwise exact error (NaN if unknown)
  double efficiency = 0.0;   // max_exact / max_indicator
  double global_rel_error = 0.0;
};

struct AdaptResult {
  SimplicialMesh mesh;
  PoissonSolution solution;  // second-order solution on the final mesh
  std::vector<AdaptIteration> history;
  bool converged = false;
};

// Outer loop: solve both variants, indicate, stop at max E <= epsilon,
// size, refine the base mesh by bisection, repeat. tau <= 0 keeps the
// problem default.
AdaptResult adapt_loop(const ProblemSpec& spec, const SimplicialMesh& base_mesh, double epsilon,
                       int max_iters, ExponentMode mode = ExponentMode::Aggressive,
                       SolveMethod method = SolveMethod::Direct, double tau = 0.0);

void write_history_csv(const std::vector<AdaptIteration>& history, const std::string& path);

}  // namespace fcfv

#endif
