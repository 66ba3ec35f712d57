#ifndef FCFV_STUDY_HPP
#define FCFV_STUDY_HPP

#include <map>
#include <string>
#include <vector>

#include "fcfv/adaptivity.hpp"
#include "fcfv/mesh.hpp"
#include "fcfv/problems.hpp"
#include "fcfv/sparse.hpp"

namespace fcfv {

enum class MeshFamily { Regular, Distorted, Stretched };

struct StudyConfig {
  std::string problem = "poisson-sine-2d";
  Variant variant = Variant::SecondOrder;
  std::vector<int> levels = {8, 16, 32, 64};   // n_per_side per level
  std::vector<double> tau_grid = {1e-1, 1e0, 1e1, 1e2, 1e3, 1e4};
  double tau = 1e2;                            // <= 0 means problem default
  SolveMethod solver = SolveMethod::Direct;
  double solver_tol = 1e-10;
  MeshFamily family = MeshFamily::Regular;
  double distortion = 0.3;
  std::uint64_t seed = 42;
  double stretch = 10.0;
  double epsilon = 1e-2;
  int max_iters = 12;
  ExponentMode exponent_mode = ExponentMode::Aggressive;
  std::string out_dir;
};

// Flat INI-style key=value file with [section] headers; sections become
// "section.key" entries. CLI flags override file values.
std::map<std::string, std::string> read_config_file(const std::string& path);
void apply_config(StudyConfig& config, const std::map<std::string, std::string>& kv);

struct LevelRecord {
  double h = 0.0;
  int n_cells = 0;
  int n_unknowns = 0;
  std::vector<double> errors;  // per tracked variable
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;
  double recovery_seconds = 0.0;
};

struct ConvergenceRecord {
  std::vector<std::string> variables;  // "u","q" or "u","L","p"
  std::vector<LevelRecord> levels;
  std::vector<double> rates;           // least-squares slope per variable
  std::vector<double> last_pair_rates;
};

SimplicialMesh make_study_mesh(const StudyConfig& config, const ProblemSpec& spec, int n);

ConvergenceRecord run_convergence(const StudyConfig& config);

struct TauRecord {
  double tau = 0.0;
  std::vector<double> errors;
};

struct TauSweep {
  std::vector<std::string> variables;
  std::vector<TauRecord> records;
  double plateau_tau = 0.0;  // smallest grid tau within 15% of the minimal u-error
};

TauSweep run_tau_sweep(const StudyConfig& config, int level);

struct RobustnessResult {
  ConvergenceRecord regular;
  ConvergenceRecord perturbed;  // distorted or stretched family
  std::vector<double> rate_deltas;
};

RobustnessResult run_robustness(const StudyConfig& config);

AdaptResult run_adaptivity(const StudyConfig& config, int base_n);

// Least-squares slope of log(err) vs log(h); needs >= 3 levels.
double fit_rate(const std::vector<double>& hs, const std::vector<double>& errors);

void write_convergence_csv(const ConvergenceRecord& record, const std::string& path);

// Per-variable (log10 h, log10 err) rows plus the fitted line; optional
// companion SVG log-log chart.
void emit_plotdata(const ConvergenceRecord& record, const std::string& csv_path,
                   const std::string& svg_path = "");

}  // namespace fcfv

#endif
