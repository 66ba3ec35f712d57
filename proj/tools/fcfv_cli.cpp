// Command-line front end: single solves, convergence / tau / robustness
// studies, the adaptive loop, and mesh generation.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 solver or
// numerical failure, 3 threshold check failed (--check).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fcfv/adaptivity.hpp"
#include "fcfv/mesh.hpp"
#include "fcfv/poisson.hpp"
#include "fcfv/problems.hpp"
#include "fcfv/sparse.hpp"
#include "fcfv/stokes.hpp"
#include "fcfv/study.hpp"

namespace {

using namespace fcfv;

struct CliOptions {
  std::string config_path;
  std::string problem;
  std::string variant;        // first | second | both
  std::string levels;         // comma-separated n_per_side
  double tau = -1.0;          // <= 0: keep config/problem default
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string solver;
  std::string exponent_mode;
  std::string family;
  double distortion = -1.0;
  double stretch = -1.0;
  double epsilon = -1.0;
  int max_iters = -1;
};

void add_common_flags(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--config", o.config_path, "config file (INI-style key=value)");
  cmd->add_option("--problem", o.problem, "problem name from the built-in catalog");
  cmd->add_option("--variant", o.variant, "first|second|both")
      ->check(CLI::IsMember({"first", "second", "both"}));
  cmd->add_option("--levels", o.levels, "comma-separated mesh levels, e.g. 8,16,32,64");
  cmd->add_option("--tau", o.tau, "stabilisation parameter");
  cmd->add_option("--seed", o.seed, "RNG seed for distorted meshes")
      ->each([&o](const std::string&) { o.seed_set = true; });
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--solver", o.solver, "direct|cg|minres|bicgstab");
  cmd->add_option("--exponent-mode", o.exponent_mode, "aggressive|richardson")
      ->check(CLI::IsMember({"aggressive", "richardson"}));
  cmd->add_option("--family", o.family, "regular|distorted|stretched")
      ->check(CLI::IsMember({"regular", "distorted", "stretched"}));
  cmd->add_option("--distortion", o.distortion, "interior vertex displacement fraction");
  cmd->add_option("--stretch", o.stretch, "target stretching factor");
  cmd->add_option("--epsilon", o.epsilon, "adaptivity tolerance");
  cmd->add_option("--max-iters", o.max_iters, "adaptivity iteration cap");
}

// Config file first, CLI flags on top.
StudyConfig build_config(const CliOptions& o) {
  StudyConfig config;
  if (!o.config_path.empty()) apply_config(config, read_config_file(o.config_path));

  std::map<std::string, std::string> overrides;
  if (!o.problem.empty()) overrides["problem"] = o.problem;
  if (!o.variant.empty() && o.variant != "both") overrides["variant"] = o.variant;
  if (!o.levels.empty()) overrides["levels"] = o.levels;
  if (o.tau > 0.0) overrides["tau"] = std::to_string(o.tau);
  if (o.seed_set) overrides["seed"] = std::to_string(o.seed);
  if (!o.out.empty()) overrides["out"] = o.out;
  if (!o.solver.empty()) overrides["solver"] = o.solver;
  if (!o.exponent_mode.empty()) overrides["exponent_mode"] = o.exponent_mode;
  if (!o.family.empty()) overrides["family"] = o.family;
  if (o.distortion >= 0.0) overrides["distortion"] = std::to_string(o.distortion);
  if (o.stretch > 0.0) overrides["stretch"] = std::to_string(o.stretch);
  if (o.epsilon > 0.0) overrides["epsilon"] = std::to_string(o.epsilon);
  if (o.max_iters > 0) overrides["max_iters"] = std::to_string(o.max_iters);
  apply_config(config, overrides);
  return config;
}

std::string ensure_out_dir(const StudyConfig& config) {
  std::string dir = config.out_dir.empty() ? "." : config.out_dir;
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<Variant> requested_variants(const CliOptions& o, const StudyConfig& config) {
  if (o.variant == "both") return {Variant::SecondOrder, Variant::FirstOrder};
  return {config.variant};
}

const char* variant_name(Variant v) {
  return v == Variant::SecondOrder ? "second" : "first";
}

void print_record(const ConvergenceRecord& record, Variant v) {
  std::printf("variant=%s\n", variant_name(v));
  for (const auto& lv : record.levels) {
    std::printf("  h=%-12.6g cells=%-8d unknowns=%-8d", lv.h, lv.n_cells, lv.n_unknowns);
    for (std::size_t i = 0; i < record.variables.size(); ++i)
      std::printf(" err_%s=%.6e", record.variables[i].c_str(), lv.errors[i]);
    std::printf("  [asm %.3gs solve %.3gs recov %.3gs]\n", lv.assembly_seconds, lv.solve_seconds,
                lv.recovery_seconds);
  }
  for (std::size_t i = 0; i < record.variables.size(); ++i)
    std::printf("  rate_%s=%.4f (last pair %.4f)\n", record.variables[i].c_str(), record.rates[i],
                record.last_pair_rates[i]);
}

int cmd_convergence(const CliOptions& o, double min_u_rate) {
  StudyConfig config = build_config(o);
  std::string dir = ensure_out_dir(config);
  bool ok = true;
  for (Variant v : requested_variants(o, config)) {
    StudyConfig local = config;
    local.variant = v;
    ConvergenceRecord record = run_convergence(local);
    print_record(record, v);
    std::string stem = dir + "/convergence_" + config.problem + "_" + variant_name(v);
    write_convergence_csv(record, stem + ".csv");
    emit_plotdata(record, stem + "_plot.csv", stem + ".svg");
    if (min_u_rate > 0.0 && record.rates[0] < min_u_rate) ok = false;
  }
  return ok ? 0 : 3;
}

int cmd_tau_sweep(const CliOptions& o, int level, bool check) {
  StudyConfig config = build_config(o);
  std::string dir = ensure_out_dir(config);
  bool ok = true;
  for (Variant v : requested_variants(o, config)) {
    StudyConfig local = config;
    local.variant = v;
    TauSweep sweep = run_tau_sweep(local, level);
    std::printf("variant=%s level=%d\n", variant_name(v), level);
    std::string path = dir + "/tau_sweep_" + config.problem + "_" + variant_name(v) + ".csv";
    std::ofstream out(path);
    out << std::setprecision(12) << "tau";
    for (const auto& var : sweep.variables) out << ",err_" << var;
    out << '\n';
    for (const auto& rec : sweep.records) {
      out << rec.tau;
      std::printf("  tau=%-10.4g", rec.tau);
      for (std::size_t i = 0; i < rec.errors.size(); ++i) {
        out << ',' << rec.errors[i];
        std::printf(" err_%s=%.6e", sweep.variables[i].c_str(), rec.errors[i]);
      }
      out << '\n';
      std::printf("\n");
    }
    std::printf("  plateau onset: tau=%g\n", sweep.plateau_tau);
    if (check) {
      double min_u = sweep.records.front().errors[0];
      double at_100 = -1.0;
      for (const auto& rec : sweep.records) {
        min_u = std::min(min_u, rec.errors[0]);
        if (std::abs(rec.tau - 1e2) < 1e-9) at_100 = rec.errors[0];
      }
      if (at_100 < 0.0 || at_100 > 1.15 * min_u) ok = false;
    }
  }
  return ok ? 0 : 3;
}

int cmd_robustness(const CliOptions& o, bool check) {
  StudyConfig config = build_config(o);
  if (o.family.empty()) config.family = MeshFamily::Distorted;
  std::string dir = ensure_out_dir(config);
  bool ok = true;
  for (Variant v : requested_variants(o, config)) {
    StudyConfig local = config;
    local.variant = v;
    RobustnessResult result = run_robustness(local);
    std::printf("regular family:\n");
    print_record(result.regular, v);
    std::printf("perturbed family:\n");
    print_record(result.perturbed, v);
    std::string stem = dir + "/robustness_" + config.problem + "_" + variant_name(v);
    write_convergence_csv(result.regular, stem + "_regular.csv");
    write_convergence_csv(result.perturbed, stem + "_perturbed.csv");
    for (std::size_t i = 0; i < result.rate_deltas.size(); ++i) {
      std::printf("  rate delta %s: %.4f\n", result.regular.variables[i].c_str(),
                  result.rate_deltas[i]);
      if (check && result.rate_deltas[i] > 0.2) ok = false;
    }
  }
  return ok ? 0 : 3;
}

int cmd_adapt(const CliOptions& o, int base_n) {
  StudyConfig config = build_config(o);
  std::string dir = ensure_out_dir(config);
  AdaptResult result = run_adaptivity(config, base_n);
  write_history_csv(result.history, dir + "/adapt_history.csv");
  write_mesh(result.mesh, dir + "/adapt_final.mesh");
  write_solution_csv(result.mesh, result.solution, dir + "/adapt_final_solution.csv");
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    const auto& it = result.history[i];
    std::printf("iter %zu: cells=%d max_indicator=%.4e exact=%.4e efficiency=%.3f\n", i,
                it.n_cells, it.max_indicator, it.max_exact, it.efficiency);
  }
  std::printf("%s after %zu iterations\n", result.converged ? "converged" : "NOT converged",
              result.history.size());
  return result.converged ? 0 : 3;
}

int cmd_solve(const CliOptions& o, const std::string& mesh_path, int n, bool dump_matrix,
              Equation expected) {
  StudyConfig config = build_config(o);
  const ProblemSpec& spec = find_problem(config.problem);
  if (spec.equation != expected)
    throw std::invalid_argument("problem '" + spec.name + "' does not match this subcommand");
  std::string dir = ensure_out_dir(config);

  SimplicialMesh mesh;
  if (!mesh_path.empty()) {
    mesh = read_mesh(mesh_path);
    if (mesh.dim != spec.dim) throw std::invalid_argument("mesh dimension mismatch");
  } else {
    mesh = make_study_mesh(config, spec, n);  // already boundary-tagged
  }

  for (Variant v : requested_variants(o, config)) {
    std::string stem = dir + "/" + config.problem + "_" + variant_name(v);
    if (expected == Equation::Poisson) {
      PoissonProblem problem = spec.make_poisson(mesh);
      if (config.tau > 0.0) problem.tau = config.tau;
      if (dump_matrix)
        write_matrix_market(assemble_global(problem, v), stem + ".mtx");
      PoissonTimings tm;
      PoissonSolution sol = solve(problem, v, config.solver, config.solver_tol, Exec::Parallel, &tm);
      write_solution_csv(mesh, sol, stem + "_solution.csv");
      ErrorPair err = l2_errors(mesh, sol, spec.exact_u, spec.exact_grad_u);
      std::printf("%s: cells=%d unknowns=%zu err_u=%.6e err_q=%.6e [asm %.3gs solve %.3gs]\n",
                  variant_name(v), mesh.n_cells(), sol.trace.size(), err.u, err.q,
                  tm.assembly_seconds, tm.solve_seconds);
    } else {
      StokesProblem problem = spec.make_stokes(mesh);
      if (config.tau > 0.0) problem.tau = config.tau;
      if (dump_matrix)
        write_matrix_market(assemble_global(problem, v), stem + ".mtx");
      StokesTimings tm;
      StokesSolution sol = solve(problem, v, config.solver, config.solver_tol, Exec::Parallel, &tm);
      write_solution_csv(mesh, sol, stem + "_solution.csv");
      StokesErrors err = l2_errors(mesh, spec.viscosity, sol, spec.exact_velocity,
                                   spec.exact_velocity_grad, spec.exact_pressure);
      std::printf(
          "%s: cells=%d unknowns=%zu err_u=%.6e err_L=%.6e err_p=%.6e [asm %.3gs solve %.3gs]\n",
          variant_name(v), mesh.n_cells(), sol.trace.size() + sol.rho.size(), err.u, err.L, err.p,
          tm.assembly_seconds, tm.solve_seconds);
    }
  }
  return 0;
}

int cmd_mesh_gen(const CliOptions& o, int dim, int n, const std::string& path) {
  StudyConfig config = build_config(o);
  SimplicialMesh mesh;
  switch (config.family) {
    case MeshFamily::Regular:
      mesh = generate_structured(dim, n);
      break;
    case MeshFamily::Distorted:
      mesh = distort(generate_structured(dim, n), config.distortion, config.seed);
      break;
    case MeshFamily::Stretched:
      mesh = generate_stretched(dim, n, config.stretch);
      break;
  }
  if (!config.problem.empty()) {
    mesh = find_problem(config.problem).tag_mesh(mesh);
  }
  write_mesh(mesh, path);
  std::printf("wrote %s: dim=%d vertices=%d cells=%d faces=%d stretch=%.3g\n", path.c_str(),
              mesh.dim, mesh.n_vertices(), mesh.n_cells(), mesh.n_faces(),
              stretching_factor(mesh));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Face-centred finite volume solver for Poisson and Stokes problems"};
  app.require_subcommand(1);

  CliOptions o;
  double min_u_rate = -1.0;
  int sweep_level = 32;
  int base_n = 8;
  int gen_dim = 2, gen_n = 8;
  std::string mesh_path, gen_path = "mesh.txt";
  bool check = false, dump_matrix = false;

  auto* conv = app.add_subcommand("convergence", "mesh-refinement error study with rate fits");
  add_common_flags(conv, o);
  conv->add_option("--min-u-rate", min_u_rate, "exit 3 if the fitted u-rate falls below this");

  auto* sweep = app.add_subcommand("tau-sweep", "error vs stabilisation parameter on a fixed mesh");
  add_common_flags(sweep, o);
  sweep->add_option("--level", sweep_level, "mesh level (n per side)");
  sweep->add_flag("--check", check, "exit 3 unless tau=1e2 error is within 1.15x of the minimum");

  auto* robust = app.add_subcommand("robustness", "regular vs distorted/stretched rate comparison");
  add_common_flags(robust, o);
  robust->add_flag("--check", check, "exit 3 if any rate drops by more than 0.2");

  auto* adapt = app.add_subcommand("adapt", "adaptive refinement loop driven by the error indicator");
  add_common_flags(adapt, o);
  adapt->add_option("--base-n", base_n, "n per side of the base mesh");

  auto* sp = app.add_subcommand("solve-poisson", "single Poisson solve with error report");
  add_common_flags(sp, o);
  sp->add_option("--mesh", mesh_path, "mesh file (overrides --n)");
  sp->add_option("--n", gen_n, "n per side of a generated mesh");
  sp->add_flag("--dump-matrix", dump_matrix, "write the global matrix in Matrix Market format");

  auto* ss = app.add_subcommand("solve-stokes", "single Stokes solve with error report");
  add_common_flags(ss, o);
  ss->add_option("--mesh", mesh_path, "mesh file (overrides --n)");
  ss->add_option("--n", gen_n, "n per side of a generated mesh");
  ss->add_flag("--dump-matrix", dump_matrix, "write the global matrix in Matrix Market format");

  auto* gen = app.add_subcommand("mesh-gen", "generate a mesh file");
  add_common_flags(gen, o);
  gen->add_option("--dim", gen_dim, "2 or 3")->check(CLI::IsMember({2, 3}));
  gen->add_option("--n", gen_n, "n per side");
  gen->add_option("--file", gen_path, "output mesh path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (conv->parsed()) return cmd_convergence(o, min_u_rate);
    if (sweep->parsed()) return cmd_tau_sweep(o, sweep_level, check);
    if (robust->parsed()) return cmd_robustness(o, check);
    if (adapt->parsed()) return cmd_adapt(o, base_n);
    if (sp->parsed()) return cmd_solve(o, mesh_path, gen_n, dump_matrix, Equation::Poisson);
    if (ss->parsed()) return cmd_solve(o, mesh_path, gen_n, dump_matrix, Equation::Stokes);
    if (gen->parsed()) return cmd_mesh_gen(o, gen_dim, gen_n, gen_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
