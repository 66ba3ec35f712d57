#include "fcfv/study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace fcfv {

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line, section;
  while (std::getline(in, line)) {
    auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line.front() == '[') {
      if (line.back() != ']') throw std::runtime_error("malformed section header: " + line);
      section = line.substr(1, line.size() - 2);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("malformed config line: " + line);
    auto strip = [](std::string s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    kv[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

namespace {

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::string bare_key(const std::string& k) {
  auto dot = k.rfind('.');
  return dot == std::string::npos ? k : k.substr(dot + 1);
}

}  // namespace

void apply_config(StudyConfig& config, const std::map<std::string, std::string>& kv) {
  for (const auto& [full_key, value] : kv) {
    const std::string key = bare_key(full_key);
    if (key == "problem") config.problem = value;
    else if (key == "variant") {
      if (value == "first") config.variant = Variant::FirstOrder;
      else if (value == "second") config.variant = Variant::SecondOrder;
      else throw std::runtime_error("variant must be first|second, got " + value);
    } else if (key == "levels") config.levels = parse_int_list(value);
    else if (key == "tau_grid") config.tau_grid = parse_double_list(value);
    else if (key == "tau") config.tau = std::stod(value);
    else if (key == "solver") config.solver = parse_solve_method(value);
    else if (key == "solver_tol") config.solver_tol = std::stod(value);
    else if (key == "family") {
      if (value == "regular") config.family = MeshFamily::Regular;
      else if (value == "distorted") config.family = MeshFamily::Distorted;
      else if (value == "stretched") config.family = MeshFamily::Stretched;
      else throw std::runtime_error("unknown mesh family " + value);
    } else if (key == "distortion") config.distortion = std::stod(value);
    else if (key == "seed") config.seed = std::stoull(value);
    else if (key == "stretch") config.stretch = std::stod(value);
    else if (key == "epsilon") config.epsilon = std::stod(value);
    else if (key == "max_iters") config.max_iters = std::stoi(value);
    else if (key == "exponent_mode") {
      if (value == "aggressive") config.exponent_mode = ExponentMode::Aggressive;
      else if (value == "richardson") config.exponent_mode = ExponentMode::Richardson;
      else throw std::runtime_error("exponent_mode must be aggressive|richardson");
    } else if (key == "out") config.out_dir = value;
    else throw std::runtime_error("unknown config key '" + full_key + "'");
  }
}

SimplicialMesh make_study_mesh(const StudyConfig& config, const ProblemSpec& spec, int n) {
  SimplicialMesh mesh;
  switch (config.family) {
    case MeshFamily::Regular:
      mesh = generate_structured(spec.dim, n);
      break;
    case MeshFamily::Distorted:
      mesh = distort(generate_structured(spec.dim, n), config.distortion, config.seed);
      break;
    case MeshFamily::Stretched:
      mesh = generate_stretched(spec.dim, n, config.stretch);
      break;
  }
  return spec.tag_mesh(mesh);
}

double fit_rate(const std::vector<double>& hs, const std::vector<double>& errors) {
  if (hs.size() != errors.size() || hs.size() < 3)
    throw std::invalid_argument("rate fit needs at least 3 levels");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(hs.size());
  for (int i = 0; i < n; ++i) {
    const double x = std::log(hs[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

LevelRecord solve_level(const StudyConfig& config, const ProblemSpec& spec,
                        const SimplicialMesh& mesh) {
  LevelRecord rec;
  rec.h = max_cell_size(mesh);
  rec.n_cells = mesh.n_cells();
  const double tau = config.tau > 0.0 ? config.tau : spec.tau;

  if (spec.equation == Equation::Poisson) {
    PoissonProblem problem = spec.make_poisson(mesh);
    problem.tau = tau;
    PoissonTimings tm;
    PoissonSolution sol = solve(problem, config.variant, config.solver, config.solver_tol,
                                Exec::Parallel, &tm);
    rec.n_unknowns = static_cast<int>(sol.trace.size());
    ErrorPair err = l2_errors(mesh, sol, spec.exact_u, spec.exact_grad_u);
    rec.errors = {err.u, err.q};
    rec.assembly_seconds = tm.assembly_seconds;
    rec.solve_seconds = tm.solve_seconds;
    rec.recovery_seconds = tm.recovery_seconds;
  } else {
    StokesProblem problem = spec.make_stokes(mesh);
    problem.tau = tau;
    StokesTimings tm;
    StokesSolution sol = solve(problem, config.variant, config.solver, config.solver_tol,
                               Exec::Parallel, &tm);
    rec.n_unknowns = static_cast<int>(sol.trace.size() + sol.rho.size());
    StokesErrors err = l2_errors(mesh, spec.viscosity, sol, spec.exact_velocity,
                                 spec.exact_velocity_grad, spec.exact_pressure);
    rec.errors = {err.u, err.L, err.p};
    rec.assembly_seconds = tm.assembly_seconds;
    rec.solve_seconds = tm.solve_seconds;
    rec.recovery_seconds = tm.recovery_seconds;
  }
  return rec;
}

void fit_record(ConvergenceRecord& record) {
  const std::size_t n_vars = record.variables.size();
  record.rates.assign(n_vars, 0.0);
  record.last_pair_rates.assign(n_vars, 0.0);
  std::vector<double> hs;
  for (const auto& lv : record.levels) hs.push_back(lv.h);
  for (std::size_t v = 0; v < n_vars; ++v) {
    std::vector<double> errs;
    for (const auto& lv : record.levels) errs.push_back(lv.errors[v]);
    record.rates[v] = fit_rate(hs, errs);
    const std::size_t m = hs.size();
    record.last_pair_rates[v] =
        std::log(errs[m - 1] / errs[m - 2]) / std::log(hs[m - 1] / hs[m - 2]);
  }
}

}  // namespace

ConvergenceRecord run_convergence(const StudyConfig& config) {
  const ProblemSpec& spec = find_problem(config.problem);
  if (config.levels.size() < 3) throw std::invalid_argument("need at least 3 mesh levels");

  ConvergenceRecord record;
  record.variables = spec.equation == Equation::Poisson ? std::vector<std::string>{"u", "q"}
                                                        : std::vector<std::string>{"u", "L", "p"};
  for (int n : config.levels) {
    SimplicialMesh mesh = make_study_mesh(config, spec, n);
    record.levels.push_back(solve_level(config, spec, mesh));
  }
  for (std::size_t i = 1; i < record.levels.size(); ++i)
    if (!(record.levels[i].h < record.levels[i - 1].h))
      throw std::runtime_error("mesh sizes are not strictly decreasing across levels");
  fit_record(record);
  return record;
}

TauSweep run_tau_sweep(const StudyConfig& config, int level) {
  const ProblemSpec& spec = find_problem(config.problem);
  TauSweep sweep;
  sweep.variables = spec.equation == Equation::Poisson ? std::vector<std::string>{"u", "q"}
                                                       : std::vector<std::string>{"u", "L", "p"};
  SimplicialMesh mesh = make_study_mesh(config, spec, level);
  for (double tau : config.tau_grid) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau grid values must be positive");
    StudyConfig local = config;
    local.tau = tau;
    TauRecord rec;
    rec.tau = tau;
    rec.errors = solve_level(local, spec, mesh).errors;
    sweep.records.push_back(rec);
  }
  double min_u = sweep.records.front().errors[0];
  for (const auto& r : sweep.records) min_u = std::min(min_u, r.errors[0]);
  for (const auto& r : sweep.records)
    if (r.errors[0] <= 1.15 * min_u) {
      sweep.plateau_tau = r.tau;
      break;
    }
  return sweep;
}

RobustnessResult run_robustness(const StudyConfig& config) {
  RobustnessResult result;
  StudyConfig regular = config;
  regular.family = MeshFamily::Regular;
  result.regular = run_convergence(regular);

  StudyConfig perturbed = config;
  if (perturbed.family == MeshFamily::Regular) perturbed.family = MeshFamily::Distorted;
  result.perturbed = run_convergence(perturbed);

  for (std::size_t v = 0; v < result.regular.rates.size(); ++v)
    result.rate_deltas.push_back(result.regular.rates[v] - result.perturbed.rates[v]);
  return result;
}

AdaptResult run_adaptivity(const StudyConfig& config, int base_n) {
  const ProblemSpec& spec = find_problem(config.problem);
  SimplicialMesh base = generate_structured(spec.dim, base_n);
  return adapt_loop(spec, base, config.epsilon, config.max_iters, config.exponent_mode,
                    config.solver, config.tau);
}

void write_convergence_csv(const ConvergenceRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << std::setprecision(12);
  out << "h,n_cells,n_unknowns";
  for (const auto& v : record.variables) out << ",err_" << v;
  out << ",assembly_s,solve_s,recovery_s\n";
  for (const auto& lv : record.levels) {
    out << lv.h << ',' << lv.n_cells << ',' << lv.n_unknowns;
    for (double e : lv.errors) out << ',' << e;
    out << ',' << lv.assembly_seconds << ',' << lv.solve_seconds << ',' << lv.recovery_seconds
        << '\n';
  }
  out << "rates";
  for (double r : record.rates) out << ',' << r;
  out << "\nlast_pair_rates";
  for (double r : record.last_pair_rates) out << ',' << r;
  out << '\n';
}

void emit_plotdata(const ConvergenceRecord& record, const std::string& csv_path,
                   const std::string& svg_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot open " + csv_path + " for writing");
  out << std::setprecision(12);
  out << "variable,log10_h,log10_err\n";
  for (std::size_t v = 0; v < record.variables.size(); ++v)
    for (const auto& lv : record.levels)
      out << record.variables[v] << ',' << std::log10(lv.h) << ',' << std::log10(lv.errors[v])
          << '\n';
  out << "# fitted slopes\n";
  for (std::size_t v = 0; v < record.variables.size(); ++v)
    out << "fit," << record.variables[v] << ',' << record.rates[v] << '\n';

  if (svg_path.empty()) return;
  std::ofstream svg(svg_path);
  if (!svg) throw std::runtime_error("cannot open " + svg_path + " for writing");

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& lv : record.levels) {
    xmin = std::min(xmin, std::log10(lv.h));
    xmax = std::max(xmax, std::log10(lv.h));
    for (double e : lv.errors) {
      ymin = std::min(ymin, std::log10(e));
      ymax = std::max(ymax, std::log10(e));
    }
  }
  const double w = 480, hgt = 360, m = 50;
  auto sx = [&](double x) { return m + (x - xmin) / std::max(1e-12, xmax - xmin) * (w - 2 * m); };
  auto sy = [&](double y) {
    return hgt - m - (y - ymin) / std::max(1e-12, ymax - ymin) * (hgt - 2 * m);
  };
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << hgt
      << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << m << "\" y1=\"" << hgt - m << "\" x2=\"" << w - m << "\" y2=\""
      << hgt - m << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << hgt - m
      << "\" stroke=\"black\"/>\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
  for (std::size_t v = 0; v < record.variables.size(); ++v) {
    const char* color = colors[v % 3];
    for (const auto& lv : record.levels)
      svg << "<circle cx=\"" << sx(std::log10(lv.h)) << "\" cy=\"" << sy(std::log10(lv.errors[v]))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    // least-squares line through the data range
    double x0 = std::log10(record.levels.back().h), x1 = std::log10(record.levels.front().h);
    double cx = 0, cy = 0;
    for (const auto& lv : record.levels) {
      cx += std::log10(lv.h) / record.levels.size();
      cy += std::log10(lv.errors[v]) / record.levels.size();
    }
    auto yat = [&](double x) { return cy + record.rates[v] * (x - cx); };
    svg << "<line x1=\"" << sx(x0) << "\" y1=\"" << sy(yat(x0)) << "\" x2=\"" << sx(x1)
        << "\" y2=\"" << sy(yat(x1)) << "\" stroke=\"" << color << "\" stroke-dasharray=\"4\"/>\n";
    std::ostringstream slope;
    slope << std::fixed << std::setprecision(3) << record.rates[v];
    svg << "<text x=\"" << w - m - 120 << "\" y=\"" << m + 16 * (v + 1) << "\" fill=\"" << color
        << "\" font-size=\"12\">" << record.variables[v] << ": slope " << slope.str()
        << "</text>\n";
  }
  svg << "<text x=\"" << w / 2 - 20 << "\" y=\"" << hgt - 12
      << "\" font-size=\"12\">log10 h</text>\n";
  svg << "</svg>\n";
}

}  // namespace fcfv
