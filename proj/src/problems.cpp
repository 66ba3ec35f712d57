#include "fcfv/problems.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace fcfv {

namespace {

constexpr double kPi = 3.14159265358979323846;

// x^2 (1-x)^2 and its derivatives; building block of the divergence-free
// polynomial velocity field.
double phi(double x) { return x * x * (1.0 - x) * (1.0 - x); }
double dphi(double x) { return 2.0 * x - 6.0 * x * x + 4.0 * x * x * x; }
double ddphi(double x) { return 2.0 - 12.0 * x + 12.0 * x * x; }
double dddphi(double x) { return -12.0 + 24.0 * x; }

NeumannPredicate neumann_on_x1() {
  return [](const Vec3& x) { return x[0] > 1.0 - 1e-9; };
}

ProblemSpec poisson_sine(int dim) {
  ProblemSpec s;
  s.name = dim == 2 ? "poisson-sine-2d" : "poisson-sine-3d";
  s.dim = dim;
  s.equation = Equation::Poisson;
  if (dim == 2) {
    s.exact_u = [](const Vec3& x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); };
    s.exact_grad_u = [](const Vec3& x) {
      return Vec3{kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]),
                  kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1]), 0.0};
    };
    s.exact_laplacian_u = [](const Vec3& x) {
      return -2.0 * kPi * kPi * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
    };
    s.source = [](const Vec3& x) {
      return 2.0 * kPi * kPi * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
    };
  } else {
    s.exact_u = [](const Vec3& x) {
      return std::sin(kPi * x[0]) * std::sin(kPi * x[1]) * std::sin(kPi * x[2]);
    };
    s.exact_grad_u = [](const Vec3& x) {
      return Vec3{kPi * std::cos(kPi * x[0]) * std::sin(kPi * x[1]) * std::sin(kPi * x[2]),
                  kPi * std::sin(kPi * x[0]) * std::cos(kPi * x[1]) * std::sin(kPi * x[2]),
                  kPi * std::sin(kPi * x[0]) * std::sin(kPi * x[1]) * std::cos(kPi * x[2])};
    };
    s.exact_laplacian_u = [](const Vec3& x) {
      return -3.0 * kPi * kPi * std::sin(kPi * x[0]) * std::sin(kPi * x[1]) * std::sin(kPi * x[2]);
    };
    s.source = [](const Vec3& x) {
      return 3.0 * kPi * kPi * std::sin(kPi * x[0]) * std::sin(kPi * x[1]) * std::sin(kPi * x[2]);
    };
  }
  s.neumann_boundary = neumann_on_x1();
  return s;
}

ProblemSpec poisson_gauss_2d() {
  ProblemSpec s;
  s.name = "poisson-gauss-2d";
  s.dim = 2;
  s.equation = Equation::Poisson;
  auto r2 = [](const Vec3& x) {
    return (x[0] - 0.7) * (x[0] - 0.7) + (x[1] - 0.7) * (x[1] - 0.7);
  };
  s.exact_u = [r2](const Vec3& x) { return std::exp(-100.0 * r2(x)); };
  s.exact_grad_u = [r2](const Vec3& x) {
    const double u = std::exp(-100.0 * r2(x));
    return Vec3{-200.0 * (x[0] - 0.7) * u, -200.0 * (x[1] - 0.7) * u, 0.0};
  };
  s.exact_laplacian_u = [r2](const Vec3& x) {
    const double u = std::exp(-100.0 * r2(x));
    return u * (40000.0 * r2(x) - 400.0);
  };
  s.source = [r2](const Vec3& x) {
    const double u = std::exp(-100.0 * r2(x));
    return u * (400.0 - 40000.0 * r2(x));
  };
  s.epsilon = 1e-2;
  return s;  // all-Dirichlet
}

ProblemSpec poisson_linear(int dim) {
  ProblemSpec s;
  s.name = dim == 2 ? "poisson-linear-2d" : "poisson-linear-3d";
  s.dim = dim;
  s.equation = Equation::Poisson;
  const double cz = dim == 3 ? 0.5 : 0.0;
  s.exact_u = [cz](const Vec3& x) { return 1.0 + 2.0 * x[0] - 3.0 * x[1] + cz * x[2]; };
  s.exact_grad_u = [cz](const Vec3&) { return Vec3{2.0, -3.0, cz}; };
  s.exact_laplacian_u = [](const Vec3&) { return 0.0; };
  s.source = [](const Vec3&) { return 0.0; };
  return s;
}

ProblemSpec stokes_poly(int dim) {
  ProblemSpec s;
  s.name = dim == 2 ? "stokes-poly-2d" : "stokes-poly-3d";
  s.dim = dim;
  s.equation = Equation::Stokes;
  s.viscosity = 1.0;
  s.exact_velocity = [](const Vec3& x) {
    return Vec3{phi(x[0]) * dphi(x[1]), -dphi(x[0]) * phi(x[1]), 0.0};
  };
  s.exact_velocity_grad = [](const Vec3& x) {
    Mat3 g{};
    g[0][0] = dphi(x[0]) * dphi(x[1]);
    g[1][0] = phi(x[0]) * ddphi(x[1]);
    g[0][1] = -ddphi(x[0]) * phi(x[1]);
    g[1][1] = -dphi(x[0]) * dphi(x[1]);
    return g;
  };
  s.exact_velocity_laplacian = [](const Vec3& x) {
    return Vec3{ddphi(x[0]) * dphi(x[1]) + phi(x[0]) * dddphi(x[1]),
                -(dddphi(x[0]) * phi(x[1]) + dphi(x[0]) * ddphi(x[1])), 0.0};
  };
  s.exact_pressure = [](const Vec3& x) { return x[0] * (1.0 - x[0]) - 1.0 / 6.0; };
  s.exact_pressure_grad = [](const Vec3& x) { return Vec3{1.0 - 2.0 * x[0], 0.0, 0.0}; };
  const double nu = s.viscosity;
  auto lap = s.exact_velocity_laplacian;
  auto pgrad = s.exact_pressure_grad;
  s.body_force = [nu, lap, pgrad](const Vec3& x) {
    const Vec3 l = lap(x);
    const Vec3 g = pgrad(x);
    return Vec3{-nu * l[0] + g[0], -nu * l[1] + g[1], -nu * l[2] + g[2]};
  };
  s.neumann_boundary = neumann_on_x1();
  return s;
}

ProblemSpec stokes_linear_2d() {
  ProblemSpec s;
  s.name = "stokes-linear-2d";
  s.dim = 2;
  s.equation = Equation::Stokes;
  s.viscosity = 1.0;
  s.exact_velocity = [](const Vec3& x) { return Vec3{x[1], 0.0, 0.0}; };
  s.exact_velocity_grad = [](const Vec3&) {
    Mat3 g{};
    g[1][0] = 1.0;
    return g;
  };
  s.exact_velocity_laplacian = [](const Vec3&) { return Vec3{0, 0, 0}; };
  s.exact_pressure = [](const Vec3&) { return 1.0; };
  s.exact_pressure_grad = [](const Vec3&) { return Vec3{0, 0, 0}; };
  s.body_force = [](const Vec3&) { return Vec3{0, 0, 0}; };
  s.neumann_boundary = neumann_on_x1();
  return s;
}

}  // namespace

PoissonProblem ProblemSpec::make_poisson(const SimplicialMesh& mesh) const {
  if (equation != Equation::Poisson) throw std::logic_error(name + " is not a Poisson problem");
  PoissonProblem p;
  p.mesh = &mesh;
  p.source = source;
  p.dirichlet_data = exact_u;
  // Neumann faces only live on the x1 = 1 box face in this catalog.
  auto grad = exact_grad_u;
  p.neumann_data = [grad](const Vec3& x) { return grad(x)[0]; };
  p.tau = tau;
  return p;
}

StokesProblem ProblemSpec::make_stokes(const SimplicialMesh& mesh) const {
  if (equation != Equation::Stokes) throw std::logic_error(name + " is not a Stokes problem");
  StokesProblem p;
  p.mesh = &mesh;
  p.viscosity = viscosity;
  p.body_force = body_force;
  p.dirichlet_data = exact_velocity;
  const double nu = viscosity;
  auto grad = exact_velocity_grad;
  auto pr = exact_pressure;
  // Pseudo-traction on the x1 = 1 Neumann plane, n = (1,0,0):
  // t_b = nu d u_b / d x_1 - p delta_{b1}.
  p.pseudo_traction = [nu, grad, pr](const Vec3& x) {
    const Mat3 g = grad(x);
    return Vec3{nu * g[0][0] - pr(x), nu * g[0][1], nu * g[0][2]};
  };
  p.tau = tau;
  return p;
}

SimplicialMesh ProblemSpec::tag_mesh(const SimplicialMesh& mesh) const {
  return with_boundary_tags(mesh, neumann_boundary);
}

const std::vector<ProblemSpec>& catalog() {
  static const std::vector<ProblemSpec> problems = {
      poisson_sine(2),   poisson_sine(3),   poisson_gauss_2d(), poisson_linear(2),
      poisson_linear(3), stokes_poly(2),    stokes_poly(3),     stokes_linear_2d(),
  };
  return problems;
}

const ProblemSpec& find_problem(const std::string& name) {
  for (const auto& p : catalog())
    if (p.name == name) return p;
  throw std::invalid_argument("unknown problem '" + name + "'");
}

double residual_check(const ProblemSpec& spec, int n_samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  double worst = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    Vec3 x{unit(rng), unit(rng), spec.dim == 3 ? unit(rng) : 0.0};
    if (spec.equation == Equation::Poisson) {
      worst = std::max(worst, std::abs(-spec.exact_laplacian_u(x) - spec.source(x)));
    } else {
      const Vec3 lap = spec.exact_velocity_laplacian(x);
      const Vec3 gp = spec.exact_pressure_grad(x);
      const Vec3 s = spec.body_force(x);
      for (int d = 0; d < spec.dim; ++d)
        worst = std::max(worst, std::abs(-spec.viscosity * lap[d] + gp[d] - s[d]));
      const Mat3 g = spec.exact_velocity_grad(x);
      double div = 0.0;
      for (int d = 0; d < spec.dim; ++d) div += g[d][d];
      worst = std::max(worst, std::abs(div));
    }
  }
  return worst;
}

}  // namespace fcfv
