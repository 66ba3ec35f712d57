#include <stdexcept>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "fcfv/problems.hpp"

using namespace fcfv;

TEST_CASE("catalog contents") {
  std::set<std::string> names;
  for (const auto& p : catalog()) names.insert(p.name);
  for (const char* required :
       {"poisson-sine-2d", "poisson-sine-3d", "poisson-gauss-2d", "poisson-linear-2d",
        "poisson-linear-3d", "stokes-poly-2d", "stokes-poly-3d", "stokes-linear-2d"})
    CHECK(names.count(required) == 1);

  CHECK(find_problem("poisson-sine-2d").dim == 2);
  CHECK_THROWS_AS(find_problem("poisson-cubed-4d"), std::invalid_argument);
}

TEST_CASE("exact-solution spot values") {
  const ProblemSpec& gauss = find_problem("poisson-gauss-2d");
  CHECK(gauss.exact_u({0.7, 0.7, 0.0}) == doctest::Approx(1.0).epsilon(1e-14));

  const ProblemSpec& sine = find_problem("poisson-sine-2d");
  CHECK(sine.exact_u({0.5, 0.5, 0.0}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("every catalog entry satisfies its PDE") {
  for (const auto& p : catalog()) CHECK(residual_check(p, 100, 7) <= 1e-10);
}

TEST_CASE("residual check detects a corrupted source") {
  ProblemSpec bad = find_problem("poisson-sine-2d");
  auto orig = bad.source;
  bad.source = [orig](const Vec3& x) { return orig(x) + 1.0; };
  const double r = residual_check(bad, 100, 7);
  CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("residual check sampling is seed-stable") {
  const ProblemSpec& p = find_problem("stokes-poly-2d");
  CHECK(residual_check(p, 50, 123) == residual_check(p, 50, 123));
}

TEST_CASE("manufactured Stokes velocity is divergence-free") {
  const ProblemSpec& spec = find_problem("stokes-poly-2d");
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.01, 0.99);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    Vec3 x{unit(rng), unit(rng), 0.0};

    // Hand-coded gradient is trace-free...
    Mat3 g = spec.exact_velocity_grad(x);
    CHECK(std::abs(g[0][0] + g[1][1]) <= 1e-12);

    // ...and matches a central finite difference of the velocity itself,
    // so the gradient transcription cannot hide a divergence.
    double div_fd = 0.0;
    for (int d = 0; d < 2; ++d) {
      Vec3 xp = x, xm = x;
      xp[d] += h;
      xm[d] -= h;
      div_fd += (spec.exact_velocity(xp)[d] - spec.exact_velocity(xm)[d]) / (2.0 * h);
    }
    CHECK(std::abs(div_fd) <= 1e-7);

    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        Vec3 xp = x, xm = x;
        xp[a] += h;
        xm[a] -= h;
        const double fd = (spec.exact_velocity(xp)[b] - spec.exact_velocity(xm)[b]) / (2.0 * h);
        CHECK(std::abs(fd - g[a][b]) <= 1e-7);
      }
  }
}

TEST_CASE("problem factories enforce the equation type") {
  SimplicialMesh mesh = generate_structured(2, 2);
  CHECK_THROWS_AS(find_problem("poisson-sine-2d").make_stokes(mesh), std::logic_error);
  CHECK_THROWS_AS(find_problem("stokes-poly-2d").make_poisson(mesh), std::logic_error);
}
