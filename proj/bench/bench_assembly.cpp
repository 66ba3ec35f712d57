// Assembly benchmark: serial reference vs OpenMP-parallel per-cell fill.
// Also verifies the two paths produce bit-identical systems, which the
// slot-based triplet layout guarantees by construction.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fcfv/poisson.hpp"
#include "fcfv/problems.hpp"
#include "fcfv/stokes.hpp"

using namespace fcfv;

namespace {

double time_seconds(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

bool identical(const SparseSystem& a, const SparseSystem& b) {
  return a.same_pattern(b) && a.values == b.values && a.rhs == b.rhs;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 96;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;

#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both paths run serially\n");
#endif

  {
    const ProblemSpec& spec = find_problem("poisson-sine-2d");
    SimplicialMesh mesh = spec.tag_mesh(generate_structured(2, n));
    PoissonProblem problem = spec.make_poisson(mesh);
    SparseSystem serial, parallel;
    double ts = time_seconds(
        [&] { serial = assemble_global(problem, Variant::SecondOrder, nullptr, Exec::Serial); },
        reps);
    double tp = time_seconds(
        [&] { parallel = assemble_global(problem, Variant::SecondOrder, nullptr, Exec::Parallel); },
        reps);
    std::printf("poisson 2D n=%d (%d cells): serial %.4fs  parallel %.4fs  speedup %.2fx  %s\n", n,
                mesh.n_cells(), ts, tp, ts / tp,
                identical(serial, parallel) ? "bit-identical" : "MISMATCH");
    if (!identical(serial, parallel)) return 1;
  }

  {
    const ProblemSpec& spec = find_problem("stokes-poly-2d");
    SimplicialMesh mesh = spec.tag_mesh(generate_structured(2, n / 2));
    StokesProblem problem = spec.make_stokes(mesh);
    SparseSystem serial, parallel;
    double ts = time_seconds(
        [&] {
          serial = assemble_global(problem, Variant::SecondOrder, nullptr, nullptr, Exec::Serial);
        },
        reps);
    double tp = time_seconds(
        [&] {
          parallel =
              assemble_global(problem, Variant::SecondOrder, nullptr, nullptr, Exec::Parallel);
        },
        reps);
    std::printf("stokes 2D n=%d (%d cells): serial %.4fs  parallel %.4fs  speedup %.2fx  %s\n",
                n / 2, mesh.n_cells(), ts, tp, ts / tp,
                identical(serial, parallel) ? "bit-identical" : "MISMATCH");
    if (!identical(serial, parallel)) return 1;
  }
  return 0;
}
