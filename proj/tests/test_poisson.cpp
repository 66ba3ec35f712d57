#include <stdexcept>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "fcfv/poisson.hpp"
#include "fcfv/problems.hpp"
#include "fcfv/quadrature.hpp"

using namespace fcfv;

namespace {

SimplicialMesh two_cell_mesh() { return generate_structured(2, 1); }

SimplicialMesh unit_right_triangle() {
  SimplicialMesh m;
  m.dim = 2;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.cells = {{0, 1, 2, -1}};
  build_connectivity(m);
  return m;
}

// Face integral of the numerical flux n.q + tau(P0 u - u_hat); the same
// closed form holds for both variants because the face integral of a
// linear field equals its face average times the face measure.
double boundary_flux_sum(const PoissonProblem& problem, const PoissonSolution& sol,
                         double* magnitude) {
  const auto& mesh = *problem.mesh;
  const int npc = mesh.nodes_per_cell();
  double total = 0.0;
  *magnitude = 0.0;
  for (int e = 0; e < mesh.n_cells(); ++e) {
    CellGeometry g = cell_geometry(mesh, e);
    for (int j = 0; j < npc; ++j) {
      const int gf = mesh.cell_faces[e][j];
      if (!mesh.is_boundary_face(gf)) continue;
      const double uhat = mesh.face_tags[gf] == FaceTag::Dirichlet
                              ? face_average(mesh, gf, problem.dirichlet_data)
                              : sol.trace_on_face(gf);
      ProjectionVector p = projection_vector(npc, j);
      double pu = 0.0, nq = 0.0;
      for (int l = 0; l < npc; ++l) pu += p.p[l] * sol.u[e][l];
      for (int d = 0; d < 3; ++d) nq += g.normals[j][d] * sol.q[e][d];
      const double flux = g.face_areas[j] * (nq + problem.tau * (pu - uhat));
      total += flux;
      *magnitude += std::abs(flux);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("boundary face data") {
  SimplicialMesh m = two_cell_mesh();  // all faces default to Dirichlet
  int bottom = -1;
  for (int f = 0; f < m.n_faces(); ++f)
    if (m.vertices[m.faces[f][0]][1] == 0.0 && m.vertices[m.faces[f][1]][1] == 0.0) bottom = f;
  REQUIRE(bottom >= 0);

  PoissonProblem p;
  p.mesh = &m;
  p.dirichlet_data = [](const Vec3&) { return 5.0; };
  CHECK(face_data(p, bottom) == doctest::Approx(5.0));
  p.dirichlet_data = [](const Vec3& x) { return x[0]; };
  CHECK(face_data(p, bottom) == doctest::Approx(0.5));
  p.dirichlet_data = [](const Vec3& x) { return x[0] * x[0]; };
  CHECK(face_data(p, bottom) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  int interior = -1;
  for (int f = 0; f < m.n_faces(); ++f)
    if (!m.is_boundary_face(f)) interior = f;
  CHECK_THROWS_AS(face_data(p, interior), std::invalid_argument);
}

TEST_CASE("local precomputation") {
  // No Dirichlet faces, zero source: b and z vanish.
  SimplicialMesh neumann =
      with_boundary_tags(two_cell_mesh(), [](const Vec3&) { return true; });
  PoissonProblem p0;
  p0.mesh = &neumann;
  p0.source = [](const Vec3&) { return 0.0; };
  p0.dirichlet_data = [](const Vec3&) { return 0.0; };
  p0.neumann_data = [](const Vec3&) { return 0.0; };
  for (Variant v : {Variant::SecondOrder, Variant::FirstOrder}) {
    PoissonLocalPrecomp pc = local_precompute(p0, 0, v);
    for (int i = 0; i < 3; ++i) CHECK(pc.b[i] == 0.0);
    for (int d = 0; d < 3; ++d) CHECK(pc.z[d] == 0.0);
  }

  // s = 6 on the unit right triangle: f_e = 6 * 0.5 / 3 = (1,1,1).
  SimplicialMesh tri = unit_right_triangle();
  SimplicialMesh tri_neumann = with_boundary_tags(tri, [](const Vec3&) { return true; });
  PoissonProblem ps;
  ps.mesh = &tri_neumann;
  ps.source = [](const Vec3&) { return 6.0; };
  ps.dirichlet_data = [](const Vec3&) { return 0.0; };
  ps.neumann_data = [](const Vec3&) { return 0.0; };
  PoissonLocalPrecomp pc = local_precompute(ps, 0, Variant::SecondOrder);
  for (int i = 0; i < 3; ++i) CHECK(pc.b[i] == doctest::Approx(1.0).epsilon(1e-14));

  // Constant Dirichlet data: z = c * sum |G| n = 0.
  SimplicialMesh dir = with_boundary_tags(tri, [](const Vec3&) { return false; });
  PoissonProblem pd;
  pd.mesh = &dir;
  pd.source = [](const Vec3&) { return 0.0; };
  pd.dirichlet_data = [](const Vec3&) { return 4.0; };
  pd.neumann_data = [](const Vec3&) { return 0.0; };
  PoissonLocalPrecomp pcd = local_precompute(pd, 0, Variant::SecondOrder);
  for (int d = 0; d < 3; ++d) CHECK(std::abs(pcd.z[d]) < 1e-12);
}

TEST_CASE("global system dimensions and variant-independent pattern") {
  PoissonProblem p;
  p.source = [](const Vec3&) { return 0.0; };
  p.dirichlet_data = [](const Vec3&) { return 0.0; };
  p.neumann_data = [](const Vec3&) { return 0.0; };

  SimplicialMesh two = two_cell_mesh();
  p.mesh = &two;
  CHECK(assemble_global(p, Variant::SecondOrder).n == 1);

  SimplicialMesh n2 = generate_structured(2, 2);
  p.mesh = &n2;
  CHECK(assemble_global(p, Variant::SecondOrder).n == 8);

  for (SimplicialMesh m :
       {generate_structured(2, 4), distort(generate_structured(2, 4), 0.3, 42),
        generate_structured(3, 2)}) {
    SimplicialMesh mixed = with_boundary_tags(m, [](const Vec3& x) { return x[0] == 1.0; });
    p.mesh = &mixed;
    SparseSystem second = assemble_global(p, Variant::SecondOrder);
    SparseSystem first = assemble_global(p, Variant::FirstOrder);
    CHECK(second.n == first.n);
    CHECK(second.same_pattern(first));
  }
}

TEST_CASE("constant and linear patch tests") {
  PoissonProblem pc;
  pc.source = [](const Vec3&) { return 0.0; };
  pc.dirichlet_data = [](const Vec3&) { return 3.0; };
  pc.neumann_data = [](const Vec3&) { return 0.0; };
  SimplicialMesh mesh = generate_structured(2, 3);
  pc.mesh = &mesh;
  for (Variant v : {Variant::SecondOrder, Variant::FirstOrder}) {
    PoissonSolution sol = solve(pc, v);
    for (double t : sol.trace) CHECK(t == doctest::Approx(3.0).epsilon(1e-10));
    for (int e = 0; e < mesh.n_cells(); ++e) {
      for (int l = 0; l < 3; ++l) CHECK(sol.u[e][l] == doctest::Approx(3.0).epsilon(1e-10));
      for (int d = 0; d < 2; ++d) CHECK(std::abs(sol.q[e][d]) < 1e-10);
    }
  }

  // Linear exact solution: the projected variant reproduces u, q and the
  // trace exactly, on regular and distorted meshes.
  const ProblemSpec& lin = find_problem("poisson-linear-2d");
  for (SimplicialMesh base :
       {two_cell_mesh(), generate_structured(2, 4),
        distort(generate_structured(2, 4), 0.25, 3)}) {
    SimplicialMesh m = lin.tag_mesh(base);
    PoissonProblem p = lin.make_poisson(m);
    PoissonSolution sol = solve(p, Variant::SecondOrder);
    for (int e = 0; e < m.n_cells(); ++e) {
      for (int l = 0; l < 3; ++l) {
        const double exact = lin.exact_u(m.vertices[m.cells[e][l]]);
        CHECK(sol.u[e][l] == doctest::Approx(exact).epsilon(1e-9));
      }
      CHECK(sol.q[e][0] == doctest::Approx(-2.0).epsilon(1e-9));
      CHECK(sol.q[e][1] == doctest::Approx(3.0).epsilon(1e-9));
    }
    ErrorPair err = l2_errors(m, sol, lin.exact_u, lin.exact_grad_u);
    CHECK(err.u < 1e-9);
    CHECK(err.q < 1e-9);
  }

  // The no-projection variant is not consistent on linear fields (that is
  // what limits it to first order); record the deviation without gating.
  {
    SimplicialMesh m = lin.tag_mesh(generate_structured(2, 4));
    PoissonProblem p = lin.make_poisson(m);
    PoissonSolution sol = solve(p, Variant::FirstOrder);
    ErrorPair err = l2_errors(m, sol, lin.exact_u, lin.exact_grad_u);
    CHECK(err.u > 1e-6);  // genuinely inexact, not a tolerance artifact
    WARN_MESSAGE(err.u < 1e-9,
                 "no-projection variant linear-patch u error (expected, first-order scheme): "
                     << err.u);
  }
}

TEST_CASE("3D patch test") {
  const ProblemSpec& lin = find_problem("poisson-linear-3d");
  SimplicialMesh m = lin.tag_mesh(generate_structured(3, 2));
  PoissonProblem p = lin.make_poisson(m);
  PoissonSolution sol = solve(p, Variant::SecondOrder);
  ErrorPair err = l2_errors(m, sol, lin.exact_u, lin.exact_grad_u);
  CHECK(err.u < 1e-9);
  CHECK(err.q < 1e-9);
}

TEST_CASE("global conservation with zero source") {
  PoissonProblem p;
  p.source = [](const Vec3&) { return 0.0; };
  p.dirichlet_data = [](const Vec3& x) { return std::exp(x[0]) * (1.0 + x[1] * x[1]); };
  p.neumann_data = [](const Vec3&) { return 0.0; };
  SimplicialMesh mesh = generate_structured(2, 6);
  p.mesh = &mesh;
  for (Variant v : {Variant::SecondOrder, Variant::FirstOrder}) {
    PoissonSolution sol = solve(p, v);
    double magnitude = 0.0;
    const double net = boundary_flux_sum(p, sol, &magnitude);
    CHECK(std::abs(net) <= 1e-9 * magnitude);
  }
}

TEST_CASE("serial and parallel assembly are bit-identical") {
  const ProblemSpec& spec = find_problem("poisson-sine-2d");
  SimplicialMesh mesh = spec.tag_mesh(generate_structured(2, 8));
  PoissonProblem p = spec.make_poisson(mesh);
  for (Variant v : {Variant::SecondOrder, Variant::FirstOrder}) {
    SparseSystem serial = assemble_global(p, v, nullptr, Exec::Serial);
    SparseSystem parallel = assemble_global(p, v, nullptr, Exec::Parallel);
    CHECK(serial.same_pattern(parallel));
    CHECK(serial.values == parallel.values);
    CHECK(serial.rhs == parallel.rhs);
  }
}

TEST_CASE("variant difference is confined to the m-inverse terms") {
  const ProblemSpec& spec = find_problem("poisson-sine-2d");
  SimplicialMesh mesh = spec.tag_mesh(generate_structured(2, 4));
  PoissonProblem p = spec.make_poisson(mesh);

  std::vector<int> face_unknown;
  SparseSystem sys = assemble_global(p, Variant::SecondOrder, &face_unknown);

  std::vector<Triplet> t2, t1;
  std::vector<double> r2(sys.n, 0.0), r1(sys.n, 0.0);
  global_triplets(p, Variant::SecondOrder, face_unknown, t2, r2, Exec::Serial);
  global_triplets(p, Variant::FirstOrder, face_unknown, t1, r1, Exec::Serial);
  REQUIRE(t2.size() == t1.size());

  const int npc = mesh.nodes_per_cell();
  const int nfn = mesh.nodes_per_face();
  std::size_t k = 0;
  std::vector<double> rhs_diff(sys.n, 0.0);
  for (int e = 0; e < mesh.n_cells(); ++e) {
    PoissonLocalPrecomp pc2 = local_precompute(p, e, Variant::SecondOrder);
    PoissonLocalPrecomp pc1 = local_precompute(p, e, Variant::FirstOrder);

    int bfaces[4], nb = 0;
    for (int j = 0; j < npc; ++j)
      if (face_unknown[mesh.cell_faces[e][j]] >= 0) bfaces[nb++] = j;

    // w_j = (m2^{-1} - m1^{-1}) r_j — the only place the variants differ.
    double wd[4][4];
    for (int jj = 0; jj < nb; ++jj) {
      const int j = bfaces[jj];
      double r[4] = {0, 0, 0, 0}, w2[4], w1[4];
      for (int l = 0; l < npc; ++l)
        if (l != j) r[l] = pc2.geom.face_areas[j] / nfn;
      matvec(pc2.m_inv, r, w2);
      matvec(pc1.m_inv, r, w1);
      for (int l = 0; l < npc; ++l) wd[jj][l] = w2[l] - w1[l];
    }

    const double scale = std::abs(p.tau * p.tau);
    for (int ii = 0; ii < nb; ++ii) {
      const int i = bfaces[ii];
      ProjectionVector pi = projection_vector(npc, i);
      for (int jj = 0; jj < nb; ++jj) {
        CHECK(t2[k].row == t1[k].row);
        CHECK(t2[k].col == t1[k].col);
        double proj = 0.0;
        for (int l = 0; l < npc; ++l) proj += pi.p[l] * wd[jj][l];
        const double predicted = pc2.geom.face_areas[i] * p.tau * p.tau * proj;
        CHECK(std::abs((t2[k].value - t1[k].value) - predicted) <= 1e-12 * scale);
        ++k;
      }
      double pmb = 0.0;
      for (int l = 0; l < npc; ++l) pmb += pi.p[l] * (pc2.mib[l] - pc1.mib[l]);
      rhs_diff[face_unknown[mesh.cell_faces[e][i]]] -=
          pc2.geom.face_areas[i] * p.tau * pmb;
    }
  }
  CHECK(k == t2.size());
  for (int i = 0; i < sys.n; ++i)
    CHECK(std::abs((r2[i] - r1[i]) - rhs_diff[i]) <= 1e-10);
}

TEST_CASE("error norms") {
  SimplicialMesh mesh = generate_structured(2, 2);
  PoissonSolution sol;
  sol.u.assign(mesh.n_cells(), {1.1, 1.1, 1.1, 0.0});
  sol.q.assign(mesh.n_cells(), Vec3{0, 0, 0});
  sol.face_unknown.assign(mesh.n_faces(), -1);
  ErrorPair err = l2_errors(
      mesh, sol, [](const Vec3&) { return 1.0; }, [](const Vec3&) { return Vec3{0, 0, 0}; });
  CHECK(err.u == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(err.absolute);  // zero-norm exact gradient flips the flag
}

TEST_CASE("solution CSV dump") {
  const ProblemSpec& spec = find_problem("poisson-sine-2d");
  SimplicialMesh mesh = spec.tag_mesh(generate_structured(2, 2));
  PoissonProblem p = spec.make_poisson(mesh);
  PoissonSolution sol = solve(p, Variant::SecondOrder);
  const std::string path = "poisson_solution.csv";
  write_solution_csv(mesh, sol, path);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(line.rfind("kind,", 0) == 0);
  while (std::getline(in, line)) ++rows;
  CHECK(rows == mesh.n_cells() + static_cast<int>(sol.trace.size()));
  std::remove(path.c_str());
}
