#include "fcfv/poisson.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "fcfv/quadrature.hpp"

namespace fcfv {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<int> build_face_unknowns(const SimplicialMesh& mesh) {
  std::vector<int> map(mesh.n_faces(), -1);
  int next = 0;
  for (int f = 0; f < mesh.n_faces(); ++f)
    if (mesh.face_tags[f] != FaceTag::Dirichlet) map[f] = next++;
  return map;
}

}  // namespace

double face_data(const PoissonProblem& problem, int face) {
  const auto& mesh = *problem.mesh;
  const FaceTag tag = mesh.face_tags[face];
  if (tag == FaceTag::Dirichlet) return face_average(mesh, face, problem.dirichlet_data);
  if (tag == FaceTag::Neumann) return face_average(mesh, face, problem.neumann_data);
  throw std::invalid_argument("face " + std::to_string(face) + " is not a boundary face");
}

PoissonLocalPrecomp local_precompute(const PoissonProblem& problem, int e, Variant variant) {
  const auto& mesh = *problem.mesh;
  const int n = mesh.nodes_per_cell();
  const int nfn = mesh.nodes_per_face();

  PoissonLocalPrecomp pc;
  pc.geom = cell_geometry(mesh, e);
  pc.taus.fill(problem.tau);

  CellMatrix m = build_me(pc.geom, n, pc.taus, variant);
  pc.m_inv = invert_cellmatrix(m);

  const double f_entry = problem.source(pc.geom.centroid) * pc.geom.volume / n;
  for (int i = 0; i < n; ++i) pc.b[i] = f_entry;

  for (int j = 0; j < n; ++j) {
    const int gf = mesh.cell_faces[e][j];
    if (mesh.face_tags[gf] != FaceTag::Dirichlet) continue;
    const double ud = face_average(mesh, gf, problem.dirichlet_data);
    const double area = pc.geom.face_areas[j];
    for (int i = 0; i < n; ++i)
      if (i != j) pc.b[i] += pc.taus[j] * ud * area / nfn;  // tau_j d_j
    for (int d = 0; d < 3; ++d) pc.z[d] += area * pc.geom.normals[j][d] * ud;
  }
  matvec(pc.m_inv, pc.b.data(), pc.mib.data());
  return pc;
}

void global_triplets(const PoissonProblem& problem, Variant variant,
                     const std::vector<int>& face_unknown, std::vector<Triplet>& triplets,
                     std::vector<double>& rhs, Exec exec) {
  const auto& mesh = *problem.mesh;
  const int n_cells = mesh.n_cells();
  const int npc = mesh.nodes_per_cell();
  const int nfn = mesh.nodes_per_face();

  // Per-cell slot layout so the parallel fill is bit-identical to serial.
  std::vector<int> offsets(n_cells + 1, 0);
  std::vector<int> b_count(n_cells, 0);
  for (int e = 0; e < n_cells; ++e) {
    int nb = 0;
    for (int j = 0; j < npc; ++j)
      if (face_unknown[mesh.cell_faces[e][j]] >= 0) ++nb;
    b_count[e] = nb;
    offsets[e + 1] = offsets[e] + nb * nb;
  }
  triplets.assign(offsets[n_cells], Triplet{});
  std::vector<std::pair<int, double>> rhs_slots;
  std::vector<int> rhs_offsets(n_cells + 1, 0);
  for (int e = 0; e < n_cells; ++e) rhs_offsets[e + 1] = rhs_offsets[e] + b_count[e];
  rhs_slots.assign(rhs_offsets[n_cells], {0, 0.0});

  for_each_index(n_cells, exec, [&](int e) {
    PoissonLocalPrecomp pc = local_precompute(problem, e, variant);

    int bfaces[4], nb = 0;
    for (int j = 0; j < npc; ++j)
      if (face_unknown[mesh.cell_faces[e][j]] >= 0) bfaces[nb++] = j;

    // w_j = m^{-1} r_j with (r_j)_I = |G_j| chi_j(I) / n_fn
    double w[4][4];
    for (int jj = 0; jj < nb; ++jj) {
      const int j = bfaces[jj];
      double r[4] = {0, 0, 0, 0};
      for (int l = 0; l < npc; ++l)
        if (l != j) r[l] = pc.geom.face_areas[j] / nfn;
      matvec(pc.m_inv, r, w[jj]);
    }

    const double inv_vol = 1.0 / pc.geom.volume;
    Triplet* slot = triplets.data() + offsets[e];
    for (int ii = 0; ii < nb; ++ii) {
      const int i = bfaces[ii];
      const auto pi = projection_vector(npc, i);
      const double area_i = pc.geom.face_areas[i];
      const double tau_i = pc.taus[i];

      for (int jj = 0; jj < nb; ++jj) {
        const int j = bfaces[jj];
        double proj = 0.0;
        for (int l = 0; l < npc; ++l) proj += pi.p[l] * w[jj][l];
        double value = area_i * (tau_i * pc.taus[j] * proj -
                                 inv_vol * pc.geom.face_areas[j] *
                                     (pc.geom.normals[i][0] * pc.geom.normals[j][0] +
                                      pc.geom.normals[i][1] * pc.geom.normals[j][1] +
                                      pc.geom.normals[i][2] * pc.geom.normals[j][2]) -
                                 (i == j ? tau_i : 0.0));
        *slot++ = Triplet{face_unknown[mesh.cell_faces[e][i]],
                          face_unknown[mesh.cell_faces[e][j]], value};
      }

      double pmb = 0.0;
      for (int l = 0; l < npc; ++l) pmb += pi.p[l] * pc.mib[l];
      double nz = 0.0;
      for (int d = 0; d < 3; ++d) nz += pc.geom.normals[i][d] * pc.z[d];
      const int gf = mesh.cell_faces[e][i];
      double t_i = 0.0;
      if (mesh.face_tags[gf] == FaceTag::Neumann)
        t_i = face_average(mesh, gf, problem.neumann_data);
      rhs_slots[rhs_offsets[e] + ii] = {face_unknown[gf],
                                        area_i * (inv_vol * nz - tau_i * pmb - t_i)};
    }
  });

  // Deterministic sequential reduction of the rhs.
  for (const auto& [idx, val] : rhs_slots) rhs[idx] += val;
}

SparseSystem assemble_global(const PoissonProblem& problem, Variant variant,
                             std::vector<int>* face_unknown_out, Exec exec) {
  const auto& mesh = *problem.mesh;
  std::vector<int> face_unknown = build_face_unknowns(mesh);
  int n = 0;
  for (int v : face_unknown) n = std::max(n, v + 1);

  std::vector<Triplet> triplets;
  std::vector<double> rhs(n, 0.0);
  global_triplets(problem, variant, face_unknown, triplets, rhs, exec);

  SparseSystem sys = assemble(triplets, n);
  sys.rhs = std::move(rhs);
  if (face_unknown_out) *face_unknown_out = std::move(face_unknown);
  return sys;
}

PoissonSolution solve(const PoissonProblem& problem, Variant variant, SolveMethod method,
                      double tol, Exec exec, PoissonTimings* timings) {
  const auto& mesh = *problem.mesh;
  auto t0 = std::chrono::steady_clock::now();

  PoissonSolution sol;
  sol.variant = variant;
  SparseSystem sys = assemble_global(problem, variant, &sol.face_unknown, exec);
  if (timings) timings->assembly_seconds = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  sol.trace = sys.n > 0 ? fcfv::solve(sys, method, tol) : std::vector<double>{};
  if (timings) timings->solve_seconds = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const int n_cells = mesh.n_cells();
  const int npc = mesh.nodes_per_cell();
  const int nfn = mesh.nodes_per_face();
  sol.u.assign(n_cells, {});
  sol.q.assign(n_cells, Vec3{0, 0, 0});

  for_each_index(n_cells, exec, [&](int e) {
    PoissonLocalPrecomp pc = local_precompute(problem, e, variant);
    const double inv_vol = 1.0 / pc.geom.volume;

    Vec3 q{};
    for (int d = 0; d < 3; ++d) q[d] = -inv_vol * pc.z[d];
    std::array<double, 4> rhs_u = pc.b;

    for (int j = 0; j < npc; ++j) {
      const int gf = mesh.cell_faces[e][j];
      const int unk = sol.face_unknown[gf];
      if (unk < 0) continue;
      const double uhat = sol.trace[unk];
      const double area = pc.geom.face_areas[j];
      for (int d = 0; d < 3; ++d) q[d] -= inv_vol * area * pc.geom.normals[j][d] * uhat;
      for (int l = 0; l < npc; ++l)
        if (l != j) rhs_u[l] += pc.taus[j] * (area / nfn) * uhat;
    }
    matvec(pc.m_inv, rhs_u.data(), sol.u[e].data());
    sol.q[e] = q;
  });
  if (timings) timings->recovery_seconds = seconds_since(t0);
  return sol;
}

ErrorPair l2_errors(const SimplicialMesh& mesh, const PoissonSolution& solution,
                    const ScalarField& exact_u, const VectorField& exact_grad) {
  const auto& rule = mesh.dim == 2 ? tri_dunavant6() : tet_keast11();
  const int npc = mesh.nodes_per_cell();

  double num_u = 0.0, den_u = 0.0, num_q = 0.0, den_q = 0.0;
  for (int e = 0; e < mesh.n_cells(); ++e) {
    CellGeometry g = cell_geometry(mesh, e);
    for (const auto& qp : rule) {
      Vec3 x{0, 0, 0};
      double uh = 0.0;
      for (int l = 0; l < npc; ++l) {
        for (int d = 0; d < 3; ++d) x[d] += qp.bary[l] * mesh.vertices[mesh.cells[e][l]][d];
        uh += qp.bary[l] * solution.u[e][l];
      }
      const double ue = exact_u(x);
      const Vec3 grad = exact_grad(x);
      num_u += qp.weight * g.volume * (ue - uh) * (ue - uh);
      den_u += qp.weight * g.volume * ue * ue;
      for (int d = 0; d < mesh.dim; ++d) {
        const double qe = -grad[d];
        num_q += qp.weight * g.volume * (qe - solution.q[e][d]) * (qe - solution.q[e][d]);
        den_q += qp.weight * g.volume * qe * qe;
      }
    }
  }
  ErrorPair err;
  if (den_u < 1e-300 || den_q < 1e-300) {
    err.absolute = true;
    err.u = std::sqrt(num_u);
    err.q = std::sqrt(num_q);
  } else {
    err.u = std::sqrt(num_u / den_u);
    err.q = std::sqrt(num_q / den_q);
  }
  return err;
}

void write_solution_csv(const SimplicialMesh& mesh, const PoissonSolution& solution,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << std::setprecision(17);
  out << "kind,id,u0,u1,u2,u3,q0,q1,q2\n";
  for (int e = 0; e < mesh.n_cells(); ++e) {
    out << "cell," << e;
    for (int l = 0; l < 4; ++l)
      out << ',' << (l < mesh.nodes_per_cell() ? solution.u[e][l] : 0.0);
    for (int d = 0; d < 3; ++d) out << ',' << solution.q[e][d];
    out << '\n';
  }
  for (int f = 0; f < mesh.n_faces(); ++f)
    if (solution.face_unknown[f] >= 0)
      out << "face," << f << ',' << solution.trace_on_face(f) << ",,,,,,\n";
}

}  // namespace fcfv
