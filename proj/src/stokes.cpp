#include "fcfv/stokes.hpp"

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

Vec3 face_average_vec(const SimplicialMesh& mesh, int f, const Vec3Field& fn) {
  Vec3 avg{0, 0, 0};
  for (int d = 0; d < mesh.dim; ++d) {
    avg[d] = face_average(mesh, f, [&](const Vec3& x) { return fn(x)[d]; });
  }
  return avg;
}

struct UnknownLayout {
  std::vector<int> face_unknown;
  int n_bfaces = 0;
  int n_trace = 0;   // nsd * n_bfaces
  int n_total = 0;
  bool pure_dirichlet = false;

  int trace_index(int dim, int face_unk, int comp) const { return dim * face_unk + comp; }
  int rho_index(int e) const { return n_trace + e; }
};

UnknownLayout build_layout(const SimplicialMesh& mesh) {
  UnknownLayout lay;
  lay.face_unknown.assign(mesh.n_faces(), -1);
  bool has_neumann = false;
  for (int f = 0; f < mesh.n_faces(); ++f) {
    if (mesh.face_tags[f] != FaceTag::Dirichlet) lay.face_unknown[f] = lay.n_bfaces++;
    if (mesh.face_tags[f] == FaceTag::Neumann) has_neumann = true;
  }
  lay.pure_dirichlet = !has_neumann;
  lay.n_trace = mesh.dim * lay.n_bfaces;
  lay.n_total = lay.n_trace + mesh.n_cells() + (lay.pure_dirichlet ? 1 : 0);
  return lay;
}

void check_global_compatibility(const StokesProblem& problem) {
  const auto& mesh = *problem.mesh;
  double flux = 0.0, scale = 0.0;
  for (int e = 0; e < mesh.n_cells(); ++e) {
    CellGeometry g = cell_geometry(mesh, e);
    for (int j = 0; j < mesh.nodes_per_cell(); ++j) {
      const int gf = mesh.cell_faces[e][j];
      if (!mesh.is_boundary_face(gf)) continue;
      Vec3 ud = face_average_vec(mesh, gf, problem.dirichlet_data);
      double un = 0.0, mag = 0.0;
      for (int d = 0; d < 3; ++d) {
        un += ud[d] * g.normals[j][d];
        mag += ud[d] * ud[d];
      }
      flux += g.face_areas[j] * un;
      scale += g.face_areas[j] * (1.0 + std::sqrt(mag));
    }
  }
  if (std::abs(flux) > 1e-10 * scale)
    throw std::runtime_error("pure-Dirichlet Stokes data violates the global compatibility "
                             "condition, net boundary flux = " + std::to_string(flux));
}

}  // namespace

StokesLocalPrecomp local_precompute(const StokesProblem& problem, int e, Variant variant) {
  const auto& mesh = *problem.mesh;
  const int n = mesh.nodes_per_cell();
  const int nfn = mesh.nodes_per_face();
  const int dim = mesh.dim;

  StokesLocalPrecomp pc;
  pc.geom = cell_geometry(mesh, e);
  pc.taus.fill(problem.tau);

  CellMatrix m = build_me(pc.geom, n, pc.taus, variant);
  pc.m_inv = invert_cellmatrix(m);

  Vec3 s = problem.body_force(pc.geom.centroid);
  for (int c = 0; c < dim; ++c)
    for (int i = 0; i < n; ++i) pc.b[c][i] = s[c] * pc.geom.volume / n;

  for (int j = 0; j < n; ++j) {
    const int gf = mesh.cell_faces[e][j];
    if (mesh.face_tags[gf] != FaceTag::Dirichlet) continue;
    Vec3 ud = face_average_vec(mesh, gf, problem.dirichlet_data);
    const double area = pc.geom.face_areas[j];
    for (int c = 0; c < dim; ++c)
      for (int i = 0; i < n; ++i)
        if (i != j) pc.b[c][i] += pc.taus[j] * ud[c] * area / nfn;
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) pc.z[a][c] += area * pc.geom.normals[j][a] * ud[c];
  }
  for (int c = 0; c < dim; ++c) matvec(pc.m_inv, pc.b[c].data(), pc.mib[c].data());
  return pc;
}

SparseSystem assemble_global(const StokesProblem& problem, Variant variant,
                             std::vector<int>* face_unknown_out, int* n_trace_unknowns,
                             Exec exec) {
  const auto& mesh = *problem.mesh;
  const int n_cells = mesh.n_cells();
  const int npc = mesh.nodes_per_cell();
  const int nfn = mesh.nodes_per_face();
  const int dim = mesh.dim;
  const double nu = problem.viscosity;
  if (!(nu > 0.0)) throw std::invalid_argument("viscosity must be positive");

  UnknownLayout lay = build_layout(mesh);
  if (lay.pure_dirichlet) check_global_compatibility(problem);

  // Slot counts per cell: nb^2*dim velocity-velocity diagonal-block
  // entries, 2*nb*dim velocity-pressure couplings.
  std::vector<int> b_count(n_cells, 0);
  std::vector<int> offsets(n_cells + 1, 0), rhs_offsets(n_cells + 1, 0);
  for (int e = 0; e < n_cells; ++e) {
    int nb = 0;
    for (int j = 0; j < npc; ++j)
      if (lay.face_unknown[mesh.cell_faces[e][j]] >= 0) ++nb;
    b_count[e] = nb;
    offsets[e + 1] = offsets[e] + nb * nb * dim + 2 * nb * dim;
    rhs_offsets[e + 1] = rhs_offsets[e] + nb * dim + 1;
  }
  std::vector<Triplet> triplets(offsets[n_cells]);
  std::vector<std::pair<int, double>> rhs_slots(rhs_offsets[n_cells], {0, 0.0});

  for_each_index(n_cells, exec, [&](int e) {
    StokesLocalPrecomp pc = local_precompute(problem, e, variant);

    int bfaces[4], nb = 0;
    for (int j = 0; j < npc; ++j)
      if (lay.face_unknown[mesh.cell_faces[e][j]] >= 0) bfaces[nb++] = j;

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
    auto* rhs_slot = rhs_slots.data() + rhs_offsets[e];
    double f_rho = 0.0;

    for (int ii = 0; ii < nb; ++ii) {
      const int i = bfaces[ii];
      const auto pi = projection_vector(npc, i);
      const double area_i = pc.geom.face_areas[i];
      const double tau_i = pc.taus[i];
      const int unk_i = lay.face_unknown[mesh.cell_faces[e][i]];

      for (int jj = 0; jj < nb; ++jj) {
        const int j = bfaces[jj];
        double proj = 0.0;
        for (int l = 0; l < npc; ++l) proj += pi.p[l] * w[jj][l];
        double nn = 0.0;
        for (int d = 0; d < 3; ++d) nn += pc.geom.normals[i][d] * pc.geom.normals[j][d];
        const double value = area_i * (tau_i * pc.taus[j] * proj -
                                       nu * inv_vol * pc.geom.face_areas[j] * nn -
                                       (i == j ? tau_i : 0.0));
        const int unk_j = lay.face_unknown[mesh.cell_faces[e][j]];
        for (int d = 0; d < dim; ++d)
          *slot++ = Triplet{lay.trace_index(dim, unk_i, d), lay.trace_index(dim, unk_j, d), value};
      }

      // velocity-pressure coupling |G_i| n_i and its transpose
      for (int d = 0; d < dim; ++d) {
        const double value = area_i * pc.geom.normals[i][d];
        *slot++ = Triplet{lay.trace_index(dim, unk_i, d), lay.rho_index(e), value};
        *slot++ = Triplet{lay.rho_index(e), lay.trace_index(dim, unk_i, d), value};
      }

      const int gf = mesh.cell_faces[e][i];
      Vec3 t_i{0, 0, 0};
      if (mesh.face_tags[gf] == FaceTag::Neumann)
        t_i = face_average_vec(mesh, gf, problem.pseudo_traction);
      for (int d = 0; d < dim; ++d) {
        double pmb = 0.0;
        for (int l = 0; l < npc; ++l) pmb += pi.p[l] * pc.mib[d][l];
        double nz = 0.0;
        for (int a = 0; a < 3; ++a) nz += pc.geom.normals[i][a] * pc.z[a][d];
        *rhs_slot++ = {lay.trace_index(dim, unk_i, d),
                       area_i * (nu * inv_vol * nz - tau_i * pmb - t_i[d])};
      }
    }

    // f_rho = -sum_D |G_j| u_Dj . n_j
    for (int j = 0; j < npc; ++j) {
      const int gf = mesh.cell_faces[e][j];
      if (mesh.face_tags[gf] != FaceTag::Dirichlet) continue;
      Vec3 ud = face_average_vec(mesh, gf, problem.dirichlet_data);
      double un = 0.0;
      for (int d = 0; d < 3; ++d) un += ud[d] * pc.geom.normals[j][d];
      f_rho -= pc.geom.face_areas[j] * un;
    }
    *rhs_slot++ = {lay.rho_index(e), f_rho};
  });

  std::vector<double> rhs(lay.n_total, 0.0);
  for (const auto& [idx, val] : rhs_slots) rhs[idx] += val;

  if (lay.pure_dirichlet) {
    // Zero-mean pressure constraint: sum_e |dOmega_e| rho_e = 0.
    const int c = lay.n_total - 1;
    for (int e = 0; e < n_cells; ++e) {
      CellGeometry g = cell_geometry(mesh, e);
      double bdry = 0.0;
      for (int j = 0; j < npc; ++j) bdry += g.face_areas[j];
      triplets.push_back({c, lay.rho_index(e), bdry});
      triplets.push_back({lay.rho_index(e), c, bdry});
    }
  }

  SparseSystem sys = assemble(triplets, lay.n_total);
  sys.rhs = std::move(rhs);
  if (face_unknown_out) *face_unknown_out = std::move(lay.face_unknown);
  if (n_trace_unknowns) *n_trace_unknowns = lay.n_trace;
  return sys;
}

StokesSolution solve(const StokesProblem& problem, Variant variant, SolveMethod method,
                     double tol, Exec exec, StokesTimings* timings) {
  const auto& mesh = *problem.mesh;
  const int dim = mesh.dim;
  const int npc = mesh.nodes_per_cell();
  const int nfn = mesh.nodes_per_face();
  const double sqrt_nu = std::sqrt(problem.viscosity);

  auto t0 = std::chrono::steady_clock::now();
  StokesSolution sol;
  int n_trace = 0;
  SparseSystem sys = assemble_global(problem, variant, &sol.face_unknown, &n_trace, exec);
  if (timings) timings->assembly_seconds = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  std::vector<double> x = fcfv::solve(sys, method, tol);
  if (timings) timings->solve_seconds = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  sol.trace.assign(x.begin(), x.begin() + n_trace);
  sol.rho.assign(x.begin() + n_trace, x.begin() + n_trace + mesh.n_cells());
  sol.p = sol.rho;  // p_e = rho_e by construction
  sol.u.assign(mesh.n_cells(), {});
  sol.L.assign(mesh.n_cells(), Mat3{});

  for_each_index(mesh.n_cells(), exec, [&](int e) {
    StokesLocalPrecomp pc = local_precompute(problem, e, variant);
    const double inv_vol = 1.0 / pc.geom.volume;

    Mat3 L{};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) L[a][b] = -inv_vol * sqrt_nu * pc.z[a][b];
    auto rhs_u = pc.b;

    for (int j = 0; j < npc; ++j) {
      const int unk = sol.face_unknown[mesh.cell_faces[e][j]];
      if (unk < 0) continue;
      const double area = pc.geom.face_areas[j];
      Vec3 uhat{0, 0, 0};
      for (int d = 0; d < dim; ++d) uhat[d] = sol.trace[dim * unk + d];
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          L[a][b] -= inv_vol * sqrt_nu * area * pc.geom.normals[j][a] * uhat[b];
      for (int c = 0; c < dim; ++c)
        for (int l = 0; l < npc; ++l)
          if (l != j) rhs_u[c][l] += pc.taus[j] * (area / nfn) * uhat[c];
    }
    for (int c = 0; c < dim; ++c) matvec(pc.m_inv, rhs_u[c].data(), sol.u[e][c].data());
    sol.L[e] = L;
  });
  if (timings) timings->recovery_seconds = seconds_since(t0);
  return sol;
}

StokesErrors l2_errors(const SimplicialMesh& mesh, double viscosity,
                       const StokesSolution& solution, const Vec3Field& exact_u,
                       const Mat3Field& exact_grad,
                       const std::function<double(const Vec3&)>& exact_p) {
  const auto& rule = mesh.dim == 2 ? tri_dunavant6() : tet_keast11();
  const int npc = mesh.nodes_per_cell();
  const double sqrt_nu = std::sqrt(viscosity);

  double num_u = 0, den_u = 0, num_l = 0, den_l = 0, num_p = 0, den_p = 0;
  for (int e = 0; e < mesh.n_cells(); ++e) {
    CellGeometry g = cell_geometry(mesh, e);
    for (const auto& qp : rule) {
      Vec3 x{0, 0, 0};
      Vec3 uh{0, 0, 0};
      for (int l = 0; l < npc; ++l) {
        for (int d = 0; d < 3; ++d) x[d] += qp.bary[l] * mesh.vertices[mesh.cells[e][l]][d];
        for (int c = 0; c < mesh.dim; ++c) uh[c] += qp.bary[l] * solution.u[e][c][l];
      }
      const double wv = qp.weight * g.volume;
      Vec3 ue = exact_u(x);
      Mat3 grad = exact_grad(x);
      for (int c = 0; c < mesh.dim; ++c) {
        num_u += wv * (ue[c] - uh[c]) * (ue[c] - uh[c]);
        den_u += wv * ue[c] * ue[c];
      }
      for (int a = 0; a < mesh.dim; ++a)
        for (int b = 0; b < mesh.dim; ++b) {
          const double le = -sqrt_nu * grad[a][b];
          num_l += wv * (le - solution.L[e][a][b]) * (le - solution.L[e][a][b]);
          den_l += wv * le * le;
        }
      const double pe = exact_p(x);
      num_p += wv * (pe - solution.p[e]) * (pe - solution.p[e]);
      den_p += wv * pe * pe;
    }
  }
  StokesErrors err;
  if (den_u < 1e-300 || den_l < 1e-300 || den_p < 1e-300) {
    err.absolute = true;
    err.u = std::sqrt(num_u);
    err.L = std::sqrt(num_l);
    err.p = std::sqrt(num_p);
  } else {
    err.u = std::sqrt(num_u / den_u);
    err.L = std::sqrt(num_l / den_l);
    err.p = std::sqrt(num_p / den_p);
  }
  return err;
}

double max_incompressibility_residual(const StokesProblem& problem,
                                      const StokesSolution& solution) {
  const auto& mesh = *problem.mesh;
  double worst = 0.0;
  for (int e = 0; e < mesh.n_cells(); ++e) {
    CellGeometry g = cell_geometry(mesh, e);
    double net = 0.0;
    for (int j = 0; j < mesh.nodes_per_cell(); ++j) {
      const int gf = mesh.cell_faces[e][j];
      Vec3 u{0, 0, 0};
      if (mesh.face_tags[gf] == FaceTag::Dirichlet) {
        u = face_average_vec(mesh, gf, problem.dirichlet_data);
      } else {
        const int unk = solution.face_unknown[gf];
        for (int d = 0; d < mesh.dim; ++d) u[d] = solution.trace[mesh.dim * unk + d];
      }
      double un = 0.0;
      for (int d = 0; d < 3; ++d) un += u[d] * g.normals[j][d];
      net += g.face_areas[j] * un;
    }
    worst = std::max(worst, std::abs(net));
  }
  return worst;
}

void write_solution_csv(const SimplicialMesh& mesh, const StokesSolution& solution,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << std::setprecision(17);
  out << "kind,id,values\n";
  for (int e = 0; e < mesh.n_cells(); ++e) {
    out << "cell," << e;
    for (int c = 0; c < mesh.dim; ++c)
      for (int l = 0; l < mesh.nodes_per_cell(); ++l) out << ',' << solution.u[e][c][l];
    for (int a = 0; a < mesh.dim; ++a)
      for (int b = 0; b < mesh.dim; ++b) out << ',' << solution.L[e][a][b];
    out << ',' << solution.p[e] << '\n';
  }
  for (int f = 0; f < mesh.n_faces(); ++f) {
    const int unk = solution.face_unknown[f];
    if (unk < 0) continue;
    out << "face," << f;
    for (int d = 0; d < mesh.dim; ++d) out << ',' << solution.trace[mesh.dim * unk + d];
    out << '\n';
  }
}

}  // namespace fcfv
