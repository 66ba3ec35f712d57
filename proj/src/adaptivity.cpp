#include "fcfv/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include "fcfv/quadrature.hpp"

namespace fcfv {

namespace {

const std::vector<QuadPoint>& degree2_rule(int dim) {
  return dim == 2 ? tri_midpoint3() : tet_4pt();
}

// Piecewise-constant field over a mesh, queried at arbitrary points via a
// background bin grid over cell centroids.
class SizeMap {
 public:
  SizeMap(const SimplicialMesh& mesh, std::vector<double> values)
      : dim_(mesh.dim), values_(std::move(values)) {
    centroids_.reserve(mesh.n_cells());
    lo_ = {1e300, 1e300, 1e300};
    hi_ = {-1e300, -1e300, -1e300};
    for (int e = 0; e < mesh.n_cells(); ++e) {
      Vec3 c{0, 0, 0};
      for (int l = 0; l < mesh.nodes_per_cell(); ++l)
        for (int d = 0; d < 3; ++d)
          c[d] += mesh.vertices[mesh.cells[e][l]][d] / mesh.nodes_per_cell();
      centroids_.push_back(c);
      for (int d = 0; d < 3; ++d) {
        lo_[d] = std::min(lo_[d], c[d]);
        hi_[d] = std::max(hi_[d], c[d]);
      }
    }
    grid_n_ = std::max(1, static_cast<int>(std::pow(static_cast<double>(mesh.n_cells()), 1.0 / dim_)));
    bins_.assign(static_cast<std::size_t>(std::pow(grid_n_, dim_)), {});
    for (int e = 0; e < mesh.n_cells(); ++e) bins_[bin_of(centroids_[e])].push_back(e);
  }

  double operator()(const Vec3& x) const {
    // Nearest centroid, searched in growing rings of bins.
    int best = -1;
    double best_d2 = std::numeric_limits<double>::max();
    std::array<int, 3> b = bin_coords(x);
    for (int ring = 0; ring < grid_n_; ++ring) {
      scan_ring(b, ring, x, best, best_d2);
      if (best >= 0 && ring >= 1) break;
    }
    if (best < 0) {  // tiny meshes
      for (int e = 0; e < static_cast<int>(centroids_.size()); ++e) consider(e, x, best, best_d2);
    }
    return values_[best];
  }

 private:
  void consider(int e, const Vec3& x, int& best, double& best_d2) const {
    double d2 = 0.0;
    for (int d = 0; d < dim_; ++d) d2 += (x[d] - centroids_[e][d]) * (x[d] - centroids_[e][d]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = e;
    }
  }

  std::array<int, 3> bin_coords(const Vec3& x) const {
    std::array<int, 3> b{0, 0, 0};
    for (int d = 0; d < dim_; ++d) {
      double t = (hi_[d] > lo_[d]) ? (x[d] - lo_[d]) / (hi_[d] - lo_[d]) : 0.0;
      b[d] = std::clamp(static_cast<int>(t * grid_n_), 0, grid_n_ - 1);
    }
    return b;
  }

  std::size_t bin_of(const Vec3& x) const {
    auto b = bin_coords(x);
    std::size_t idx = 0;
    for (int d = dim_ - 1; d >= 0; --d) idx = idx * grid_n_ + b[d];
    return idx;
  }

  void scan_ring(const std::array<int, 3>& c, int ring, const Vec3& x, int& best,
                 double& best_d2) const {
    const int zlo = dim_ == 3 ? -ring : 0, zhi = dim_ == 3 ? ring : 0;
    for (int dz = zlo; dz <= zhi; ++dz)
      for (int dy = -ring; dy <= ring; ++dy)
        for (int dx = -ring; dx <= ring; ++dx) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
          std::array<int, 3> b{c[0] + dx, c[1] + dy, c[2] + dz};
          bool ok = true;
          for (int d = 0; d < dim_; ++d)
            if (b[d] < 0 || b[d] >= grid_n_) ok = false;
          if (!ok) continue;
          std::size_t idx = 0;
          for (int d = dim_ - 1; d >= 0; --d) idx = idx * grid_n_ + b[d];
          for (int e : bins_[idx]) consider(e, x, best, best_d2);
        }
  }

  int dim_;
  std::vector<double> values_;
  std::vector<Vec3> centroids_;
  Vec3 lo_{}, hi_{};
  int grid_n_ = 1;
  std::vector<std::vector<int>> bins_;
};

}  // namespace

IndicatorField indicator(const SimplicialMesh& mesh, const PoissonSolution& second,
                         const PoissonSolution& first) {
  if (second.u.size() != first.u.size() ||
      static_cast<int>(second.u.size()) != mesh.n_cells())
    throw std::invalid_argument("indicator: solutions live on different meshes");
  const auto& rule = degree2_rule(mesh.dim);
  const int npc = mesh.nodes_per_cell();

  IndicatorField field;
  field.E.resize(mesh.n_cells());
  field.h.resize(mesh.n_cells());
  for (int e = 0; e < mesh.n_cells(); ++e) {
    CellGeometry g = cell_geometry(mesh, e);
    double acc = 0.0;
    for (const auto& qp : rule) {
      double diff = 0.0;
      for (int l = 0; l < npc; ++l) diff += qp.bary[l] * (first.u[e][l] - second.u[e][l]);
      acc += qp.weight * diff * diff;  // weights already normalised by |Omega|
    }
    field.E[e] = std::sqrt(acc);
    field.h[e] = g.h;
    field.max_E = std::max(field.max_E, field.E[e]);
  }
  return field;
}

IndicatorField indicator(const SimplicialMesh& mesh, const StokesSolution& second,
                         const StokesSolution& first) {
  if (second.u.size() != first.u.size() ||
      static_cast<int>(second.u.size()) != mesh.n_cells())
    throw std::invalid_argument("indicator: solutions live on different meshes");
  const auto& rule = degree2_rule(mesh.dim);
  const int npc = mesh.nodes_per_cell();

  IndicatorField field;
  field.E.resize(mesh.n_cells());
  field.h.resize(mesh.n_cells());
  for (int e = 0; e < mesh.n_cells(); ++e) {
    CellGeometry g = cell_geometry(mesh, e);
    double acc = 0.0;
    for (const auto& qp : rule) {
      for (int c = 0; c < mesh.dim; ++c) {
        double diff = 0.0;
        for (int l = 0; l < npc; ++l) diff += qp.bary[l] * (first.u[e][c][l] - second.u[e][c][l]);
        acc += qp.weight * diff * diff;
      }
    }
    field.E[e] = std::sqrt(acc);
    field.h[e] = g.h;
    field.max_E = std::max(field.max_E, field.E[e]);
  }
  return field;
}

void target_sizes(IndicatorField& field, int dim, double epsilon, ExponentMode mode) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const double expo =
      mode == ExponentMode::Aggressive ? 2.0 + dim / 2.0 : 1.0 / (1.0 + dim / 2.0);
  field.h_star.resize(field.E.size());
  for (std::size_t e = 0; e < field.E.size(); ++e) {
    const double h = field.h[e];
    double hs;
    if (field.E[e] <= 0.0) {
      hs = 2.0 * h;  // growth cap for cells the indicator thinks are exact
    } else {
      hs = h * std::pow(epsilon / field.E[e], expo);
    }
    field.h_star[e] = std::clamp(hs, h / 4.0, 2.0 * h);
  }
}

AdaptResult adapt_loop(const ProblemSpec& spec, const SimplicialMesh& base_mesh, double epsilon,
                       int max_iters, ExponentMode mode, SolveMethod method, double tau) {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (spec.equation != Equation::Poisson)
    throw std::invalid_argument("adapt_loop drives Poisson problems only");

  AdaptResult result;
  result.mesh = spec.tag_mesh(base_mesh);
  const auto& rule = result.mesh.dim == 2 ? tri_dunavant6() : tet_keast11();

  for (int iter = 0; iter < max_iters; ++iter) {
    PoissonProblem problem = spec.make_poisson(result.mesh);
    if (tau > 0.0) problem.tau = tau;
    PoissonSolution second = solve(problem, Variant::SecondOrder, method);
    PoissonSolution first = solve(problem, Variant::FirstOrder, method);
    IndicatorField field = indicator(result.mesh, second, first);

    AdaptIteration rec;
    rec.n_cells = result.mesh.n_cells();
    rec.max_indicator = field.max_E;

    const int npc = result.mesh.nodes_per_cell();
    double num = 0.0, den = 0.0;
    for (int e = 0; e < result.mesh.n_cells(); ++e) {
      CellGeometry g = cell_geometry(result.mesh, e);
      double acc = 0.0, acc_exact = 0.0;
      for (const auto& qp : rule) {
        Vec3 x{0, 0, 0};
        double uh = 0.0;
        for (int l = 0; l < npc; ++l) {
          for (int d = 0; d < 3; ++d)
            x[d] += qp.bary[l] * result.mesh.vertices[result.mesh.cells[e][l]][d];
          uh += qp.bary[l] * second.u[e][l];
        }
        const double ue = spec.exact_u(x);
        acc += qp.weight * (ue - uh) * (ue - uh);
        acc_exact += qp.weight * ue * ue;
      }
      rec.max_exact = std::max(rec.max_exact, std::sqrt(acc));
      num += acc * g.volume;
      den += acc_exact * g.volume;
    }
    rec.efficiency = rec.max_indicator > 0.0 ? rec.max_exact / rec.max_indicator : 0.0;
    rec.global_rel_error = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    result.history.push_back(rec);
    result.solution = std::move(second);

    if (field.max_E <= epsilon) {
      result.converged = true;
      break;
    }
    if (iter + 1 == max_iters) break;

    target_sizes(field, result.mesh.dim, epsilon, mode);
    SizeMap size_map(result.mesh, field.h_star);
    SimplicialMesh refined = refine_by_sizemap(
        base_mesh, [&](const Vec3& x) { return size_map(x); }, 24);
    result.mesh = spec.tag_mesh(refined);
  }
  return result;
}

void write_history_csv(const std::vector<AdaptIteration>& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << std::setprecision(12);
  out << "iteration,n_cells,max_indicator,exact_error,efficiency\n";
  for (std::size_t i = 0; i < history.size(); ++i)
    out << i << ',' << history[i].n_cells << ',' << history[i].max_indicator << ','
        << history[i].max_exact << ',' << history[i].efficiency << '\n';
}

}  // namespace fcfv
