#include "fcfv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace fcfv {

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

double signed_measure(const SimplicialMesh& mesh, const std::array<int, 4>& cell) {
  const auto& v = mesh.vertices;
  if (mesh.dim == 2) {
    Vec3 a = sub(v[cell[1]], v[cell[0]]);
    Vec3 b = sub(v[cell[2]], v[cell[0]]);
    return 0.5 * (a[0] * b[1] - a[1] * b[0]);
  }
  Vec3 a = sub(v[cell[1]], v[cell[0]]);
  Vec3 b = sub(v[cell[2]], v[cell[0]]);
  Vec3 c = sub(v[cell[3]], v[cell[0]]);
  return dot(a, cross(b, c)) / 6.0;
}

}  // namespace

int SimplicialMesh::n_boundary_faces() const {
  int n = 0;
  for (int f = 0; f < n_faces(); ++f)
    if (is_boundary_face(f)) ++n;
  return n;
}

void build_connectivity(SimplicialMesh& mesh) {
  const int npc = mesh.nodes_per_cell();
  const int npf = mesh.nodes_per_face();
  for (const auto& cell : mesh.cells)
    for (int l = 0; l < npc; ++l)
      if (cell[l] < 0 || cell[l] >= mesh.n_vertices())
        throw std::runtime_error("cell references invalid vertex " + std::to_string(cell[l]));

  // Collect unique faces keyed by sorted vertex tuple.
  std::map<std::array<int, 3>, std::array<int, 2>> face_map;  // key -> adjacent cells
  for (int e = 0; e < mesh.n_cells(); ++e) {
    for (int j = 0; j < npc; ++j) {
      std::array<int, 3> key{-1, -1, -1};
      int k = 0;
      for (int l = 0; l < npc; ++l)
        if (l != j) key[k++] = mesh.cells[e][l];
      std::sort(key.begin(), key.begin() + npf);
      auto [it, inserted] = face_map.try_emplace(key, std::array<int, 2>{e, -1});
      if (!inserted) {
        if (it->second[1] >= 0)
          throw std::runtime_error("non-manifold mesh: face shared by more than 2 cells");
        it->second[1] = e;
      }
    }
  }

  mesh.faces.clear();
  mesh.face_cells.clear();
  std::map<std::array<int, 3>, int> face_ids;
  // std::map iterates keys lexicographically, giving deterministic numbering.
  for (const auto& [key, cells] : face_map) {
    face_ids[key] = mesh.n_faces();
    mesh.faces.push_back(key);
    mesh.face_cells.push_back(cells);
  }

  mesh.cell_faces.assign(mesh.n_cells(), {-1, -1, -1, -1});
  for (int e = 0; e < mesh.n_cells(); ++e) {
    for (int j = 0; j < npc; ++j) {
      std::array<int, 3> key{-1, -1, -1};
      int k = 0;
      for (int l = 0; l < npc; ++l)
        if (l != j) key[k++] = mesh.cells[e][l];
      std::sort(key.begin(), key.begin() + npf);
      mesh.cell_faces[e][j] = face_ids.at(key);
    }
  }

  mesh.face_tags.assign(mesh.n_faces(), FaceTag::Interior);
  for (int f = 0; f < mesh.n_faces(); ++f)
    if (mesh.is_boundary_face(f)) mesh.face_tags[f] = FaceTag::Dirichlet;
}

SimplicialMesh generate_tensor(int dim, const std::vector<std::vector<double>>& coords) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  if (static_cast<int>(coords.size()) != dim)
    throw std::invalid_argument("need one coordinate array per axis");
  for (const auto& c : coords)
    if (c.size() < 2) throw std::invalid_argument("each axis needs at least 2 coordinates");

  SimplicialMesh mesh;
  mesh.dim = dim;
  const int nx = static_cast<int>(coords[0].size());
  const int ny = static_cast<int>(coords[1].size());
  const int nz = dim == 3 ? static_cast<int>(coords[2].size()) : 1;

  auto vid = [&](int i, int j, int k) { return (k * ny + j) * nx + i; };
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        mesh.vertices.push_back({coords[0][i], coords[1][j], dim == 3 ? coords[2][k] : 0.0});

  if (dim == 2) {
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i + 1 < nx; ++i) {
        int v00 = vid(i, j, 0), v10 = vid(i + 1, j, 0);
        int v01 = vid(i, j + 1, 0), v11 = vid(i + 1, j + 1, 0);
        mesh.cells.push_back({v00, v10, v11, -1});
        mesh.cells.push_back({v00, v11, v01, -1});
      }
  } else {
    // Kuhn subdivision: one tetrahedron per axis-step permutation.
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int k = 0; k + 1 < nz; ++k)
      for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i)
          for (const auto& p : perms) {
            std::array<int, 3> idx{i, j, k};
            std::array<int, 4> cell;
            cell[0] = vid(idx[0], idx[1], idx[2]);
            for (int step = 0; step < 3; ++step) {
              idx[p[step]] += 1;
              cell[step + 1] = vid(idx[0], idx[1], idx[2]);
            }
            if (signed_measure(mesh, cell) < 0.0) std::swap(cell[2], cell[3]);
            mesh.cells.push_back(cell);
          }
  }

  for (const auto& cell : mesh.cells)
    if (signed_measure(mesh, cell) <= 0.0)
      throw std::runtime_error("generated cell with non-positive measure");

  build_connectivity(mesh);
  return mesh;
}

SimplicialMesh generate_structured(int dim, int n_per_side, const Box& box) {
  if (n_per_side < 1) throw std::invalid_argument("n_per_side must be >= 1");
  std::vector<std::vector<double>> coords(dim);
  for (int d = 0; d < dim; ++d)
    for (int i = 0; i <= n_per_side; ++i)
      coords[d].push_back(box.lo[d] + (box.hi[d] - box.lo[d]) * i / n_per_side);
  return generate_tensor(dim, coords);
}

CellGeometry cell_geometry(const SimplicialMesh& mesh, int e) {
  if (e < 0 || e >= mesh.n_cells()) throw std::invalid_argument("invalid cell index");
  const auto& cell = mesh.cells[e];
  const auto& v = mesh.vertices;
  const int npc = mesh.nodes_per_cell();

  CellGeometry g;
  g.volume = signed_measure(mesh, cell);
  if (!(g.volume > 1e-300))
    throw std::runtime_error("degenerate cell " + std::to_string(e));

  g.centroid = {0, 0, 0};
  for (int l = 0; l < npc; ++l)
    for (int d = 0; d < 3; ++d) g.centroid[d] += v[cell[l]][d] / npc;

  g.h = 0.0;
  for (int a = 0; a < npc; ++a)
    for (int b = a + 1; b < npc; ++b)
      g.h = std::max(g.h, norm(sub(v[cell[a]], v[cell[b]])));

  for (int j = 0; j < npc; ++j) {
    // face j: the vertices other than local node j
    std::array<int, 3> fv{-1, -1, -1};
    int k = 0;
    for (int l = 0; l < npc; ++l)
      if (l != j) fv[k++] = cell[l];

    Vec3 n{};
    double area = 0.0;
    if (mesh.dim == 2) {
      Vec3 t = sub(v[fv[1]], v[fv[0]]);
      area = norm(t);
      n = {t[1] / area, -t[0] / area, 0.0};
    } else {
      Vec3 c = cross(sub(v[fv[1]], v[fv[0]]), sub(v[fv[2]], v[fv[0]]));
      area = 0.5 * norm(c);
      n = {c[0] / (2.0 * area), c[1] / (2.0 * area), c[2] / (2.0 * area)};
    }
    Vec3 mid{0, 0, 0};
    for (int l = 0; l < mesh.nodes_per_face(); ++l)
      for (int d = 0; d < 3; ++d) mid[d] += v[fv[l]][d] / mesh.nodes_per_face();
    if (dot(n, sub(mid, v[cell[j]])) < 0.0)
      for (int d = 0; d < 3; ++d) n[d] = -n[d];
    g.face_areas[j] = area;
    g.normals[j] = n;
  }
  return g;
}

SimplicialMesh with_boundary_tags(const SimplicialMesh& mesh, const NeumannPredicate& neumann) {
  SimplicialMesh out = mesh;
  for (int f = 0; f < out.n_faces(); ++f) {
    if (!out.is_boundary_face(f)) continue;
    Vec3 mid{0, 0, 0};
    for (int l = 0; l < out.nodes_per_face(); ++l)
      for (int d = 0; d < 3; ++d) mid[d] += out.vertices[out.faces[f][l]][d] / out.nodes_per_face();
    out.face_tags[f] = (neumann && neumann(mid)) ? FaceTag::Neumann : FaceTag::Dirichlet;
  }
  return out;
}

SimplicialMesh distort(const SimplicialMesh& mesh, double magnitude_fraction, std::uint64_t seed) {
  if (magnitude_fraction < 0.0 || magnitude_fraction >= 0.5)
    throw std::invalid_argument("magnitude_fraction must be in [0, 0.5)");
  if (magnitude_fraction == 0.0) return mesh;

  std::vector<bool> on_boundary(mesh.n_vertices(), false);
  for (int f = 0; f < mesh.n_faces(); ++f)
    if (mesh.is_boundary_face(f))
      for (int l = 0; l < mesh.nodes_per_face(); ++l) on_boundary[mesh.faces[f][l]] = true;

  std::vector<double> min_edge(mesh.n_vertices(), std::numeric_limits<double>::max());
  for (const auto& cell : mesh.cells)
    for (int a = 0; a < mesh.nodes_per_cell(); ++a)
      for (int b = a + 1; b < mesh.nodes_per_cell(); ++b) {
        double len = norm(sub(mesh.vertices[cell[a]], mesh.vertices[cell[b]]));
        min_edge[cell[a]] = std::min(min_edge[cell[a]], len);
        min_edge[cell[b]] = std::min(min_edge[cell[b]], len);
      }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vec3> displ(mesh.n_vertices(), Vec3{0, 0, 0});
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    Vec3 d{};
    do {
      for (int k = 0; k < mesh.dim; ++k) d[k] = unit(rng);
    } while (dot(d, d) > 1.0 || dot(d, d) == 0.0);
    if (!on_boundary[i])
      for (int k = 0; k < 3; ++k) displ[i][k] = d[k] * magnitude_fraction * min_edge[i];
  }

  double scale = 1.0;
  for (int attempt = 0; attempt < 6; ++attempt) {
    SimplicialMesh out = mesh;
    for (int i = 0; i < out.n_vertices(); ++i)
      for (int k = 0; k < 3; ++k) out.vertices[i][k] += scale * displ[i][k];
    bool ok = true;
    for (const auto& cell : out.cells)
      if (signed_measure(out, cell) <= 0.0) {
        ok = false;
        break;
      }
    if (ok) return out;
    scale *= 0.5;
  }
  throw std::runtime_error("distort: cell inversion persisted after 5 retries");
}

SimplicialMesh generate_stretched(int dim, int n_per_side, double s, const Box& box) {
  if (s < 1.0) throw std::invalid_argument("stretching factor must be >= 1");
  if (n_per_side < 1) throw std::invalid_argument("n_per_side must be >= 1");
  if (s == 1.0 || n_per_side == 1) return generate_structured(dim, n_per_side, box);

  std::vector<std::vector<double>> coords(dim);
  for (int d = 0; d < dim - 1; ++d)
    for (int i = 0; i <= n_per_side; ++i)
      coords[d].push_back(box.lo[d] + (box.hi[d] - box.lo[d]) * i / n_per_side);

  // Grade the last axis geometrically so the thinnest layer realises the
  // requested longest/shortest edge ratio exactly: for the bottom cell the
  // long edge is the in-plane diagonal d and the short edge the thickness t,
  // giving sqrt(d^2 + t^2)/t = s  =>  t = d / sqrt(s^2 - 1).
  const int last = dim - 1;
  const double extent = box.hi[last] - box.lo[last];
  double d2 = 0.0;
  for (int d = 0; d < dim - 1; ++d) {
    double step = (box.hi[d] - box.lo[d]) / n_per_side;
    d2 += step * step;
  }
  const double t_min = std::sqrt(d2) / std::sqrt(s * s - 1.0);
  if (t_min * n_per_side >= extent) return generate_structured(dim, n_per_side, box);

  // Find ratio r with t_min * (r^n - 1)/(r - 1) = extent by bisection.
  auto total = [&](double r) {
    double sum = 0.0, t = t_min;
    for (int i = 0; i < n_per_side; ++i, t *= r) sum += t;
    return sum;
  };
  double lo = 1.0, hi = 2.0;
  while (total(hi) < extent) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (total(mid) < extent ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);

  coords[last].push_back(box.lo[last]);
  double t = t_min;
  for (int i = 0; i < n_per_side; ++i, t *= r)
    coords[last].push_back(coords[last].back() + t);
  coords[last].back() = box.hi[last];  // absorb bisection round-off

  return generate_tensor(dim, coords);
}

double stretching_factor(const SimplicialMesh& mesh) {
  double s = 1.0;
  for (const auto& cell : mesh.cells) {
    double lmin = std::numeric_limits<double>::max(), lmax = 0.0;
    for (int a = 0; a < mesh.nodes_per_cell(); ++a)
      for (int b = a + 1; b < mesh.nodes_per_cell(); ++b) {
        double len = norm(sub(mesh.vertices[cell[a]], mesh.vertices[cell[b]]));
        lmin = std::min(lmin, len);
        lmax = std::max(lmax, len);
      }
    s = std::max(s, lmax / lmin);
  }
  return s;
}

double max_cell_size(const SimplicialMesh& mesh) {
  double h = 0.0;
  for (int e = 0; e < mesh.n_cells(); ++e) h = std::max(h, cell_geometry(mesh, e).h);
  return h;
}

namespace {

struct BisectionState {
  int dim;
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 4>> cells;
  std::vector<int> depth;  // bisection generation per cell
  std::map<std::pair<int, int>, int> midpoints;

  std::pair<int, int> edge_key(int a, int b) const { return {std::min(a, b), std::max(a, b)}; }

  int midpoint(int a, int b) {
    auto key = edge_key(a, b);
    auto it = midpoints.find(key);
    if (it != midpoints.end()) return it->second;
    Vec3 m;
    for (int d = 0; d < 3; ++d) m[d] = 0.5 * (vertices[a][d] + vertices[b][d]);
    vertices.push_back(m);
    int id = static_cast<int>(vertices.size()) - 1;
    midpoints[key] = id;
    return id;
  }

  // Longest edge of a cell; ties broken by the lexicographically smallest
  // sorted vertex pair so refinement is deterministic.
  std::pair<int, int> longest_edge(const std::array<int, 4>& cell) const {
    const int npc = dim + 1;
    double best = -1.0;
    std::pair<int, int> best_key{-1, -1};
    for (int a = 0; a < npc; ++a)
      for (int b = a + 1; b < npc; ++b) {
        Vec3 d = sub(vertices[cell[a]], vertices[cell[b]]);
        double len2 = dot(d, d);
        auto key = edge_key(cell[a], cell[b]);
        if (len2 > best + 1e-14 * best || (std::abs(len2 - best) <= 1e-14 * best && key < best_key)) {
          best = len2;
          best_key = key;
        }
      }
    return best_key;
  }

  void bisect(int e, std::vector<std::array<int, 4>>& out_cells, std::vector<int>& out_depth) {
    auto cell = cells[e];
    auto [a, b] = longest_edge(cell);
    int m = midpoint(a, b);
    std::array<int, 4> c1 = cell, c2 = cell;
    for (int l = 0; l < dim + 1; ++l) {
      if (c1[l] == b) c1[l] = m;
      if (c2[l] == a) c2[l] = m;
    }
    out_cells.push_back(c1);
    out_cells.push_back(c2);
    out_depth.push_back(depth[e] + 1);
    out_depth.push_back(depth[e] + 1);
  }
};

}  // namespace

SimplicialMesh refine_by_sizemap(const SimplicialMesh& base_mesh,
                                 const std::function<double(const Vec3&)>& size_at_point,
                                 int max_depth) {
  BisectionState st;
  st.dim = base_mesh.dim;
  st.vertices = base_mesh.vertices;
  for (const auto& c : base_mesh.cells) st.cells.push_back(c);
  st.depth.assign(st.cells.size(), 0);

  const int npc = base_mesh.dim + 1;
  // Outer loop: mark oversized cells, bisect with conformity closure,
  // repeat until nothing is oversized or the depth cap stops progress.
  for (int round = 0; round < 4 * max_depth; ++round) {
    std::set<std::pair<int, int>> marked;
    int n_oversized = 0;
    for (std::size_t e = 0; e < st.cells.size(); ++e) {
      Vec3 c{0, 0, 0};
      double h = 0.0;
      for (int l = 0; l < npc; ++l)
        for (int d = 0; d < 3; ++d) c[d] += st.vertices[st.cells[e][l]][d] / npc;
      for (int a = 0; a < npc; ++a)
        for (int b = a + 1; b < npc; ++b)
          h = std::max(h, norm(sub(st.vertices[st.cells[e][a]], st.vertices[st.cells[e][b]])));
      double target = size_at_point(c);
      if (!(target > 0.0)) throw std::runtime_error("size map must be positive");
      if (h > target && st.depth[e] < max_depth) {
        marked.insert(st.longest_edge(st.cells[e]));
        ++n_oversized;
      }
    }
    if (marked.empty()) break;

    // Conformity closure: a cell touching a marked edge gets its own
    // longest edge marked too (Rivara).
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t e = 0; e < st.cells.size(); ++e) {
        bool touches = false;
        for (int a = 0; a < npc && !touches; ++a)
          for (int b = a + 1; b < npc; ++b)
            if (marked.count(st.edge_key(st.cells[e][a], st.cells[e][b]))) {
              touches = true;
              break;
            }
        if (touches && marked.insert(st.longest_edge(st.cells[e])).second) grew = true;
      }
    }

    // Bisect every cell whose longest edge is marked; keep looping inside
    // the round until no cell still contains a marked edge (children can
    // inherit marks from the parent's other edges).
    for (int pass = 0; pass < 64; ++pass) {
      std::vector<std::array<int, 4>> next_cells;
      std::vector<int> next_depth;
      bool any = false;
      for (std::size_t e = 0; e < st.cells.size(); ++e) {
        bool split = marked.count(st.longest_edge(st.cells[e])) > 0;
        if (split) {
          st.bisect(static_cast<int>(e), next_cells, next_depth);
          any = true;
        } else {
          next_cells.push_back(st.cells[e]);
          next_depth.push_back(st.depth[e]);
        }
      }
      st.cells = std::move(next_cells);
      st.depth = std::move(next_depth);
      if (!any) break;
      // Drop marks on edges that no longer exist (they were split).
      std::set<std::pair<int, int>> still;
      for (const auto& cell : st.cells)
        for (int a = 0; a < npc; ++a)
          for (int b = a + 1; b < npc; ++b) {
            auto key = st.edge_key(cell[a], cell[b]);
            if (marked.count(key)) still.insert(key);
          }
      // Re-add closure for surviving marks.
      marked = std::move(still);
      if (marked.empty()) break;
      bool grew2 = true;
      while (grew2) {
        grew2 = false;
        for (std::size_t e = 0; e < st.cells.size(); ++e) {
          bool touches = false;
          for (int a = 0; a < npc && !touches; ++a)
            for (int b = a + 1; b < npc; ++b)
              if (marked.count(st.edge_key(st.cells[e][a], st.cells[e][b]))) {
                touches = true;
                break;
              }
          if (touches && marked.insert(st.longest_edge(st.cells[e])).second) grew2 = true;
        }
      }
    }
    (void)n_oversized;
  }

  SimplicialMesh out;
  out.dim = base_mesh.dim;
  out.vertices = std::move(st.vertices);
  out.cells = std::move(st.cells);
  for (auto& cell : out.cells)
    if (signed_measure(out, cell) < 0.0) std::swap(cell[1], cell[2]);
  build_connectivity(out);
  return out;
}

}  // namespace fcfv
