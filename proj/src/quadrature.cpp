#include "fcfv/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace fcfv {

const std::vector<QuadPoint>& edge_gauss3() {
  static const std::vector<QuadPoint> rule = [] {
    const double g = std::sqrt(3.0 / 5.0);
    std::vector<QuadPoint> r;
    for (auto [x, w] : {std::pair{-g, 5.0 / 18.0}, {0.0, 8.0 / 18.0}, {g, 5.0 / 18.0}})
      r.push_back({{0.5 * (1.0 - x), 0.5 * (1.0 + x), 0.0, 0.0}, w});
    return r;
  }();
  return rule;
}

const std::vector<QuadPoint>& tri_midpoint3() {
  static const std::vector<QuadPoint> rule = {
      {{0.5, 0.5, 0.0, 0.0}, 1.0 / 3.0},
      {{0.5, 0.0, 0.5, 0.0}, 1.0 / 3.0},
      {{0.0, 0.5, 0.5, 0.0}, 1.0 / 3.0},
  };
  return rule;
}

const std::vector<QuadPoint>& tri_4pt() {
  static const std::vector<QuadPoint> rule = {
      {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0}, -27.0 / 48.0},
      {{0.6, 0.2, 0.2, 0.0}, 25.0 / 48.0},
      {{0.2, 0.6, 0.2, 0.0}, 25.0 / 48.0},
      {{0.2, 0.2, 0.6, 0.0}, 25.0 / 48.0},
  };
  return rule;
}

const std::vector<QuadPoint>& tri_dunavant6() {
  static const std::vector<QuadPoint> rule = [] {
    std::vector<QuadPoint> r;
    const double b1 = 0.445948490915965, w1 = 0.223381589678011;
    const double b2 = 0.091576213509771, w2 = 0.109951743655322;
    for (auto [b, w] : {std::pair{b1, w1}, {b2, w2}}) {
      const double a = 1.0 - 2.0 * b;
      r.push_back({{a, b, b, 0.0}, w});
      r.push_back({{b, a, b, 0.0}, w});
      r.push_back({{b, b, a, 0.0}, w});
    }
    return r;
  }();
  return rule;
}

const std::vector<QuadPoint>& tet_4pt() {
  static const std::vector<QuadPoint> rule = [] {
    const double a = 0.585410196624969, b = 0.138196601125011;
    std::vector<QuadPoint> r;
    for (int i = 0; i < 4; ++i) {
      QuadPoint q{{b, b, b, b}, 0.25};
      q.bary[i] = a;
      r.push_back(q);
    }
    return r;
  }();
  return rule;
}

const std::vector<QuadPoint>& tet_keast11() {
  static const std::vector<QuadPoint> rule = [] {
    std::vector<QuadPoint> r;
    r.push_back({{0.25, 0.25, 0.25, 0.25}, -148.0 / 1875.0});
    const double a = 11.0 / 14.0, b = 1.0 / 14.0, w2 = 343.0 / 7500.0;
    for (int i = 0; i < 4; ++i) {
      QuadPoint q{{b, b, b, b}, w2};
      q.bary[i] = a;
      r.push_back(q);
    }
    const double c = 0.25 * (1.0 + std::sqrt(5.0 / 14.0));
    const double d = 0.25 * (1.0 - std::sqrt(5.0 / 14.0));
    const double w3 = 56.0 / 375.0;
    const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (const auto& p : pairs) {
      QuadPoint q{{d, d, d, d}, w3};
      q.bary[p[0]] = c;
      q.bary[p[1]] = c;
      r.push_back(q);
    }
    return r;
  }();
  return rule;
}

double integrate_simplex(const std::vector<QuadPoint>& rule, const Vec3* verts, int n,
                         double measure, const std::function<double(const Vec3&)>& fn) {
  double sum = 0.0;
  for (const auto& q : rule) {
    Vec3 x{0, 0, 0};
    for (int l = 0; l < n; ++l)
      for (int d = 0; d < 3; ++d) x[d] += q.bary[l] * verts[l][d];
    sum += q.weight * fn(x);
  }
  return sum * measure;
}

double face_average(const SimplicialMesh& mesh, int f,
                    const std::function<double(const Vec3&)>& fn) {
  const int npf = mesh.nodes_per_face();
  Vec3 verts[3];
  for (int l = 0; l < npf; ++l) verts[l] = mesh.vertices[mesh.faces[f][l]];
  const auto& rule = mesh.dim == 2 ? edge_gauss3() : tri_4pt();
  return integrate_simplex(rule, verts, npf, 1.0, fn);
}

}  // namespace fcfv
