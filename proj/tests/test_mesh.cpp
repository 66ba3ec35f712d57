#include <stdexcept>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "doctest.h"
#include "fcfv/mesh.hpp"

using namespace fcfv;

namespace {

SimplicialMesh two_triangles() {
  SimplicialMesh m;
  m.dim = 2;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  m.cells = {{0, 1, 2, -1}, {1, 3, 2, -1}};
  build_connectivity(m);
  return m;
}

int local_face_of(const SimplicialMesh& m, int e, int f) {
  for (int j = 0; j <= m.dim; ++j)
    if (m.cell_faces[e][j] == f) return j;
  return -1;
}

template <typename Fn>
std::string thrown_message(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& ex) {
    return ex.what();
  }
  return "";
}

}  // namespace

TEST_CASE("structured generation counts") {
  SimplicialMesh m1 = generate_structured(2, 1);
  CHECK(m1.n_cells() == 2);
  CHECK(m1.n_faces() == 5);
  CHECK(m1.n_boundary_faces() == 4);

  CHECK(generate_structured(2, 4).n_cells() == 32);
  CHECK(generate_structured(3, 2).n_cells() == 48);

  CHECK_THROWS_AS(generate_structured(2, 0), std::invalid_argument);
}

TEST_CASE("connectivity") {
  SimplicialMesh m = two_triangles();
  int interior = 0;
  for (int f = 0; f < m.n_faces(); ++f)
    if (!m.is_boundary_face(f)) ++interior;
  CHECK(interior == 1);
  CHECK(m.n_boundary_faces() == 4);

  SimplicialMesh tet;
  tet.dim = 3;
  tet.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  tet.cells = {{0, 1, 2, 3}};
  build_connectivity(tet);
  CHECK(tet.n_faces() == 4);
  CHECK(tet.n_boundary_faces() == 4);

  SimplicialMesh n4 = generate_structured(2, 4);
  int interior4 = 0;
  for (int f = 0; f < n4.n_faces(); ++f)
    if (!n4.is_boundary_face(f)) ++interior4;
  CHECK(interior4 == 40);

  // Three triangles sharing one edge cannot be manifold in the plane.
  SimplicialMesh bad;
  bad.dim = 2;
  bad.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {1, 1, 0}};
  bad.cells = {{0, 1, 2, -1}, {0, 3, 1, -1}, {0, 1, 4, -1}};
  CHECK_THROWS_WITH_AS(build_connectivity(bad),
                       doctest::Contains("non-manifold"), std::runtime_error);
}

TEST_CASE("cell geometry") {
  SimplicialMesh m;
  m.dim = 2;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.cells = {{0, 1, 2, -1}};
  build_connectivity(m);
  CellGeometry g = cell_geometry(m, 0);
  CHECK(g.volume == doctest::Approx(0.5).epsilon(1e-14));
  std::multiset<double> lengths;
  for (int j = 0; j < 3; ++j) lengths.insert(g.face_areas[j]);
  auto it = lengths.begin();
  CHECK(*it++ == doctest::Approx(1.0));
  CHECK(*it++ == doctest::Approx(1.0));
  CHECK(*it == doctest::Approx(std::sqrt(2.0)));
  CHECK(g.h == doctest::Approx(std::sqrt(2.0)));
  for (int d = 0; d < 2; ++d) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += g.face_areas[j] * g.normals[j][d];
    CHECK(std::abs(s) < 1e-12);
  }

  SimplicialMesh tet;
  tet.dim = 3;
  tet.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  tet.cells = {{0, 1, 2, 3}};
  build_connectivity(tet);
  CHECK(cell_geometry(tet, 0).volume == doctest::Approx(1.0 / 6.0).epsilon(1e-14));

  SimplicialMesh degen;
  degen.dim = 2;
  degen.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  degen.cells = {{0, 1, 2, -1}};
  build_connectivity(degen);
  CHECK(thrown_message([&] { cell_geometry(degen, 0); }).find("0") != std::string::npos);
  CHECK_THROWS_AS(cell_geometry(degen, 0), std::runtime_error);
}

TEST_CASE("geometric invariants across generators") {
  for (const SimplicialMesh& m :
       {generate_structured(2, 6), generate_structured(3, 2),
        distort(generate_structured(2, 6), 0.3, 42), generate_stretched(2, 6, 10.0)}) {
    double total = 0.0;
    for (int e = 0; e < m.n_cells(); ++e) {
      CellGeometry g = cell_geometry(m, e);
      CHECK(g.volume > 0.0);
      total += g.volume;
      for (int d = 0; d < 3; ++d) {
        double s = 0.0;
        for (int j = 0; j <= m.dim; ++j) s += g.face_areas[j] * g.normals[j][d];
        CHECK(std::abs(s) < 1e-12);
      }
      for (int j = 0; j <= m.dim; ++j) {
        double n2 = 0.0;
        for (int d = 0; d < 3; ++d) n2 += g.normals[j][d] * g.normals[j][d];
        CHECK(std::abs(n2 - 1.0) < 1e-12);
      }
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

    // The two sides of an interior face must see opposite unit normals.
    for (int f = 0; f < m.n_faces(); ++f) {
      if (m.is_boundary_face(f)) continue;
      const int a = m.face_cells[f][0], b = m.face_cells[f][1];
      CellGeometry ga = cell_geometry(m, a), gb = cell_geometry(m, b);
      const int ja = local_face_of(m, a, f), jb = local_face_of(m, b, f);
      for (int d = 0; d < 3; ++d)
        CHECK(std::abs(ga.normals[ja][d] + gb.normals[jb][d]) < 1e-12);
    }
  }
}

TEST_CASE("distortion") {
  SimplicialMesh base = generate_structured(2, 8);
  SimplicialMesh same = distort(base, 0.0, 7);
  CHECK(same.vertices == base.vertices);

  SimplicialMesh d = distort(base, 0.3, 42);
  CHECK(d.n_cells() == base.n_cells());
  CHECK(d.n_faces() == base.n_faces());
  CHECK(d.cells == base.cells);
  CHECK(d.faces == base.faces);
  for (int e = 0; e < d.n_cells(); ++e) CHECK(cell_geometry(d, e).volume > 0.0);

  // Boundary vertices stay put; only interior ones move.
  bool moved = false;
  for (int v = 0; v < base.n_vertices(); ++v) {
    const auto& p = base.vertices[v];
    const bool boundary = p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
    if (boundary)
      CHECK(d.vertices[v] == p);
    else if (d.vertices[v] != p)
      moved = true;
  }
  CHECK(moved);

  CHECK(distort(base, 0.3, 42).vertices == d.vertices);  // seeded determinism
  CHECK_THROWS_AS(distort(base, 0.6, 1), std::invalid_argument);
}

TEST_CASE("stretching") {
  SimplicialMesh uniform = generate_stretched(2, 4, 1.0);
  CHECK(uniform.vertices == generate_structured(2, 4).vertices);
  CHECK(stretching_factor(generate_structured(2, 4)) == doctest::Approx(std::sqrt(2.0)));

  for (double s : {10.0, 1000.0}) {
    SimplicialMesh m = generate_stretched(2, 8, s);
    const double measured = stretching_factor(m);
    CHECK(measured > 0.9 * s);
    CHECK(measured < 1.1 * s);
  }
  CHECK_THROWS_AS(generate_stretched(2, 4, 0.5), std::invalid_argument);
}

TEST_CASE("refinement by size map") {
  SimplicialMesh base = generate_structured(2, 2);
  const double h0 = max_cell_size(base);

  SimplicialMesh unchanged = refine_by_sizemap(base, [&](const Vec3&) { return h0; });
  CHECK(unchanged.n_cells() == base.n_cells());
  CHECK(unchanged.vertices == base.vertices);

  SimplicialMesh halved = refine_by_sizemap(base, [&](const Vec3&) { return h0 / 2.0; });
  CHECK(halved.n_cells() > base.n_cells());
  CHECK(max_cell_size(halved) <= 0.75 * h0);
  double total = 0.0;
  for (int e = 0; e < halved.n_cells(); ++e) total += cell_geometry(halved, e).volume;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

  // Focused size map refines locally: cells near the focus point end up
  // smaller on average than cells away from it.
  SimplicialMesh coarse = generate_structured(2, 4);
  SimplicialMesh focused = refine_by_sizemap(coarse, [&](const Vec3& x) {
    const double r2 = (x[0] - 0.7) * (x[0] - 0.7) + (x[1] - 0.7) * (x[1] - 0.7);
    return r2 < 0.04 ? h0 / 8.0 : h0;
  });
  CHECK(focused.n_cells() > coarse.n_cells());
  double near_area = 0.0, far_area = 0.0;
  int near = 0, far = 0;
  for (int e = 0; e < focused.n_cells(); ++e) {
    CellGeometry g = cell_geometry(focused, e);
    const double r2 = (g.centroid[0] - 0.7) * (g.centroid[0] - 0.7) +
                      (g.centroid[1] - 0.7) * (g.centroid[1] - 0.7);
    (r2 < 0.04 ? near_area : far_area) += g.volume;
    (r2 < 0.04 ? near : far) += 1;
  }
  REQUIRE(near > 0);
  REQUIRE(far > 0);
  CHECK(near_area / near < 0.5 * far_area / far);
}

TEST_CASE("mesh file round trip") {
  SimplicialMesh m = with_boundary_tags(generate_structured(2, 2),
                                        [](const Vec3& x) { return x[0] == 1.0; });
  const std::string path = "roundtrip_2d.mesh";
  write_mesh(m, path);
  SimplicialMesh r = read_mesh(path);
  CHECK(r.dim == m.dim);
  CHECK(r.vertices == m.vertices);
  CHECK(r.cells == m.cells);
  CHECK(r.faces == m.faces);
  CHECK(r.face_tags == m.face_tags);
  std::remove(path.c_str());

  SimplicialMesh m3 = generate_structured(3, 2);
  write_mesh(m3, "roundtrip_3d.mesh");
  SimplicialMesh r3 = read_mesh("roundtrip_3d.mesh");
  CHECK(r3.cells == m3.cells);
  CHECK(r3.face_tags == m3.face_tags);
  std::remove("roundtrip_3d.mesh");
}

TEST_CASE("mesh file errors") {
  {
    std::ofstream out("bad_tag.mesh");
    out << "fcfv-mesh 2 3 1 1\n0 0\n1 0\n0 1\n0 1 2\n0 1 robin\n";
  }
  std::string msg = thrown_message([] { read_mesh("bad_tag.mesh"); });
  CHECK(msg.find("robin") != std::string::npos);
  std::remove("bad_tag.mesh");

  {
    std::ofstream out("bad_index.mesh");
    out << "fcfv-mesh 2 3 1 1\n0 0\n1 0\n0 1\n0 1 5\n0 1 dirichlet\n";
  }
  msg = thrown_message([] { read_mesh("bad_index.mesh"); });
  CHECK(msg.find(":5:") != std::string::npos);  // the offending line number
  CHECK(msg.find("out of range") != std::string::npos);
  std::remove("bad_index.mesh");

  {
    std::ofstream out("bad_header.mesh");
    out << "not-a-mesh 2 3 1 1\n";
  }
  CHECK_THROWS_AS(read_mesh("bad_header.mesh"), std::runtime_error);
  std::remove("bad_header.mesh");
}
