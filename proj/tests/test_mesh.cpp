#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <sstream>

#include "lrpde/mesh.hpp"

using namespace lrpde;

namespace {

// Conformity: two distinct triangles share nothing, a vertex, or a full edge.
// Equivalent check: every edge is shared by at most two triangles, and any
// vertex of a triangle that lies on another triangle's edge is one of its
// endpoints. For our generators it suffices to verify that each interior edge
// appears exactly twice and boundary edges once, plus positive areas.
void check_mesh_invariants(const Mesh2D& mesh, double domain_area) {
  double area = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    REQUIRE(mesh.signed_area(t) > 0.0);
    area += mesh.signed_area(t);
  }
  REQUIRE_THAT(area, Catch::Matchers::WithinRel(domain_area, 1e-12));

  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tri : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e], b = tri[(e + 1) % 3];
      edge_count[{std::min(a, b), std::max(a, b)}] += 1;
    }
  for (const auto& [edge, count] : edge_count) REQUIRE(count <= 2);

  // A boundary edge (count 1) must connect two Dirichlet vertices.
  for (const auto& [edge, count] : edge_count)
    if (count == 1) {
      REQUIRE(mesh.is_dirichlet_vertex[edge.first]);
      REQUIRE(mesh.is_dirichlet_vertex[edge.second]);
    }
}

// No triangle straddles an interface: all three vertices lie in the closure
// of the labeled subdomain. For checkerboards the subdomain closures are
// axis-aligned boxes.
void check_checkerboard_alignment(const Mesh2D& mesh, int m, double x0) {
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const int sub = mesh.subdomain_of_triangle[t] - 1;
    const int sx = sub % m, sy = sub / m;
    const double lx = x0 + static_cast<double>(sx) / m, hx = x0 + static_cast<double>(sx + 1) / m;
    const double ly = x0 + static_cast<double>(sy) / m, hy = x0 + static_cast<double>(sy + 1) / m;
    for (int k = 0; k < 3; ++k) {
      const Vec2 p = mesh.vertices[mesh.triangles[t][k]];
      REQUIRE(p.x >= lx - 1e-14);
      REQUIRE(p.x <= hx + 1e-14);
      REQUIRE(p.y >= ly - 1e-14);
      REQUIRE(p.y <= hy + 1e-14);
    }
  }
}

int count_skeleton(const Mesh2D& mesh) {
  int n = 0;
  for (char f : mesh.is_skeleton_vertex) n += f;
  return n;
}

}  // namespace

TEST_CASE("coarse 2x2 checkerboard is symmetric by construction") {
  const Mesh2D mesh = build_mesh(GeometrySpec::checkerboard(2, 0, 0.0));
  check_mesh_invariants(mesh, 1.0);
  check_checkerboard_alignment(mesh, 2, -0.5);
  REQUIRE(mesh.num_subdomains == 4);
  REQUIRE(check_reflection_symmetry(mesh).symmetric);
  // Each quadrant triangulated identically up to reflection: equal triangle
  // counts per subdomain.
  std::array<int, 4> per_subdomain{};
  for (int s : mesh.subdomain_of_triangle) per_subdomain[s - 1] += 1;
  for (int i = 1; i < 4; ++i) REQUIRE(per_subdomain[i] == per_subdomain[0]);
}

TEST_CASE("2x2 checkerboard symmetry across refinements and gradings") {
  for (int refine : {0, 1, 3}) {
    for (double grading : {0.0, 1.0, 2.5}) {
      const Mesh2D mesh = build_mesh(GeometrySpec::checkerboard(2, refine, grading));
      check_mesh_invariants(mesh, 1.0);
      check_checkerboard_alignment(mesh, 2, -0.5);
      const SymmetryReport rep = check_reflection_symmetry(mesh);
      INFO("refine=" << refine << " grading=" << grading << ": " << rep.message);
      REQUIRE(rep.symmetric);
    }
  }
}

TEST_CASE("grading clusters vertex layers geometrically towards the skeleton") {
  const double s = 2.0;
  const Mesh2D mesh = build_mesh(GeometrySpec::checkerboard(2, 2, s));
  // Collect positive x-coordinates of vertices on the horizontal skeleton line.
  std::set<double> xs;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    if (mesh.vertices[v].y == 0.0 && mesh.vertices[v].x > 0.0) xs.insert(mesh.vertices[v].x);
  std::vector<double> x(xs.begin(), xs.end());
  REQUIRE(x.size() >= 3);
  // Successive distances from the skeleton shrink by the factor q = 2^-s.
  const double q = std::pow(2.0, -s);
  for (std::size_t j = 0; j + 1 < x.size(); ++j)
    REQUIRE_THAT(x[j] / x[j + 1], Catch::Matchers::WithinRel(q, 1e-12));
}

TEST_CASE("larger 2x2 mesh reaches the triangle and skeleton scale of the experiments") {
  const Mesh2D mesh = build_mesh(GeometrySpec::checkerboard(2, 6, 2.0));
  REQUIRE(mesh.num_triangles() >= 100000);
  REQUIRE(count_skeleton(mesh) >= 500);
  REQUIRE(check_reflection_symmetry(mesh).symmetric);
}

TEST_CASE("refinement increases the skeleton vertex count monotonically") {
  int previous = 0;
  for (int refine : {0, 1, 2, 3, 4}) {
    const Mesh2D mesh = build_mesh(GeometrySpec::checkerboard(2, refine, 1.0));
    const int n = count_skeleton(mesh);
    REQUIRE(n > previous);
    previous = n;
  }
}

TEST_CASE("4x4 checkerboard on the unit square") {
  const Mesh2D mesh = build_mesh(GeometrySpec::checkerboard(4, 1, 1.0));
  check_mesh_invariants(mesh, 1.0);
  check_checkerboard_alignment(mesh, 4, 0.0);
  REQUIRE(mesh.num_subdomains == 16);
  // Vertices on every interior gridline are flagged as skeleton.
  int on_lines = 0;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2 p = mesh.vertices[v];
    const bool on_x = p.x == 0.25 || p.x == 0.5 || p.x == 0.75;
    const bool on_y = p.y == 0.25 || p.y == 0.5 || p.y == 0.75;
    if ((on_x || on_y) && !mesh.is_dirichlet_vertex[v]) {
      REQUIRE(mesh.is_skeleton_vertex[v]);
      ++on_lines;
    }
  }
  REQUIRE(on_lines == count_skeleton(mesh));
}

TEST_CASE("distorted partition meshes conform but are not symmetric") {
  const Mesh2D mesh = build_mesh(GeometrySpec::distorted(2, 1.0));
  check_mesh_invariants(mesh, 1.0);
  REQUIRE(mesh.num_subdomains == 4);
  const SymmetryReport rep = check_reflection_symmetry(mesh);
  REQUIRE_FALSE(rep.symmetric);
  REQUIRE_FALSE(rep.violating_vertices.empty());
}

TEST_CASE("degenerate distorted specs are rejected") {
  REQUIRE_THROWS_AS(build_mesh(GeometrySpec::distorted(1, 0.0, Vec2{0.6, 0.0})),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(build_mesh(GeometrySpec::distorted(1, 0.0, Vec2{0.5, 0.0})),
                    std::invalid_argument);
  GeometrySpec bad = GeometrySpec::distorted(1, 0.0);
  bad.edge_points[0] = Vec2{0.5, -0.5};  // corner, not strictly inside the side
  REQUIRE_THROWS_AS(build_mesh(bad), std::invalid_argument);
}

TEST_CASE("perturbing one vertex breaks symmetry and is reported") {
  Mesh2D mesh = build_mesh(GeometrySpec::checkerboard(2, 1, 0.0));
  REQUIRE(check_reflection_symmetry(mesh).symmetric);
  int victim = -1;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec2 p = mesh.vertices[v];
    if (!mesh.is_dirichlet_vertex[v] && !mesh.is_skeleton_vertex[v] && p.x > 0 && p.y > 0) {
      victim = v;
      break;
    }
  }
  REQUIRE(victim >= 0);
  mesh.vertices[victim].x += 1e-6;
  const SymmetryReport rep = check_reflection_symmetry(mesh);
  REQUIRE_FALSE(rep.symmetric);
  REQUIRE(std::count(rep.violating_vertices.begin(), rep.violating_vertices.end(), victim) > 0);
}

TEST_CASE("interval meshes") {
  SECTION("d=1, two cells") {
    const IntervalMesh m = build_interval_mesh(1, 2);
    REQUIRE(m.nodes == std::vector<double>{0.0, 0.5, 1.0});
  }
  SECTION("d=4, eight cells per subinterval") {
    const IntervalMesh m = build_interval_mesh(4, 8);
    REQUIRE(m.num_nodes() == 33);
    std::set<double> nodes(m.nodes.begin(), m.nodes.end());
    REQUIRE(nodes.count(0.25) == 1);
    REQUIRE(nodes.count(0.5) == 1);
    REQUIRE(nodes.count(0.75) == 1);
    for (int v = 0; v < m.num_nodes(); ++v) {
      const bool boundary = m.nodes[v] == 0.25 || m.nodes[v] == 0.5 || m.nodes[v] == 0.75;
      REQUIRE(bool(m.is_skeleton_node[v]) == boundary);
    }
  }
}

TEST_CASE("mesh export round-trips") {
  const Mesh2D mesh = build_mesh(GeometrySpec::checkerboard(2, 1, 1.5));
  std::stringstream buffer;
  write_mesh(mesh, buffer);
  const Mesh2D reloaded = read_mesh(buffer);
  REQUIRE(reloaded.num_vertices() == mesh.num_vertices());
  REQUIRE(reloaded.num_triangles() == mesh.num_triangles());
  REQUIRE(reloaded.num_subdomains == mesh.num_subdomains);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    REQUIRE(reloaded.vertices[v] == mesh.vertices[v]);
    REQUIRE(reloaded.is_dirichlet_vertex[v] == mesh.is_dirichlet_vertex[v]);
    REQUIRE(reloaded.is_skeleton_vertex[v] == mesh.is_skeleton_vertex[v]);
  }
  REQUIRE(reloaded.triangles == mesh.triangles);
  REQUIRE(reloaded.subdomain_of_triangle == mesh.subdomain_of_triangle);
}
