#pragma once
//
// Conforming triangular meshes for partitioned 2D domains: m x m checkerboards
// and distorted four-quadrilateral partitions, with geometric grading of the
// vertex layers towards the partition skeleton. Also 1D interval meshes.
//
// Subdomain interfaces are never crossed by triangles, and 2x2 checkerboard
// meshes are exactly invariant under both coordinate reflections (they are
// built by meshing one quadrant and reflecting it).
//

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lrpde {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline bool operator==(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }

/// Triangulation of the physical domain with subdomain labels and
/// boundary/skeleton vertex markers.
struct Mesh2D {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> subdomain_of_triangle;  // ids in 1..d
  std::vector<char> is_dirichlet_vertex;   // on the outer boundary
  std::vector<char> is_skeleton_vertex;    // on the skeleton, excluding the outer boundary
  int num_subdomains = 0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  double signed_area(int t) const {
    const Vec2& a = vertices[triangles[t][0]];
    const Vec2& b = vertices[triangles[t][1]];
    const Vec2& c = vertices[triangles[t][2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  }
  double triangle_area(int t) const { return signed_area(t); }
  double total_area() const {
    double s = 0.0;
    for (int t = 0; t < num_triangles(); ++t) s += signed_area(t);
    return s;
  }
};

struct GeometrySpec {
  enum class Kind { checkerboard, distorted_quad };

  Kind kind = Kind::checkerboard;
  int m = 2;  // checkerboard subdivisions per axis, d = m*m
  // Distorted-quad data: interior point and the four edge points on the
  // boundary of ]-1/2,1/2[^2, ordered bottom, right, top, left.
  Vec2 interior_point{0.1, -0.08};
  std::array<Vec2, 4> edge_points{{{0.1, -0.5}, {0.5, -0.08}, {0.1, 0.5}, {-0.5, -0.08}}};
  int refinement_level = 0;
  double grading_strength = 0.0;

  static GeometrySpec checkerboard(int m, int refine = 0, double grading = 0.0) {
    GeometrySpec s;
    s.kind = Kind::checkerboard;
    s.m = m;
    s.refinement_level = refine;
    s.grading_strength = grading;
    return s;
  }

  static GeometrySpec distorted(int refine = 0, double grading = 0.0,
                                Vec2 interior = {0.1, -0.08}) {
    GeometrySpec s;
    s.kind = Kind::distorted_quad;
    s.refinement_level = refine;
    s.grading_strength = grading;
    s.interior_point = interior;
    // Edge points offset from the side midpoints by the same amounts as the
    // interior point is offset from the center.
    s.edge_points = {{{interior.x, -0.5}, {0.5, interior.y}, {interior.x, 0.5}, {-0.5, interior.y}}};
    return s;
  }

  int num_subdomains() const { return kind == Kind::checkerboard ? m * m : 4; }
};

namespace detail {

// Breakpoints of [0,L] with n cells, clustered geometrically towards the ends
// flagged for grading. Layer j sits at distance ~ L*q^j from the graded end,
// q = 2^{-strength}.
inline std::vector<double> graded_points(double L, int n, double strength, bool grade_left,
                                         bool grade_right) {
  std::vector<double> pts(static_cast<std::size_t>(n) + 1);
  const bool uniform = strength <= 0.0 || (!grade_left && !grade_right) || n == 1;
  if (uniform) {
    for (int j = 0; j <= n; ++j) pts[j] = L * static_cast<double>(j) / n;
  } else if (grade_left && grade_right) {
    if (n % 2 != 0) throw std::invalid_argument("graded_points: two-sided grading needs even n");
    const int h = n / 2;
    const double q = std::pow(2.0, -strength);
    pts[0] = 0.0;
    for (int j = 1; j <= h; ++j) pts[j] = 0.5 * L * std::pow(q, h - j);
    for (int j = 1; j <= h; ++j) pts[h + j] = L - pts[h - j];
    pts[n] = L;
  } else {
    const double q = std::pow(2.0, -strength);
    if (grade_left) {
      pts[0] = 0.0;
      for (int j = 1; j <= n; ++j) pts[j] = L * std::pow(q, n - j);
    } else {
      for (int j = 0; j < n; ++j) pts[j] = L - L * std::pow(q, j);
      pts[n] = L;
    }
  }
  pts[0] = 0.0;
  pts[n] = L;
  return pts;
}

inline int cells_per_subinterval(int refinement_level) {
  if (refinement_level < 0 || refinement_level > 9)
    throw std::invalid_argument("refinement_level out of supported range [0,9]");
  return 1 << (refinement_level + 1);
}

}  // namespace detail

Mesh2D build_mesh(const GeometrySpec& spec);

struct SymmetryReport {
  bool symmetric = false;
  std::vector<int> violating_vertices;
  std::string message;
};

SymmetryReport check_reflection_symmetry(const Mesh2D& mesh, double tol = 1e-12);

/// Uniform partition of ]0,1[ into d subintervals, each split into `cells`
/// elements; subinterval endpoints are mesh nodes.
struct IntervalMesh {
  int d = 0;
  std::vector<double> nodes;           // ascending, nodes.front()==0, nodes.back()==1
  std::vector<int> subdomain_of_cell;  // ids in 1..d
  std::vector<char> is_dirichlet_node; // the two endpoints
  std::vector<char> is_skeleton_node;  // interior subinterval boundaries

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_cells() const { return static_cast<int>(nodes.size()) - 1; }
};

inline IntervalMesh build_interval_mesh(int d, int cells_per_subinterval) {
  if (d < 1 || cells_per_subinterval < 1)
    throw std::invalid_argument("build_interval_mesh: d and cells must be >= 1");
  IntervalMesh m;
  m.d = d;
  const int n = d * cells_per_subinterval;
  m.nodes.resize(n + 1);
  for (int i = 1; i < d; ++i) {  // force exact subinterval boundaries
    m.nodes[i * cells_per_subinterval] = static_cast<double>(i) / d;
  }
  for (int s = 0; s < d; ++s) {
    const double a = static_cast<double>(s) / d;
    const double b = static_cast<double>(s + 1) / d;
    for (int j = 0; j < cells_per_subinterval; ++j) {
      const double t = static_cast<double>(j) / cells_per_subinterval;
      m.nodes[s * cells_per_subinterval + j] = a + (b - a) * t;
      m.subdomain_of_cell.push_back(s + 1);
    }
  }
  m.nodes[0] = 0.0;
  m.nodes[n] = 1.0;
  m.is_dirichlet_node.assign(n + 1, 0);
  m.is_dirichlet_node[0] = m.is_dirichlet_node[n] = 1;
  m.is_skeleton_node.assign(n + 1, 0);
  for (int i = 1; i < d; ++i) m.is_skeleton_node[i * cells_per_subinterval] = 1;
  return m;
}

// ---------------------------------------------------------------------------
// implementation
// ---------------------------------------------------------------------------

namespace detail {

struct MeshBuilder {
  Mesh2D mesh;
  std::map<std::pair<double, double>, int> vertex_id;

  int add_vertex(Vec2 p, bool dirichlet, bool skeleton) {
    auto key = std::make_pair(p.x, p.y);
    auto it = vertex_id.find(key);
    if (it != vertex_id.end()) return it->second;
    const int id = mesh.num_vertices();
    vertex_id.emplace(key, id);
    mesh.vertices.push_back(p);
    mesh.is_dirichlet_vertex.push_back(dirichlet ? 1 : 0);
    mesh.is_skeleton_vertex.push_back(skeleton && !dirichlet ? 1 : 0);
    return id;
  }

  void add_triangle(int a, int b, int c, int subdomain) {
    mesh.triangles.push_back({a, b, c});
    mesh.subdomain_of_triangle.push_back(subdomain);
  }

  void fix_orientation() {
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const double s = mesh.signed_area(t);
      if (s == 0.0) throw std::runtime_error("mesh builder produced a degenerate triangle");
      if (s < 0.0) std::swap(mesh.triangles[t][1], mesh.triangles[t][2]);
    }
  }
};

// 2x2 checkerboard on ]-1/2,1/2[^2: mesh the first quadrant and reflect,
// which makes both reflections exact symmetries of the vertex and triangle
// sets. Subdomains are numbered D1 bottom-left, D2 bottom-right, D3 top-left,
// D4 top-right.
inline Mesh2D build_checkerboard2(const GeometrySpec& spec) {
  const int n = cells_per_subinterval(spec.refinement_level);
  std::vector<double> q = graded_points(0.5, n, spec.grading_strength, /*left=*/true,
                                        /*right=*/false);
  const int stride = 2 * n + 1;
  auto axis = [&](int i) { return i >= 0 ? q[i] : -q[-i]; };  // grid index -n..n

  MeshBuilder b;
  b.mesh.num_subdomains = 4;
  std::vector<int> id(static_cast<std::size_t>(stride) * stride, -1);
  auto vid = [&](int i, int j) -> int& { return id[(j + n) * stride + (i + n)]; };

  for (int j = -n; j <= n; ++j)
    for (int i = -n; i <= n; ++i) {
      const bool dirichlet = std::abs(i) == n || std::abs(j) == n;
      const bool skeleton = i == 0 || j == 0;
      vid(i, j) = b.add_vertex({axis(i), axis(j)}, dirichlet, skeleton);
    }

  // Triangles of the (+,+) quadrant and their reflected images. Reflections
  // reverse orientation, so reflected triangles are emitted with two vertices
  // swapped. Subdomain labels: (+,+)=4, (-,+)=3, (+,-)=2, (-,-)=1.
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      b.add_triangle(v00, v10, v11, 4);
      b.add_triangle(v00, v11, v01, 4);

      const int w00 = vid(-i, j), w10 = vid(-i - 1, j);
      const int w01 = vid(-i, j + 1), w11 = vid(-i - 1, j + 1);
      b.add_triangle(w00, w11, w10, 3);
      b.add_triangle(w00, w01, w11, 3);

      const int u00 = vid(i, -j), u10 = vid(i + 1, -j);
      const int u01 = vid(i, -j - 1), u11 = vid(i + 1, -j - 1);
      b.add_triangle(u00, u11, u10, 2);
      b.add_triangle(u00, u01, u11, 2);

      const int z00 = vid(-i, -j), z10 = vid(-i - 1, -j);
      const int z01 = vid(-i, -j - 1), z11 = vid(-i - 1, -j - 1);
      b.add_triangle(z00, z10, z11, 1);
      b.add_triangle(z00, z11, z01, 1);
    }

  b.fix_orientation();
  return std::move(b.mesh);
}

// m x m checkerboard on ]0,1[^2 with squares of side 1/m. Graded towards the
// interior gridlines from both sides of every interior subinterval boundary.
inline Mesh2D build_checkerboard_m(const GeometrySpec& spec) {
  const int m = spec.m;
  const int n = cells_per_subinterval(spec.refinement_level);

  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(m) * n + 1);
  for (int s = 0; s < m; ++s) {
    const double a = static_cast<double>(s) / m;
    const double bnd = static_cast<double>(s + 1) / m;
    std::vector<double> local = graded_points(bnd - a, n, spec.grading_strength,
                                              /*left=*/s > 0, /*right=*/s < m - 1);
    for (int j = (s == 0 ? 0 : 1); j <= n; ++j) xs.push_back(a + local[j]);
    xs.back() = bnd;  // keep subinterval boundaries exact
  }
  const int N = static_cast<int>(xs.size()) - 1;  // = m*n

  MeshBuilder b;
  b.mesh.num_subdomains = m * m;
  std::vector<int> id(static_cast<std::size_t>(N + 1) * (N + 1));
  auto vid = [&](int i, int j) -> int& { return id[j * (N + 1) + i]; };

  for (int j = 0; j <= N; ++j)
    for (int i = 0; i <= N; ++i) {
      const bool dirichlet = i == 0 || j == 0 || i == N || j == N;
      const bool skel_x = (i % n == 0) && i > 0 && i < N;
      const bool skel_y = (j % n == 0) && j > 0 && j < N;
      vid(i, j) = b.add_vertex({xs[i], xs[j]}, dirichlet, skel_x || skel_y);
    }

  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      const int sub = 1 + (i / n) + m * (j / n);
      b.add_triangle(vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), sub);
      b.add_triangle(vid(i, j), vid(i + 1, j + 1), vid(i, j + 1), sub);
    }

  b.fix_orientation();
  return std::move(b.mesh);
}

// Four quadrilaterals on ]-1/2,1/2[^2 cut out by the interior point and the
// four edge points. Each quad is meshed by a bilinear map of a reference grid
// whose (0,0) corner sits at the interior point, so that the two skeleton
// sides carry the graded point distribution. Shared skeleton edges use
// bitwise-identical vertex coordinates, which keeps the mesh conforming.
inline Mesh2D build_distorted(const GeometrySpec& spec) {
  const Vec2 P = spec.interior_point;
  const Vec2 Eb = spec.edge_points[0], Er = spec.edge_points[1];
  const Vec2 Et = spec.edge_points[2], El = spec.edge_points[3];

  if (!(std::abs(P.x) < 0.5 && std::abs(P.y) < 0.5))
    throw std::invalid_argument("distorted_quad: interior point must lie strictly inside D");
  auto on_side = [](const Vec2& p, bool horizontal, double coord) {
    return horizontal ? (p.y == coord && std::abs(p.x) < 0.5)
                      : (p.x == coord && std::abs(p.y) < 0.5);
  };
  if (!on_side(Eb, true, -0.5) || !on_side(Et, true, 0.5) || !on_side(Er, false, 0.5) ||
      !on_side(El, false, -0.5))
    throw std::invalid_argument("distorted_quad: edge points must lie strictly inside the sides");

  const Vec2 Cbl{-0.5, -0.5}, Cbr{0.5, -0.5}, Ctl{-0.5, 0.5}, Ctr{0.5, 0.5};
  // Corner order (0,0),(1,0),(1,1),(0,1); the (0,0)-incident edges are on the
  // skeleton. All four lists are counterclockwise.
  struct Quad {
    std::array<Vec2, 4> c;
    int subdomain;
  };
  const std::array<Quad, 4> quads = {{{{P, El, Cbl, Eb}, 1},
                                      {{P, Eb, Cbr, Er}, 2},
                                      {{P, Et, Ctl, El}, 3},
                                      {{P, Er, Ctr, Et}, 4}}};
  for (const Quad& q : quads) {
    for (int e = 0; e < 4; ++e) {
      const Vec2& a = q.c[e];
      const Vec2& bb = q.c[(e + 1) % 4];
      const Vec2& c = q.c[(e + 2) % 4];
      const double cross = (bb.x - a.x) * (c.y - bb.y) - (bb.y - a.y) * (c.x - bb.x);
      if (cross <= 1e-12)
        throw std::invalid_argument("distorted_quad: degenerate or non-convex quadrilateral");
    }
  }

  const int n = cells_per_subinterval(spec.refinement_level);
  std::vector<double> t = graded_points(1.0, n, spec.grading_strength, /*left=*/true,
                                        /*right=*/false);

  MeshBuilder b;
  b.mesh.num_subdomains = 4;
  for (const Quad& q : quads) {
    std::vector<int> id(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        const double xi = t[i], eta = t[j];
        const double w00 = (1.0 - xi) * (1.0 - eta), w10 = xi * (1.0 - eta);
        const double w11 = xi * eta, w01 = (1.0 - xi) * eta;
        // Term order matters: shared-edge coordinates must come out
        // bit-identical from both adjacent quads.
        Vec2 p{q.c[0].x * w00 + q.c[1].x * w10 + q.c[3].x * w01 + q.c[2].x * w11,
               q.c[0].y * w00 + q.c[1].y * w10 + q.c[3].y * w01 + q.c[2].y * w11};
        const bool dirichlet = xi == 1.0 || eta == 1.0;
        const bool skeleton = xi == 0.0 || eta == 0.0;
        id[j * (n + 1) + i] = b.add_vertex(p, dirichlet, skeleton);
      }
    auto vid = [&](int i, int j) { return id[j * (n + 1) + i]; };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        b.add_triangle(vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), q.subdomain);
        b.add_triangle(vid(i, j), vid(i + 1, j + 1), vid(i, j + 1), q.subdomain);
      }
  }

  b.fix_orientation();
  return std::move(b.mesh);
}

}  // namespace detail

inline Mesh2D build_mesh(const GeometrySpec& spec) {
  Mesh2D mesh;
  if (spec.kind == GeometrySpec::Kind::checkerboard) {
    if (spec.m < 2) throw std::invalid_argument("checkerboard: m must be >= 2");
    mesh = (spec.m == 2) ? detail::build_checkerboard2(spec) : detail::build_checkerboard_m(spec);
  } else {
    mesh = detail::build_distorted(spec);
  }
  int interior = 0;
  for (char f : mesh.is_dirichlet_vertex) interior += (f == 0);
  if (interior == 0) throw std::invalid_argument("build_mesh: no interior vertices at this refinement");
  return mesh;
}

inline SymmetryReport check_reflection_symmetry(const Mesh2D& mesh, double tol) {
  SymmetryReport report;
  report.symmetric = true;

  // Vertex lookup by coordinates, tolerant in both components.
  std::map<std::pair<double, double>, int> index;
  for (int v = 0; v < mesh.num_vertices(); ++v)
    index.emplace(std::make_pair(mesh.vertices[v].x, mesh.vertices[v].y), v);
  auto find_vertex = [&](double x, double y) -> int {
    auto it = index.lower_bound(std::make_pair(x - tol, y));
    for (; it != index.end() && it->first.first <= x + tol; ++it)
      if (std::abs(it->first.second - y) <= tol) return it->second;
    return -1;
  };

  std::ostringstream msg;
  std::set<int> bad;
  std::array<std::vector<int>, 2> vmap;  // images under x- and y-reflection
  for (int r = 0; r < 2; ++r) {
    vmap[r].assign(mesh.num_vertices(), -1);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      const Vec2 p = mesh.vertices[v];
      const int w = (r == 0) ? find_vertex(-p.x, p.y) : find_vertex(p.x, -p.y);
      if (w < 0) {
        bad.insert(v);
        continue;
      }
      vmap[r][v] = w;
    }
  }
  if (!bad.empty()) {
    report.symmetric = false;
    report.violating_vertices.assign(bad.begin(), bad.end());
    msg << report.violating_vertices.size() << " vertices have no reflected partner; first: ";
    const Vec2 p = mesh.vertices[report.violating_vertices.front()];
    msg << "#" << report.violating_vertices.front() << " at (" << p.x << ", " << p.y << ")";
    report.message = msg.str();
    return report;
  }

  // Triangle sets must map onto themselves with a consistent relabeling of
  // subdomains.
  std::map<std::array<int, 3>, int> tri_subdomain;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    std::array<int, 3> k = mesh.triangles[t];
    std::sort(k.begin(), k.end());
    tri_subdomain[k] = mesh.subdomain_of_triangle[t];
  }
  for (int r = 0; r < 2 && report.symmetric; ++r) {
    std::map<int, int> label_map;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      std::array<int, 3> k;
      for (int i = 0; i < 3; ++i) k[i] = vmap[r][mesh.triangles[t][i]];
      std::sort(k.begin(), k.end());
      auto it = tri_subdomain.find(k);
      if (it == tri_subdomain.end()) {
        report.symmetric = false;
        for (int i = 0; i < 3; ++i) bad.insert(mesh.triangles[t][i]);
        msg << "triangle #" << t << " has no image under reflection " << (r == 0 ? "x" : "y");
        break;
      }
      auto [lm, inserted] = label_map.emplace(mesh.subdomain_of_triangle[t], it->second);
      if (!inserted && lm->second != it->second) {
        report.symmetric = false;
        msg << "inconsistent subdomain relabeling under reflection " << (r == 0 ? "x" : "y");
        break;
      }
    }
  }
  report.violating_vertices.assign(bad.begin(), bad.end());
  report.message = report.symmetric ? "symmetric" : msg.str();
  return report;
}

// Plain-text mesh format: line 1 "NV NT d", then NV vertex lines
// "x y dirichlet_flag skeleton_flag", then NT triangle lines
// "v0 v1 v2 subdomain_id".
inline void write_mesh(const Mesh2D& mesh, std::ostream& out) {
  out.precision(17);
  out << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.num_subdomains << '\n';
  for (int v = 0; v < mesh.num_vertices(); ++v)
    out << mesh.vertices[v].x << ' ' << mesh.vertices[v].y << ' '
        << int(mesh.is_dirichlet_vertex[v]) << ' ' << int(mesh.is_skeleton_vertex[v]) << '\n';
  for (int t = 0; t < mesh.num_triangles(); ++t)
    out << mesh.triangles[t][0] << ' ' << mesh.triangles[t][1] << ' ' << mesh.triangles[t][2]
        << ' ' << mesh.subdomain_of_triangle[t] << '\n';
}

inline Mesh2D read_mesh(std::istream& in) {
  Mesh2D mesh;
  int nv = 0, nt = 0;
  if (!(in >> nv >> nt >> mesh.num_subdomains)) throw std::runtime_error("read_mesh: bad header");
  mesh.vertices.resize(nv);
  mesh.is_dirichlet_vertex.resize(nv);
  mesh.is_skeleton_vertex.resize(nv);
  for (int v = 0; v < nv; ++v) {
    int dir = 0, skel = 0;
    if (!(in >> mesh.vertices[v].x >> mesh.vertices[v].y >> dir >> skel))
      throw std::runtime_error("read_mesh: bad vertex line");
    mesh.is_dirichlet_vertex[v] = static_cast<char>(dir);
    mesh.is_skeleton_vertex[v] = static_cast<char>(skel);
  }
  mesh.triangles.resize(nt);
  mesh.subdomain_of_triangle.resize(nt);
  for (int t = 0; t < nt; ++t) {
    if (!(in >> mesh.triangles[t][0] >> mesh.triangles[t][1] >> mesh.triangles[t][2] >>
          mesh.subdomain_of_triangle[t]))
      throw std::runtime_error("read_mesh: bad triangle line");
  }
  return mesh;
}

}  // namespace lrpde
