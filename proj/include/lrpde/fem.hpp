#pragma once
//
// P1 finite elements on Mesh2D / IntervalMesh: stiffness operators with
// piecewise-constant coefficients, load vectors for constant right-hand
// sides, Dirichlet elimination, and a sparse Cholesky factorization used both
// as a solver and as the factor of the energy metric.
//
// All quadrature is exact for the assembled integrands, so the discrete
// linearity and additivity identities hold to rounding accuracy.
//

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <stdexcept>
#include <vector>

#include "lrpde/mesh.hpp"

namespace lrpde {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Symmetric sparse operator; only the upper triangle is stored, so symmetry
/// holds exactly by representation.
struct SparseSymOperator {
  int dim = 0;
  SparseMatrix upper;           // column-major, entries with row <= col
  bool maybe_indefinite = false;  // set when assembled from a sign-changing weight

  Vector apply(const Vector& x) const { return upper.selfadjointView<Eigen::Upper>() * x; }
  Matrix apply(const Matrix& x) const { return upper.selfadjointView<Eigen::Upper>() * x; }

  double entry(int i, int j) const {
    if (i > j) std::swap(i, j);
    return upper.coeff(i, j);
  }

  SparseMatrix full() const {
    SparseMatrix a = SparseMatrix(upper.selfadjointView<Eigen::Upper>());
    return a;
  }

  SparseSymOperator scaled(double s) const {
    SparseSymOperator r = *this;
    r.upper *= s;
    return r;
  }
};

/// Free-DOF numbering after eliminating Dirichlet vertices, with the skeleton
/// and per-subdomain interior index sets.
struct DofMap {
  std::vector<int> free_index_of_vertex;  // -1 = eliminated
  std::vector<int> vertex_of_free;
  std::vector<int> skeleton_dofs;
  std::vector<std::vector<int>> interior_dofs_of_subdomain;  // indexed by subdomain-1
  int n_free = 0;
};

inline DofMap make_dof_map(const Mesh2D& mesh) {
  DofMap dof;
  const int nv = mesh.num_vertices();
  dof.free_index_of_vertex.assign(nv, -1);
  for (int v = 0; v < nv; ++v) {
    if (!mesh.is_dirichlet_vertex[v]) {
      dof.free_index_of_vertex[v] = dof.n_free++;
      dof.vertex_of_free.push_back(v);
    }
  }
  // Subdomain of each non-skeleton vertex, from any incident triangle.
  std::vector<int> vertex_subdomain(nv, 0);
  for (int t = 0; t < mesh.num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) vertex_subdomain[mesh.triangles[t][k]] = mesh.subdomain_of_triangle[t];

  dof.interior_dofs_of_subdomain.assign(mesh.num_subdomains, {});
  for (int v = 0; v < nv; ++v) {
    const int i = dof.free_index_of_vertex[v];
    if (i < 0) continue;
    if (mesh.is_skeleton_vertex[v])
      dof.skeleton_dofs.push_back(i);
    else
      dof.interior_dofs_of_subdomain[vertex_subdomain[v] - 1].push_back(i);
  }
  return dof;
}

/// Stiffness matrix of the form \int w(x) grad(u).grad(v) dx on the free DOFs,
/// where w is piecewise constant with value subdomain_weights[i-1] on D_i.
inline SparseSymOperator assemble_stiffness(const Mesh2D& mesh, const DofMap& dof,
                                            const std::vector<double>& subdomain_weights) {
  if (static_cast<int>(subdomain_weights.size()) != mesh.num_subdomains)
    throw std::invalid_argument("assemble_stiffness: one weight per subdomain required");
  for (double w : subdomain_weights)
    if (!std::isfinite(w)) throw std::invalid_argument("assemble_stiffness: weights must be finite");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 6);
  bool negative = false;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double w = subdomain_weights[mesh.subdomain_of_triangle[t] - 1];
    if (w == 0.0) continue;
    negative = negative || w < 0.0;
    const auto& tri = mesh.triangles[t];
    const Vec2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    const double area2 = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);  // 2*area
    // Gradients of the barycentric basis times 2*area.
    const double gx[3] = {b.y - c.y, c.y - a.y, a.y - b.y};
    const double gy[3] = {c.x - b.x, a.x - c.x, b.x - a.x};
    const double scale = w / (2.0 * area2);
    for (int i = 0; i < 3; ++i) {
      const int fi = dof.free_index_of_vertex[tri[i]];
      if (fi < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int fj = dof.free_index_of_vertex[tri[j]];
        if (fj < fi) continue;
        trip.emplace_back(fi, fj, scale * (gx[i] * gx[j] + gy[i] * gy[j]));
      }
    }
  }
  SparseSymOperator op;
  op.dim = dof.n_free;
  op.upper.resize(dof.n_free, dof.n_free);
  op.upper.setFromTriplets(trip.begin(), trip.end());
  op.maybe_indefinite = negative;
  return op;
}

/// Load vector entries \int f phi_j dx for constant f over all vertices
/// (no Dirichlet elimination); exact for P1 test functions.
inline Vector assemble_load_full(const Mesh2D& mesh, double f) {
  Vector load = Vector::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double contrib = f * mesh.triangle_area(t) / 3.0;
    for (int k = 0; k < 3; ++k) load[mesh.triangles[t][k]] += contrib;
  }
  return load;
}

inline Vector assemble_load(const Mesh2D& mesh, const DofMap& dof, double f) {
  const Vector full = assemble_load_full(mesh, f);
  Vector load(dof.n_free);
  for (int i = 0; i < dof.n_free; ++i) load[i] = full[dof.vertex_of_free[i]];
  return load;
}

/// Load for a P0 (per-triangle) right-hand side.
inline Vector assemble_load(const Mesh2D& mesh, const DofMap& dof,
                            const std::vector<double>& f_per_triangle) {
  if (static_cast<int>(f_per_triangle.size()) != mesh.num_triangles())
    throw std::invalid_argument("assemble_load: one value per triangle required");
  Vector load = Vector::Zero(dof.n_free);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double contrib = f_per_triangle[t] * mesh.triangle_area(t) / 3.0;
    for (int k = 0; k < 3; ++k) {
      const int i = dof.free_index_of_vertex[mesh.triangles[t][k]];
      if (i >= 0) load[i] += contrib;
    }
  }
  return load;
}

/// Sparse Cholesky factorization P A P^T = L L^T with a fill-reducing
/// permutation P. Besides solving, it exposes the map v -> L^T P v whose
/// Euclidean norm realizes the energy norm sqrt(v^T A v).
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const SparseSymOperator& op) : dim_(op.dim) {
    llt_.compute(op.upper.selfadjointView<Eigen::Upper>());
    if (llt_.info() != Eigen::Success) {
      int pivot = -1;
      const auto& L = llt_.matrixL();
      for (int i = 0; i < L.rows(); ++i) {
        const double d = L.nestedExpression().coeff(i, i);
        if (!(d > 0.0) || !std::isfinite(d)) {
          pivot = i;
          break;
        }
      }
      throw std::runtime_error("cholesky: nonpositive pivot at index " + std::to_string(pivot));
    }
  }

  int dim() const { return dim_; }

  Vector solve(const Vector& rhs) const { return do_solve(rhs); }
  Matrix solve(const Matrix& rhs) const { return do_solve(rhs); }

  /// v -> L^T P v  (energy factor: |mul_Lt(v)|_2^2 = v^T A v).
  Vector mul_Lt(const Vector& v) const { return do_mul_Lt(v); }
  Matrix mul_Lt(const Matrix& v) const { return do_mul_Lt(v); }

  /// v -> P^T L v  (transpose of mul_Lt).
  Vector mul_L(const Vector& v) const {
    return llt_.permutationPinv() * Vector(llt_.matrixL() * v);
  }

  /// Solve (L^T P) x = w.
  Vector solve_Lt(const Vector& w) const { return do_solve_Lt(w); }
  Matrix solve_Lt(const Matrix& w) const { return do_solve_Lt(w); }

  /// Solve (P^T L) x = w.
  Vector solve_L(const Vector& w) const {
    Vector t = llt_.permutationP() * w;
    return llt_.matrixL().solve(t);
  }

  double energy_norm(const Vector& v) const { return mul_Lt(v).norm(); }
  double energy_inner(const Vector& u, const Vector& v) const { return mul_Lt(u).dot(mul_Lt(v)); }

  Eigen::VectorXi permutation() const { return llt_.permutationP().indices(); }
  SparseMatrix matrixL() const { return llt_.matrixL(); }

 private:
  template <typename Rhs>
  Rhs do_solve(const Rhs& rhs) const {
    if (rhs.rows() != dim_) throw std::invalid_argument("cholesky solve: dimension mismatch");
    return llt_.solve(rhs);
  }
  template <typename Rhs>
  Rhs do_mul_Lt(const Rhs& v) const {
    if (v.rows() != dim_) throw std::invalid_argument("mul_Lt: dimension mismatch");
    Rhs t = llt_.permutationP() * v;
    return llt_.matrixU() * t;
  }
  template <typename Rhs>
  Rhs do_solve_Lt(const Rhs& w) const {
    if (w.rows() != dim_) throw std::invalid_argument("solve_Lt: dimension mismatch");
    Rhs t = llt_.matrixU().solve(w);
    return llt_.permutationPinv() * t;
  }

  Eigen::SimplicialLLT<SparseMatrix, Eigen::Upper> llt_;
  int dim_ = 0;
};

inline CholeskyFactor cholesky(const SparseSymOperator& op) { return CholeskyFactor(op); }

/// Galerkin solution of the full parametric problem at a fixed parameter y,
/// assembled with subdomain weights 1 - theta*y_i.
inline Vector direct_parametric_solve(const Mesh2D& mesh, const DofMap& dof, double theta,
                                      const std::vector<double>& y, double f) {
  if (static_cast<int>(y.size()) != mesh.num_subdomains)
    throw std::invalid_argument("direct_parametric_solve: y must have one entry per subdomain");
  std::vector<double> weights(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    weights[i] = 1.0 - theta * y[i];
    if (!(weights[i] > 0.0))
      throw std::invalid_argument("direct_parametric_solve: uniform ellipticity violated");
  }
  const SparseSymOperator a = assemble_stiffness(mesh, dof, weights);
  return CholeskyFactor(a).solve(assemble_load(mesh, dof, f));
}

// --- 1D counterparts -------------------------------------------------------

struct DofMap1D {
  std::vector<int> free_index_of_node;  // -1 = eliminated endpoint
  std::vector<int> node_of_free;
  int n_free = 0;
};

inline DofMap1D make_dof_map(const IntervalMesh& mesh) {
  DofMap1D dof;
  dof.free_index_of_node.assign(mesh.num_nodes(), -1);
  for (int v = 0; v < mesh.num_nodes(); ++v) {
    if (!mesh.is_dirichlet_node[v]) {
      dof.free_index_of_node[v] = dof.n_free++;
      dof.node_of_free.push_back(v);
    }
  }
  return dof;
}

inline SparseSymOperator assemble_stiffness(const IntervalMesh& mesh, const DofMap1D& dof,
                                            const std::vector<double>& subdomain_weights) {
  if (static_cast<int>(subdomain_weights.size()) != mesh.d)
    throw std::invalid_argument("assemble_stiffness: one weight per subinterval required");
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double w = subdomain_weights[mesh.subdomain_of_cell[c] - 1];
    const double h = mesh.nodes[c + 1] - mesh.nodes[c];
    const int n0 = dof.free_index_of_node[c], n1 = dof.free_index_of_node[c + 1];
    const double k = w / h;
    if (n0 >= 0) trip.emplace_back(n0, n0, k);
    if (n1 >= 0) trip.emplace_back(n1, n1, k);
    if (n0 >= 0 && n1 >= 0) trip.emplace_back(std::min(n0, n1), std::max(n0, n1), -k);
  }
  SparseSymOperator op;
  op.dim = dof.n_free;
  op.upper.resize(dof.n_free, dof.n_free);
  op.upper.setFromTriplets(trip.begin(), trip.end());
  return op;
}

inline Vector assemble_load(const IntervalMesh& mesh, const DofMap1D& dof, double f) {
  Vector load = Vector::Zero(dof.n_free);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double h = mesh.nodes[c + 1] - mesh.nodes[c];
    for (int k = 0; k < 2; ++k) {
      const int i = dof.free_index_of_node[c + k];
      if (i >= 0) load[i] += 0.5 * f * h;
    }
  }
  return load;
}

}  // namespace lrpde
