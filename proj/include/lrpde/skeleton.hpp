#pragma once
//
// Discrete Steklov-Poincare machinery for four-quadrant partitions whose
// skeleton is a cross: harmonic extension into the subdomains, the trace
// operators S_i and Sbar, the three symmetry subspaces of the trace space
// (even/even, odd-on-Gamma1, odd-on-Gamma2), the preconditioned operators
// G_i = theta Sbar^{-1} H_i, and numerical verification of their algebraic
// identities and of the linear growth of span{words in G_i applied to the
// trace data}.
//
// The subspace projectors are built from the combinatorial slot pairing of
// the four skeleton arms, so on exactly reflection-symmetric meshes the
// identities hold to solver accuracy. On a distorted partition the same
// machinery runs, but the identities fail, which is the point of the
// geometry-sensitivity experiments.
//

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <array>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lrpde/lowrank.hpp"
#include "lrpde/neumann.hpp"

namespace lrpde {

class SkeletonSetup {
 public:
  explicit SkeletonSetup(const ProblemSetup& problem) : problem_(&problem) {
    if (problem.d() != 4 || problem.coefficient != ProblemSetup::Coefficient::piecewise_constant)
      throw std::invalid_argument("SkeletonSetup: needs a four-subdomain piecewise-constant setup");
    build_trace_index();
    build_arms();
    build_subdomain_data();
    build_steklov();
    build_trace_data();
    build_full_reflections();
  }

  int n_gamma() const { return n_gamma_; }
  const std::vector<int>& trace_dofs() const { return gamma_; }
  const ProblemSetup& problem() const { return *problem_; }

  /// Trace of a free-DOF vector on the skeleton DOFs.
  Vector trace_of(const Vector& v) const {
    Vector w(n_gamma_);
    for (int j = 0; j < n_gamma_; ++j) w[j] = v[gamma_[j]];
    return w;
  }

  /// Subdomain-wise discrete harmonic extension of trace values (zero on the
  /// outer boundary); the interior residual of Abar vanishes.
  Vector harmonic_extension(const Vector& trace) const {
    if (trace.size() != n_gamma_) throw std::invalid_argument("harmonic_extension: bad trace size");
    Vector full = Vector::Zero(problem_->spatial_dim());
    for (int j = 0; j < n_gamma_; ++j) full[gamma_[j]] = trace[j];
    for (int i = 0; i < 4; ++i) {
      const Vector interior = -(ext_[i] * trace);
      const auto& idx = problem_->dof.interior_dofs_of_subdomain[i];
      for (std::size_t r = 0; r < idx.size(); ++r) full[idx[r]] = interior[r];
    }
    return full;
  }

  /// Steklov-Poincare operator S_i (Schur complement of the unit-coefficient
  /// stiffness of D_i onto the trace DOFs), i in 1..4. Dense and symmetric.
  const Matrix& steklov(int i) const { return S_.at(i - 1); }
  const Matrix& sbar() const { return sbar_; }

  double trace_norm(const Vector& v) const { return (sbar_llt_.matrixU() * v).norm(); }
  double trace_inner(const Vector& u, const Vector& v) const { return u.dot(sbar_ * v); }
  Vector sbar_solve(const Vector& rhs) const { return sbar_llt_.solve(rhs); }

  /// G_i = theta Sbar^{-1} H_i with H_1 = S1-S2-S3+S4, H_2 = S1+S2-S3-S4,
  /// H_3 = S1-S2+S3-S4.
  Vector apply_G(int i, const Vector& v) const {
    if (i < 1 || i > 3) throw std::invalid_argument("apply_G: i must be 1, 2, or 3");
    return problem_->theta * sbar_llt_.solve(H_[i - 1] * v);
  }

  /// Projector onto the j-th symmetry subspace of the trace space:
  /// j=1 even/even, j=2 odd on Gamma1 and zero on Gamma2, j=3 vice versa.
  Vector project(int j, const Vector& v) const {
    if (j < 1 || j > 3) throw std::invalid_argument("project: j must be 1, 2, or 3");
    Vector out = Vector::Zero(n_gamma_);
    for (int l = 0; l < n_gamma_; ++l) {
      const bool horizontal = on_gamma1_[l];
      if (j == 1) {
        out[l] = horizontal ? 0.5 * (v[l] + v[px_[l]]) : 0.5 * (v[l] + v[py_[l]]);
      } else if (j == 2) {
        if (horizontal && l != center_local_) out[l] = 0.5 * (v[l] - v[px_[l]]);
      } else {
        if (!horizontal) out[l] = 0.5 * (v[l] - v[py_[l]]);
      }
    }
    return out;
  }

  /// Slot pairings of the trace DOFs under the two reflections and their
  /// composition (legs swap, center fixed).
  Vector reflect_trace_x(const Vector& v) const { return permute(v, px_); }
  Vector reflect_trace_y(const Vector& v) const { return permute(v, py_); }
  const std::vector<int>& pairing_x() const { return px_; }
  const std::vector<int>& pairing_y() const { return py_; }

  /// Trace data g_Gamma = Sbar^{-1} f_Gamma of the mean problem.
  const Vector& g_trace() const { return g_gamma_; }
  const Vector& f_trace() const { return f_gamma_; }

  bool has_full_reflections() const { return has_full_reflections_; }
  /// Free-DOF permutation of the two mesh reflections (symmetric meshes only).
  Vector reflect_full(int which, const Vector& v) const {
    if (!has_full_reflections_) throw std::runtime_error("reflect_full: mesh is not symmetric");
    const std::vector<int>& map = which == 0 ? full_rx_ : full_ry_;
    Vector out(v.size());
    for (int i = 0; i < v.size(); ++i) out[map[i]] = v[i];
    return out;
  }

  /// Ahar-orthogonal projection of a free-DOF vector onto the interior space
  /// of subdomain i (1..4), returned as a full free-DOF vector.
  Vector interior_projection(int i, const Vector& v) const {
    const Vector av = problem_->Abar.apply(v);
    const auto& idx = problem_->dof.interior_dofs_of_subdomain[i - 1];
    Vector rhs(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) rhs[r] = av[idx[r]];
    const Vector sol = interior_chol_[i - 1]->solve(rhs);
    Vector out = Vector::Zero(problem_->spatial_dim());
    for (std::size_t r = 0; r < idx.size(); ++r) out[idx[r]] = sol[r];
    return out;
  }

  /// Singular values of a trace-space low-rank pair in the Sbar metric.
  Vector trace_singular_values(const Matrix& Vg, const Matrix& Phi) const {
    if (Vg.cols() == 0) return Vector();
    const Matrix W = sbar_llt_.matrixU() * Vg;
    const Eigen::Index r = W.cols();
    Eigen::HouseholderQR<Matrix> qw(W);
    Eigen::HouseholderQR<Matrix> qp(Phi);
    const Eigen::Index kw = std::min(W.rows(), r), kp = std::min(Phi.rows(), r);
    const Matrix Rw = qw.matrixQR().topRows(kw).triangularView<Eigen::Upper>();
    const Matrix Rp = qp.matrixQR().topRows(kp).triangularView<Eigen::Upper>();
    return Eigen::BDCSVD<Matrix>(Matrix(Rw * Rp.transpose())).singularValues();
  }

 private:
  static Vector permute(const Vector& v, const std::vector<int>& map) {
    Vector out(v.size());
    for (int i = 0; i < v.size(); ++i) out[map[i]] = v[i];
    return out;
  }

  void build_trace_index() {
    gamma_ = problem_->dof.skeleton_dofs;
    n_gamma_ = static_cast<int>(gamma_.size());
    if (n_gamma_ == 0) throw std::invalid_argument("SkeletonSetup: mesh has no skeleton DOFs");
    local_of_free_.assign(problem_->spatial_dim(), -1);
    for (int j = 0; j < n_gamma_; ++j) local_of_free_[gamma_[j]] = j;
  }

  // The skeleton must be a cross: a center vertex with four chains (arms)
  // attached. Arms are identified by the unordered pair of subdomains they
  // separate and ordered by distance from the center.
  void build_arms() {
    const Mesh2D& mesh = problem_->mesh;
    const DofMap& dof = problem_->dof;
    std::vector<std::set<int>> nbr(n_gamma_);
    std::vector<std::set<int>> labels(n_gamma_);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      std::array<int, 3> loc;
      for (int k = 0; k < 3; ++k) {
        const int f = dof.free_index_of_vertex[mesh.triangles[t][k]];
        loc[k] = (f >= 0) ? local_of_free_[f] : -1;
        if (loc[k] >= 0) labels[loc[k]].insert(mesh.subdomain_of_triangle[t]);
      }
      for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
          if (loc[a] >= 0 && loc[b] >= 0) {
            nbr[loc[a]].insert(loc[b]);
            nbr[loc[b]].insert(loc[a]);
          }
    }
    center_local_ = -1;
    for (int l = 0; l < n_gamma_; ++l)
      if (labels[l].size() == 4) center_local_ = l;
    if (center_local_ < 0 || nbr[center_local_].size() != 4)
      throw std::invalid_argument("SkeletonSetup: skeleton is not a four-arm cross");

    std::map<std::pair<int, int>, std::vector<int>> arm_by_pair;
    for (int start : nbr[center_local_]) {
      std::vector<int> chain;
      int prev = center_local_, cur = start;
      while (true) {
        chain.push_back(cur);
        int next = -1;
        for (int cand : nbr[cur])
          if (cand != prev && cand != center_local_) next = cand;
        if (next < 0) break;
        prev = cur;
        cur = next;
      }
      const auto& ls = labels[start];
      if (ls.size() != 2) throw std::invalid_argument("SkeletonSetup: ambiguous arm labels");
      arm_by_pair[{*ls.begin(), *std::next(ls.begin())}] = std::move(chain);
    }
    auto take = [&](int a, int b) {
      auto it = arm_by_pair.find({a, b});
      if (it == arm_by_pair.end())
        throw std::invalid_argument("SkeletonSetup: unexpected subdomain layout");
      return it->second;
    };
    arm_left_ = take(1, 3);
    arm_right_ = take(2, 4);
    arm_bottom_ = take(1, 2);
    arm_top_ = take(3, 4);
    if (arm_left_.size() != arm_right_.size() || arm_bottom_.size() != arm_top_.size())
      throw std::invalid_argument("SkeletonSetup: opposite arms differ in length");

    on_gamma1_.assign(n_gamma_, false);
    on_gamma1_[center_local_] = true;
    for (int l : arm_left_) on_gamma1_[l] = true;
    for (int l : arm_right_) on_gamma1_[l] = true;

    px_.resize(n_gamma_);
    py_.resize(n_gamma_);
    for (int l = 0; l < n_gamma_; ++l) px_[l] = py_[l] = l;
    for (std::size_t t = 0; t < arm_left_.size(); ++t) {
      px_[arm_left_[t]] = arm_right_[t];
      px_[arm_right_[t]] = arm_left_[t];
    }
    for (std::size_t t = 0; t < arm_bottom_.size(); ++t) {
      py_[arm_bottom_[t]] = arm_top_[t];
      py_[arm_top_[t]] = arm_bottom_[t];
    }
  }

  void build_subdomain_data() {
    const double inv_theta = 1.0 / problem_->theta;
    for (int i = 0; i < 4; ++i) {
      const auto& idx = problem_->dof.interior_dofs_of_subdomain[i];
      const int ni = static_cast<int>(idx.size());
      std::vector<int> local(problem_->spatial_dim(), -1);
      for (int r = 0; r < ni; ++r) local[idx[r]] = r;

      // Unit-coefficient stiffness of D_i = (1/theta) A_i; split into the
      // interior block and the interior-trace coupling.
      const SparseMatrix K = problem_->A[i].full() * inv_theta;
      std::vector<Eigen::Triplet<double>> ii;
      Matrix ig = Matrix::Zero(ni, n_gamma_);
      Matrix kgg = Matrix::Zero(n_gamma_, n_gamma_);
      for (int c = 0; c < K.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(K, c); it; ++it) {
          const int lr = local[it.row()], lc = local[it.col()];
          const int gr = local_of_free_[it.row()], gc = local_of_free_[it.col()];
          if (lr >= 0 && lc >= 0)
            ii.emplace_back(lr, lc, it.value());
          else if (lr >= 0 && gc >= 0)
            ig(lr, gc) = it.value();
          else if (gr >= 0 && gc >= 0)
            kgg(gr, gc) = it.value();
        }
      SparseSymOperator kii;
      kii.dim = ni;
      kii.upper.resize(ni, ni);
      {
        std::vector<Eigen::Triplet<double>> up;
        for (const auto& t : ii)
          if (t.row() <= t.col()) up.push_back(t);
        kii.upper.setFromTriplets(up.begin(), up.end());
      }
      interior_chol_.push_back(std::make_shared<CholeskyFactor>(kii));
      ext_.push_back(interior_chol_[i]->solve(ig));  // K_II^{-1} K_IG
      kig_.push_back(std::move(ig));
      kgg_.push_back(std::move(kgg));
    }
  }

  void build_steklov() {
    sbar_ = Matrix::Zero(n_gamma_, n_gamma_);
    for (int i = 0; i < 4; ++i) {
      Matrix s = kgg_[i] - kig_[i].transpose() * ext_[i];
      s = 0.5 * (s + s.transpose());  // exact symmetry
      sbar_ += s;
      S_.push_back(std::move(s));
    }
    sbar_llt_.compute(sbar_);
    if (sbar_llt_.info() != Eigen::Success)
      throw std::runtime_error("SkeletonSetup: Sbar is not positive definite");
    H_[0] = S_[0] - S_[1] - S_[2] + S_[3];
    H_[1] = S_[0] + S_[1] - S_[2] - S_[3];
    H_[2] = S_[0] - S_[1] + S_[2] - S_[3];
  }

  void build_trace_data() {
    f_gamma_ = trace_of(problem_->f_load);
    for (int i = 0; i < 4; ++i) {
      const auto& idx = problem_->dof.interior_dofs_of_subdomain[i];
      Vector fi(idx.size());
      for (std::size_t r = 0; r < idx.size(); ++r) fi[r] = problem_->f_load[idx[r]];
      f_gamma_ -= ext_[i].transpose() * fi;
    }
    g_gamma_ = sbar_llt_.solve(f_gamma_);
  }

  void build_full_reflections() {
    const SymmetryReport rep = check_reflection_symmetry(problem_->mesh);
    has_full_reflections_ = rep.symmetric;
    if (!has_full_reflections_) return;
    const Mesh2D& mesh = problem_->mesh;
    std::map<std::pair<double, double>, int> index;
    for (int v = 0; v < mesh.num_vertices(); ++v)
      index.emplace(std::make_pair(mesh.vertices[v].x, mesh.vertices[v].y), v);
    full_rx_.assign(problem_->spatial_dim(), -1);
    full_ry_.assign(problem_->spatial_dim(), -1);
    for (int f = 0; f < problem_->spatial_dim(); ++f) {
      const Vec2 p = mesh.vertices[problem_->dof.vertex_of_free[f]];
      full_rx_[f] = problem_->dof.free_index_of_vertex[index.at({-p.x, p.y})];
      full_ry_[f] = problem_->dof.free_index_of_vertex[index.at({p.x, -p.y})];
    }
  }

  const ProblemSetup* problem_;
  std::vector<int> gamma_;
  std::vector<int> local_of_free_;
  int n_gamma_ = 0;
  int center_local_ = -1;
  std::vector<int> arm_left_, arm_right_, arm_bottom_, arm_top_;
  std::vector<bool> on_gamma1_;
  std::vector<int> px_, py_;

  std::vector<std::shared_ptr<CholeskyFactor>> interior_chol_;
  std::vector<Matrix> ext_;   // K_II^{-1} K_IG per subdomain
  std::vector<Matrix> kig_;   // K_IG per subdomain
  std::vector<Matrix> kgg_;   // trace block per subdomain
  std::vector<Matrix> S_;
  Matrix sbar_;
  std::array<Matrix, 3> H_;
  Eigen::LLT<Matrix> sbar_llt_;
  Vector f_gamma_, g_gamma_;

  bool has_full_reflections_ = false;
  std::vector<int> full_rx_, full_ry_;
};

struct LemmaReport {
  std::vector<std::pair<std::string, double>> residuals;  // max over trials
  double max_residual = 0.0;
};

/// Residuals of the annihilation, mapping, composition, orthogonality, and
/// self-adjointness identities of the symmetry machinery, maximized over
/// random trace vectors. All residuals are relative to the input norms.
inline LemmaReport verify_lemmas(const SkeletonSetup& sk, int n_trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto random_trace = [&] {
    Vector v(sk.n_gamma());
    for (int i = 0; i < v.size(); ++i) v[i] = unif(rng);
    return v;
  };

  std::map<std::string, double> worst;
  auto record = [&](const std::string& name, double r) {
    auto [it, inserted] = worst.emplace(name, r);
    if (!inserted) it->second = std::max(it->second, r);
  };
  const double theta = sk.problem().theta;

  for (int trial = 0; trial < n_trials; ++trial) {
    const Vector v = random_trace();
    const Vector w = random_trace();
    const std::array<Vector, 3> pv = {sk.project(1, v), sk.project(2, v), sk.project(3, v)};
    const std::array<Vector, 3> pw = {sk.project(1, w), sk.project(2, w), sk.project(3, w)};
    const double vn = sk.trace_norm(v), wn = sk.trace_norm(w);

    // Decomposition is exact by construction.
    record("projectors_sum_to_identity", (pv[0] + pv[1] + pv[2] - v).norm() / v.norm());

    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        record("orthogonality_V" + std::to_string(a + 1) + "_V" + std::to_string(b + 1),
               std::abs(sk.trace_inner(pv[a], pw[b])) / (vn * wn));

    for (int i = 1; i <= 3; ++i)
      record("annihilation_G" + std::to_string(i) + "_V" + std::to_string(i),
             sk.trace_norm(sk.apply_G(i, pv[i - 1])) / vn);

    // Mapping inclusions: G_a(V_in) lies in V_out.
    const std::array<std::array<int, 3>, 6> inclusions = {{{2, 1, 3},
                                                           {1, 2, 3},
                                                           {3, 1, 2},
                                                           {1, 3, 2},
                                                           {3, 2, 1},
                                                           {2, 3, 1}}};
    for (const auto& [a, in, out] : inclusions) {
      const Vector image = sk.apply_G(a, pv[in - 1]);
      record("mapping_G" + std::to_string(a) + "_V" + std::to_string(in) + "_to_V" +
                 std::to_string(out),
             sk.trace_norm(image - sk.project(out, image)) / vn);
    }

    // Composition identities on V2 and V3.
    const Vector& v2 = pv[1];
    const Vector& v3 = pv[2];
    record("identity_G2G3_eq_G1_on_V2",
           sk.trace_norm(sk.apply_G(2, sk.apply_G(3, v2)) - sk.apply_G(1, v2)) / vn);
    record("identity_G3G2_eq_G1_on_V3",
           sk.trace_norm(sk.apply_G(3, sk.apply_G(2, v3)) - sk.apply_G(1, v3)) / vn);
    record("identity_G3G3_eq_id_on_V2",
           sk.trace_norm(sk.apply_G(3, sk.apply_G(3, v2)) - v2) / vn);
    record("identity_G2G2_eq_id_on_V3",
           sk.trace_norm(sk.apply_G(2, sk.apply_G(2, v3)) - v3) / vn);

    for (int i = 1; i <= 3; ++i)
      record("self_adjoint_G" + std::to_string(i),
             std::abs(sk.trace_inner(sk.apply_G(i, v), w) - sk.trace_inner(v, sk.apply_G(i, w))) /
                 (vn * wn));

    // Trace contraction |sum y_i theta Sbar^{-1} S_i v| <= theta |v|.
    std::array<double, 4> y;
    for (double& yi : y) yi = unif(rng);
    Vector rhs = Vector::Zero(sk.n_gamma());
    for (int i = 0; i < 4; ++i) rhs += y[i] * (sk.steklov(i + 1) * v);
    const double norm = theta * sk.trace_norm(sk.sbar_solve(rhs));
    record("trace_contraction_excess", std::max(0.0, norm - theta * vn) / vn);
  }

  LemmaReport report;
  for (const auto& [name, r] : worst) {
    report.residuals.emplace_back(name, r);
    report.max_residual = std::max(report.max_residual, r);
  }
  return report;
}

namespace detail {

/// Numerical dimension of the span of a vector list in the Sbar metric:
/// Gram-matrix rank at a relative eigenvalue cutoff.
inline int gram_dimension(const SkeletonSetup& sk, const std::vector<Vector>& vecs,
                          double eigenvalue_cutoff) {
  if (vecs.empty()) return 0;
  const int m = static_cast<int>(vecs.size());
  Matrix x(sk.n_gamma(), m);
  for (int j = 0; j < m; ++j) x.col(j) = vecs[j];
  Matrix gram = x.transpose() * (sk.sbar() * x);
  gram = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  if (!(top > 0.0)) return 0;
  int count = 0;
  for (double lambda : eig.eigenvalues())
    if (lambda > eigenvalue_cutoff * top) ++count;
  return count;
}

}  // namespace detail

/// Dimensions of span{words of length <= k in {G1,G2,G3} applied to v} for
/// k = 0..k_max. New words are generated only from vectors that enlarged the
/// span, which the graph structure of the G_i keeps linear in k; the span is
/// unchanged because images of dependent vectors stay inside the images of
/// the retained basis.
inline std::vector<int> span_growth(const SkeletonSetup& sk, const Vector& v, int k_max,
                                    double eigenvalue_cutoff = 1e-10) {
  std::vector<Vector> candidates;        // all generated word values
  std::vector<Vector> basis;             // Sbar-orthonormal basis of the span
  std::vector<Vector> frontier;          // basis vectors added in the last level
  const double indep_tol = 1e-13;

  auto try_add = [&](const Vector& w) {
    candidates.push_back(w);
    Vector r = w;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& b : basis) r -= sk.trace_inner(b, r) * b;
    const double wn = sk.trace_norm(w);
    const double rn = sk.trace_norm(r);
    if (wn == 0.0 || rn <= indep_tol * wn) return;
    basis.push_back(r / rn);
    frontier.push_back(w);
  };

  std::vector<int> dims;
  try_add(v);
  dims.push_back(detail::gram_dimension(sk, candidates, eigenvalue_cutoff));
  for (int k = 1; k <= k_max; ++k) {
    std::vector<Vector> previous;
    previous.swap(frontier);
    for (const Vector& b : previous)
      for (int i = 1; i <= 3; ++i) try_add(sk.apply_G(i, b));
    dims.push_back(detail::gram_dimension(sk, candidates, eigenvalue_cutoff));
  }
  return dims;
}

/// Brute-force oracle: all 3^j words for j <= k_max. Only viable for small k.
inline std::vector<int> span_growth_full_enumeration(const SkeletonSetup& sk, const Vector& v,
                                                     int k_max, double eigenvalue_cutoff = 1e-10) {
  if (k_max > 6)
    throw std::invalid_argument("span_growth_full_enumeration: k_max too large (max 6)");
  std::vector<Vector> level = {v};
  std::vector<Vector> all = {v};
  std::vector<int> dims;
  dims.push_back(detail::gram_dimension(sk, all, eigenvalue_cutoff));
  for (int k = 1; k <= k_max; ++k) {
    std::vector<Vector> next;
    next.reserve(level.size() * 3);
    for (const Vector& w : level)
      for (int i = 1; i <= 3; ++i) next.push_back(sk.apply_G(i, w));
    all.insert(all.end(), next.begin(), next.end());
    dims.push_back(detail::gram_dimension(sk, all, eigenvalue_cutoff));
    level.swap(next);
  }
  return dims;
}

struct RankSplit {
  std::array<int, 4> interior_ranks{};  // each expected <= 1
  int trace_rank = 0;
  Vector trace_sigma;
};

/// Split an iterate along the Abar-orthogonal decomposition into the four
/// interior components and the harmonically extended trace component, and
/// report the numerical rank of each block.
inline RankSplit skeleton_rank_split(const SkeletonSetup& sk, const LowRankPair& u,
                                     double cutoff = 1e-10) {
  RankSplit split;
  const ProblemSetup& p = sk.problem();
  for (int i = 1; i <= 4; ++i) {
    Matrix vi(u.V.rows(), u.V.cols());
    for (int c = 0; c < u.V.cols(); ++c) vi.col(c) = sk.interior_projection(i, u.V.col(c));
    LowRankPair block;
    block.V = std::move(vi);
    block.Phi = u.Phi;
    const Vector sigma = singular_values_in_metric(block, *p.chol);
    split.interior_ranks[i - 1] = sigma.size() ? numerical_rank(sigma, cutoff) : 0;
  }
  Matrix vg(sk.n_gamma(), u.V.cols());
  for (int c = 0; c < u.V.cols(); ++c) vg.col(c) = sk.trace_of(u.V.col(c));
  split.trace_sigma = sk.trace_singular_values(vg, u.Phi);
  split.trace_rank = split.trace_sigma.size() ? numerical_rank(split.trace_sigma, cutoff) : 0;
  return split;
}

}  // namespace lrpde
