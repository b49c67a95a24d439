#pragma once
//
// Low-rank fixed-point (truncated Neumann) iteration for the affine-parametric
// diffusion problem: starting from u_0 = g e_0^T, one step computes
//
//   u~_{k+1} = g e_0^T + sum_i (Abar^{-1} A_i V_k)(M_i Phi_k)^T
//
// followed by an SVD truncation in the energy metric. With zero truncation
// tolerance the iterates reproduce the exact Taylor partial sums for k < J.
// Also: the Taylor coefficient recursion, a power-iteration contraction
// estimate, sampled sup-norm errors against direct solves, and the rank-bound
// table used for reporting.
//

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "lrpde/fem.hpp"
#include "lrpde/legendre.hpp"
#include "lrpde/lowrank.hpp"
#include "lrpde/mesh.hpp"

namespace lrpde {

/// Assembled problem data: mesh, operators, load, parametric basis.
struct ProblemSetup {
  enum class Coefficient { piecewise_constant, proportional };

  Mesh2D mesh;
  DofMap dof;
  SparseSymOperator Abar;
  std::shared_ptr<CholeskyFactor> chol;
  std::vector<SparseSymOperator> A;  // one operator per parameter
  Vector f_load;
  Vector g;  // Abar^{-1} f
  double theta = 0.0;
  std::vector<double> proportional_c;  // only for Coefficient::proportional
  Coefficient coefficient = Coefficient::piecewise_constant;
  double f_value = 1.0;
  MultiIndexSet Lambda;
  std::vector<Eigen::SparseMatrix<double>> M;  // multiplication matrices

  int d() const { return static_cast<int>(A.size()); }
  int spatial_dim() const { return dof.n_free; }
  int parametric_dim() const { return static_cast<int>(Lambda.size()); }
};

/// Setup for psi_i = theta * chi_{D_i} with abar = 1 (piecewise constant
/// coefficient over the mesh partition).
inline ProblemSetup make_setup(Mesh2D mesh, double theta, double f, int J,
                               std::uint64_t index_cap = 2000000) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("make_setup: theta must be in (0,1)");
  ProblemSetup s;
  s.mesh = std::move(mesh);
  s.dof = make_dof_map(s.mesh);
  const int d = s.mesh.num_subdomains;
  s.Abar = assemble_stiffness(s.mesh, s.dof, std::vector<double>(d, 1.0));
  s.chol = std::make_shared<CholeskyFactor>(s.Abar);
  s.A.reserve(d);
  for (int i = 0; i < d; ++i) {
    std::vector<double> w(d, 0.0);
    w[i] = theta;
    s.A.push_back(assemble_stiffness(s.mesh, s.dof, w));
  }
  s.f_load = assemble_load(s.mesh, s.dof, f);
  s.g = s.chol->solve(s.f_load);
  s.theta = theta;
  s.f_value = f;
  s.Lambda = MultiIndexSet::total_degree(d, J, index_cap);
  s.M.reserve(d);
  for (int i = 1; i <= d; ++i) s.M.push_back(multiplication_matrix(i, s.Lambda));
  return s;
}

/// Setup for psi_i = c_i * abar (all operators proportional to Abar); the
/// solution then has rank one. Requires sum |c_i| < 1.
inline ProblemSetup make_setup_proportional(Mesh2D mesh, std::span<const double> c, double f, int J,
                                            std::uint64_t index_cap = 2000000) {
  double sum = 0.0;
  for (double ci : c) sum += std::abs(ci);
  if (!(sum < 1.0)) throw std::invalid_argument("make_setup_proportional: need sum |c_i| < 1");
  ProblemSetup s;
  s.mesh = std::move(mesh);
  s.dof = make_dof_map(s.mesh);
  const int nsub = s.mesh.num_subdomains;
  s.Abar = assemble_stiffness(s.mesh, s.dof, std::vector<double>(nsub, 1.0));
  s.chol = std::make_shared<CholeskyFactor>(s.Abar);
  for (double ci : c) s.A.push_back(s.Abar.scaled(ci));
  s.f_load = assemble_load(s.mesh, s.dof, f);
  s.g = s.chol->solve(s.f_load);
  s.theta = sum;
  s.proportional_c.assign(c.begin(), c.end());
  s.coefficient = ProblemSetup::Coefficient::proportional;
  s.f_value = f;
  const int d = static_cast<int>(c.size());
  s.Lambda = MultiIndexSet::total_degree(d, J, index_cap);
  for (int i = 1; i <= d; ++i) s.M.push_back(multiplication_matrix(i, s.Lambda));
  return s;
}

struct IterationStep {
  int k = 0;
  int rank_before = 0;  // representation rank entering the truncation
  int rank_after = 0;
  Vector sigma;                    // singular values before truncation
  double discarded_tail = 0.0;
  double step_difference = 0.0;    // |u_k - u_{k-1}|_F in the metric (0 at k=0)
  double seconds = 0.0;
};

struct IterationTrace {
  std::vector<IterationStep> steps;
};

/// Rank-1 start iterate g (x) e_0.
inline LowRankPair initial_iterate(const ProblemSetup& s) {
  LowRankPair u;
  u.V = s.g;
  u.Phi = Matrix::Zero(s.parametric_dim(), 1);
  u.Phi(0, 0) = 1.0;
  return u;
}

/// Run k_max steps of the truncated iteration. If stop_tol > 0, stops early
/// once discarded tail + step difference falls below it. The callback, when
/// set, receives every iterate (including u_0).
inline std::pair<LowRankPair, IterationTrace> iterate(
    const ProblemSetup& s, int k_max, double eps_trunc, double stop_tol = 0.0,
    const std::function<void(int, const LowRankPair&)>& callback = {}) {
  if (k_max < 0) throw std::invalid_argument("iterate: k_max must be >= 0");
  using clock = std::chrono::steady_clock;
  IterationTrace trace;

  LowRankPair u = initial_iterate(s);
  {
    IterationStep step0;
    step0.k = 0;
    step0.rank_before = step0.rank_after = 1;
    step0.sigma = Vector::Constant(1, s.chol->energy_norm(s.g));
    u.sigma = step0.sigma;
    trace.steps.push_back(std::move(step0));
  }
  if (callback) callback(0, u);

  const int d = s.d();
  for (int k = 1; k <= k_max; ++k) {
    const auto t0 = clock::now();
    const int r = u.rank();

    LowRankPair next;
    next.V.resize(s.spatial_dim(), d * r + 1);
    next.Phi.resize(s.parametric_dim(), d * r + 1);
    next.V.col(0) = s.g;
    next.Phi.col(0).setZero();
    next.Phi(0, 0) = 1.0;
    for (int i = 0; i < d; ++i) {
      next.V.middleCols(1 + i * r, r) = s.chol->solve(s.A[i].apply(u.V));
      next.Phi.middleCols(1 + i * r, r) = s.M[i] * u.Phi;
    }

    auto [truncated, report] = svd_truncate(next, *s.chol, eps_trunc, TruncMode::absolute);

    IterationStep step;
    step.k = k;
    step.rank_before = d * r + 1;
    step.rank_after = truncated.rank();
    step.sigma = report.singular_values;
    step.discarded_tail = report.discarded_tail_norm;
    LowRankPair minus_u = u;
    minus_u.V = -minus_u.V;
    step.step_difference = frobenius_norm(add(truncated, minus_u), *s.chol);
    step.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    trace.steps.push_back(step);

    u = std::move(truncated);
    if (callback) callback(k, u);
    if (stop_tol > 0.0 && step.discarded_tail + step.step_difference < stop_tol) break;
  }
  return {std::move(u), std::move(trace)};
}

namespace detail {

struct MultiIndexLess {
  bool operator()(const std::vector<int>& a, const std::vector<int>& b) const { return a < b; }
};

}  // namespace detail

/// Memoized evaluation of the Taylor coefficient recursion
/// t_0 = g, t_nu = sum_{i : nu_i != 0} Abar^{-1} A_i t_{nu - e_i}.
class TaylorCoefficients {
 public:
  explicit TaylorCoefficients(const ProblemSetup& s, int degree_cap = 20)
      : setup_(&s), cap_(degree_cap) {}

  const Vector& coefficient(std::span<const int> nu) {
    std::vector<int> key(nu.begin(), nu.end());
    int total = 0;
    for (int c : key) {
      if (c < 0) throw std::invalid_argument("taylor_coefficient: negative index");
      total += c;
    }
    if (total > cap_) throw std::invalid_argument("taylor_coefficient: degree cap exceeded");
    return compute(key, total);
  }

 private:
  const Vector& compute(const std::vector<int>& nu, int total) {
    auto it = memo_.find(nu);
    if (it != memo_.end()) return it->second;
    Vector t;
    if (total == 0) {
      t = setup_->g;
    } else {
      t = Vector::Zero(setup_->spatial_dim());
      std::vector<int> pred = nu;
      for (int i = 0; i < setup_->d(); ++i) {
        if (nu[i] == 0) continue;
        pred[i] -= 1;
        t += setup_->chol->solve(setup_->A[i].apply(compute(pred, total - 1)));
        pred[i] += 1;
      }
    }
    return memo_.emplace(nu, std::move(t)).first->second;
  }

  const ProblemSetup* setup_;
  int cap_;
  std::map<std::vector<int>, Vector, detail::MultiIndexLess> memo_;
};

inline Vector taylor_coefficient(const ProblemSetup& s, std::span<const int> nu,
                                 int degree_cap = 20) {
  TaylorCoefficients tc(s, degree_cap);
  return tc.coefficient(nu);
}

/// Dense Legendre-coefficient matrix of the exact Taylor partial sum
/// sum_{|nu| <= k} t_nu y^nu, obtained by re-expanding each monomial in the
/// orthonormal Legendre basis axis by axis. Independent route to the same
/// object as iterate(..., eps=0) for k < J.
inline Matrix dense_from_taylor(const ProblemSetup& s, int k) {
  if (k >= s.Lambda.degree_bound() + 1)
    throw std::invalid_argument("dense_from_taylor: k must be at most J");
  Matrix U = Matrix::Zero(s.spatial_dim(), s.parametric_dim());
  TaylorCoefficients tc(s, k);
  const int d = s.d();
  std::vector<Eigen::VectorXd> mono(k + 1);
  for (int n = 0; n <= k; ++n) mono[n] = monomial_in_legendre_1d(n);

  std::vector<int> mu(d);
  for (std::size_t p = 0; p < s.Lambda.size(); ++p) {
    auto nu = s.Lambda.index(p);
    if (s.Lambda.total_degree_of(p) > k) continue;
    const Vector& t = tc.coefficient(nu);
    // Accumulate t_nu * prod_i c_{nu_i, mu_i} over all mu <= nu componentwise.
    std::fill(mu.begin(), mu.end(), 0);
    while (true) {
      double w = 1.0;
      for (int i = 0; i < d; ++i) w *= mono[nu[i]][mu[i]];
      if (w != 0.0) {
        const int q = s.Lambda.position(mu);
        U.col(q) += w * t;
      }
      int axis = 0;
      while (axis < d) {
        if (mu[axis] < nu[axis]) {
          ++mu[axis];
          break;
        }
        mu[axis] = 0;
        ++axis;
      }
      if (axis == d) break;
    }
  }
  return U;
}

/// Evaluate a low-rank iterate at a parameter point: V (Phi^T l(y)).
inline Vector evaluate_expansion(const LowRankPair& u, const MultiIndexSet& set,
                                 std::span<const double> y) {
  const Vector l = basis_values(set, y);
  if (u.rank() == 0) return Vector::Zero(u.V.rows());
  return u.V * (u.Phi.transpose() * l);
}

inline Vector evaluate_expansion(const Matrix& dense_coeffs, const MultiIndexSet& set,
                                 std::span<const double> y) {
  return dense_coeffs * basis_values(set, y);
}

/// Power-iteration estimate of the energy-operator norm of v -> sum y_i B_i v.
/// The operator is self-adjoint in the energy inner product, so the estimate
/// increases towards the norm and never exceeds it (up to iteration error).
inline double contraction_estimate(const ProblemSetup& s, std::span<const double> y,
                                   int n_power_iters = 40, std::uint64_t seed = 1234) {
  if (static_cast<int>(y.size()) != s.d())
    throw std::invalid_argument("contraction_estimate: y must have d components");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vector v(s.spatial_dim());
  for (int i = 0; i < v.size(); ++i) v[i] = unif(rng);
  double norm = s.chol->energy_norm(v);
  if (!(norm > 0.0)) return 0.0;
  v /= norm;

  double estimate = 0.0;
  for (int it = 0; it < n_power_iters; ++it) {
    Vector av = Vector::Zero(s.spatial_dim());
    for (int i = 0; i < s.d(); ++i)
      if (y[i] != 0.0) av += y[i] * s.A[i].apply(v);
    Vector w = s.chol->solve(av);
    const double wnorm = s.chol->energy_norm(w);
    estimate = wnorm;  // |T v|_A with |v|_A = 1
    if (!(wnorm > 0.0)) return 0.0;
    v = w / wnorm;
  }
  return estimate;
}

/// Parameter samples used by the error study: `count` seeded uniform points
/// plus the 2^min(d,4) corners with the remaining coordinates at +1.
inline std::vector<std::vector<double>> error_sample_points(int d, int count, std::uint64_t seed) {
  std::vector<std::vector<double>> pts;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int n = 0; n < count; ++n) {
    std::vector<double> y(d);
    for (double& yi : y) yi = unif(rng);
    pts.push_back(std::move(y));
  }
  const int corner_axes = std::min(d, 4);
  for (int mask = 0; mask < (1 << corner_axes); ++mask) {
    std::vector<double> y(d, 1.0);
    for (int i = 0; i < corner_axes; ++i) y[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    pts.push_back(std::move(y));
  }
  return pts;
}

/// Sampled sup-norm error study: precomputes the direct Galerkin solves at
/// the sample points once, then evaluates iterates against them. The result
/// is a lower bound on the sup-norm error over the parameter box.
class ErrorSampler {
 public:
  ErrorSampler(const ProblemSetup& s, int sample_count, std::uint64_t seed)
      : setup_(&s), points_(error_sample_points(s.d(), sample_count, seed)) {
    references_.reserve(points_.size());
    for (const auto& y : points_) {
      if (s.coefficient == ProblemSetup::Coefficient::piecewise_constant) {
        references_.push_back(direct_parametric_solve(s.mesh, s.dof, s.theta, y, s.f_value));
      } else {
        double shift = 1.0;
        for (int i = 0; i < s.d(); ++i) shift -= s.proportional_c[i] * y[i];
        references_.push_back(s.g / shift);
      }
    }
  }

  double operator()(const LowRankPair& u) const {
    double worst = 0.0;
    for (std::size_t p = 0; p < points_.size(); ++p) {
      const Vector diff = evaluate_expansion(u, setup_->Lambda, points_[p]) - references_[p];
      worst = std::max(worst, setup_->chol->energy_norm(diff));
    }
    return worst;
  }

  const std::vector<std::vector<double>>& points() const { return points_; }

 private:
  const ProblemSetup* setup_;
  std::vector<std::vector<double>> points_;
  std::vector<Vector> references_;
};

/// Max over sampled y of |u_k(y) - u_h(y)|_A with u_h(y) the direct Galerkin
/// solve.
inline double sampled_sup_error(const ProblemSetup& s, const LowRankPair& u, int sample_count,
                                std::uint64_t seed) {
  return ErrorSampler(s, sample_count, seed)(u);
}

struct RankBounds {
  std::uint64_t generic = 0;   // n(d,k)
  std::uint64_t improved = 0;  // n(d-1,k), valid under sum_i A_i = theta Abar
  std::uint64_t theorem_2x2 = 0;  // 8k+5
};

inline RankBounds rank_bound_table(int d, int k) {
  if (d < 1 || k < 0) throw std::invalid_argument("rank_bound_table: need d >= 1, k >= 0");
  RankBounds b;
  b.generic = total_degree_count(d, k);
  b.improved = total_degree_count(d - 1, k);
  b.theorem_2x2 = 8ull * k + 5;
  return b;
}

}  // namespace lrpde
