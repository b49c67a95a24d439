#pragma once
//
// Exact low-rank structure on the interval: the analytic piecewise-quadratic
// solution for piecewise-constant diffusion on ]0,1[ with constant right-hand
// side, snapshot singular values in the H^1_0 metric (the solution manifold
// spans at most 2d-1 directions), and the rank-one check for coefficients
// proportional to the mean.
//

#include <Eigen/Dense>

#include <random>
#include <span>
#include <vector>

#include "lrpde/fem.hpp"
#include "lrpde/lowrank.hpp"
#include "lrpde/neumann.hpp"

namespace lrpde {

/// Exact solution of -( (1 - theta y_i) u' )' = f on each subinterval of the
/// uniform partition of ]0,1[ into d parts, with u(0) = u(1) = 0. On D_i the
/// solution is alpha_i + beta_i x + gamma_i x^2/2. The flux a u' = C - f x is
/// continuous across breakpoints by construction.
struct Analytic1D {
  int d = 0;
  double flux_constant = 0.0;                  // C with a u' = C - f x
  std::vector<std::array<double, 3>> segment;  // (alpha, beta, gamma) per subinterval

  double eval(double x) const {
    int i = std::min(static_cast<int>(x * d), d - 1);
    if (x <= 0.0) i = 0;
    const auto& s = segment[i];
    return s[0] + s[1] * x + 0.5 * s[2] * x * x;
  }
  double derivative(double x) const {
    int i = std::min(static_cast<int>(x * d), d - 1);
    if (x <= 0.0) i = 0;
    return segment[i][1] + segment[i][2] * x;
  }
};

inline Analytic1D solve_1d_analytic(int d, double theta, std::span<const double> y,
                                    double f = 1.0) {
  if (static_cast<int>(y.size()) != d) throw std::invalid_argument("solve_1d_analytic: y size != d");
  std::vector<double> a(d);
  for (int i = 0; i < d; ++i) {
    a[i] = 1.0 - theta * y[i];
    if (!(a[i] > 0.0)) throw std::invalid_argument("solve_1d_analytic: ellipticity violated");
  }
  // u'(x) = (C - f x)/a(x); C is fixed by u(1) = 0:
  //   C * int 1/a = f * int x/a, both integrals over ]0,1[ piecewise.
  double inv_sum = 0.0, x_inv_sum = 0.0;
  for (int i = 0; i < d; ++i) {
    const double x0 = static_cast<double>(i) / d, x1 = static_cast<double>(i + 1) / d;
    inv_sum += (x1 - x0) / a[i];
    x_inv_sum += 0.5 * (x1 * x1 - x0 * x0) / a[i];
  }
  Analytic1D sol;
  sol.d = d;
  sol.flux_constant = f * x_inv_sum / inv_sum;
  const double C = sol.flux_constant;
  sol.segment.resize(d);
  double u_left = 0.0;  // u at the left end of the current subinterval
  for (int i = 0; i < d; ++i) {
    const double x0 = static_cast<double>(i) / d;
    const double gamma = -f / a[i];
    const double beta = C / a[i];
    const double alpha = u_left - beta * x0 - 0.5 * gamma * x0 * x0;
    sol.segment[i] = {alpha, beta, gamma};
    const double x1 = static_cast<double>(i + 1) / d;
    u_left = alpha + beta * x1 + 0.5 * gamma * x1 * x1;
  }
  return sol;
}

/// 1D P1 Galerkin solution on the given mesh; by nodal exactness it matches
/// the analytic solution at the nodes.
inline Vector solve_1d_fem(const IntervalMesh& mesh, const DofMap1D& dof, double theta,
                           std::span<const double> y, double f = 1.0) {
  std::vector<double> weights(mesh.d);
  for (int i = 0; i < mesh.d; ++i) {
    weights[i] = 1.0 - theta * y[i];
    if (!(weights[i] > 0.0)) throw std::invalid_argument("solve_1d_fem: ellipticity violated");
  }
  const SparseSymOperator a = assemble_stiffness(mesh, dof, weights);
  return CholeskyFactor(a).solve(assemble_load(mesh, dof, f));
}

/// Parameter samples for the snapshot study: seeded uniform points plus all
/// corners when d <= 4.
inline std::vector<std::vector<double>> snapshot_sample_points(int d, int count,
                                                               std::uint64_t seed) {
  std::vector<std::vector<double>> pts;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int n = 0; n < count; ++n) {
    std::vector<double> y(d);
    for (double& yi : y) yi = unif(rng);
    pts.push_back(std::move(y));
  }
  if (d <= 4) {
    for (int mask = 0; mask < (1 << d); ++mask) {
      std::vector<double> y(d);
      for (int i = 0; i < d; ++i) y[i] = (mask >> i) & 1 ? 1.0 : -1.0;
      pts.push_back(std::move(y));
    }
  }
  return pts;
}

/// Singular values (H^1_0 metric) of the snapshot matrix of analytic solutions
/// at seeded parameter samples. Values beyond index 2d-1 are numerically zero.
inline Vector snapshot_rank(int d, double theta, int n_samples, std::uint64_t seed,
                            int cells_per_subinterval = 32, double f = 1.0) {
  if (n_samples < 2 * d) throw std::invalid_argument("snapshot_rank: need at least 2d samples");
  const IntervalMesh mesh = build_interval_mesh(d, cells_per_subinterval);
  const DofMap1D dof = make_dof_map(mesh);
  const SparseSymOperator stiff = assemble_stiffness(mesh, dof, std::vector<double>(d, 1.0));
  const CholeskyFactor chol(stiff);

  const auto points = snapshot_sample_points(d, n_samples, seed);
  Matrix snapshots(dof.n_free, static_cast<Eigen::Index>(points.size()));
  for (std::size_t s = 0; s < points.size(); ++s) {
    const Analytic1D sol = solve_1d_analytic(d, theta, points[s], f);
    for (int i = 0; i < dof.n_free; ++i) snapshots(i, s) = sol.eval(mesh.nodes[dof.node_of_free[i]]);
  }
  return Eigen::BDCSVD<Matrix>(chol.mul_Lt(snapshots)).singularValues();
}

struct ProportionalCheck {
  Vector sigma;                 // singular values of the converged iterate
  double max_eval_mismatch = 0.0;  // vs the closed form g/(1 - sum c_i y_i)
  double max_factor_mismatch = 0.0;  // parametric factor ratio vs closed form
  LowRankPair pair;
};

/// Runs the low-rank iteration for psi_i = c_i * abar on the given 2D mesh
/// and checks the rank-one structure u(y) = g / (1 - sum c_i y_i).
inline ProportionalCheck proportional_rank_check(Mesh2D mesh, std::span<const double> c, double f,
                                                 int J, int k_max, double eps_trunc,
                                                 int n_eval_samples = 10,
                                                 std::uint64_t seed = 777) {
  const ProblemSetup setup = make_setup_proportional(std::move(mesh), c, f, J);
  auto [pair, trace] = iterate(setup, k_max, eps_trunc, 1e-14);

  ProportionalCheck check;
  check.sigma = pair.sigma;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int d = setup.d();
  const Vector phi_scale = pair.rank() > 0
                               ? Vector(pair.Phi.transpose() * basis_values(setup.Lambda, std::vector<double>(d, 0.0)))
                               : Vector();
  for (int s = 0; s < n_eval_samples; ++s) {
    std::vector<double> y(d);
    for (double& yi : y) yi = unif(rng);
    double shift = 1.0;
    for (int i = 0; i < d; ++i) shift -= c[i] * y[i];
    const Vector closed = setup.g / shift;
    const Vector evaluated = evaluate_expansion(pair, setup.Lambda, y);
    check.max_eval_mismatch =
        std::max(check.max_eval_mismatch,
                 setup.chol->energy_norm(evaluated - closed) / setup.chol->energy_norm(closed));
    if (pair.rank() > 0 && phi_scale.size() > 0 && phi_scale[0] != 0.0) {
      // Normalized parametric factor: phi_1(y)/phi_1(0) should equal 1/shift.
      const double ratio = (pair.Phi.col(0).dot(basis_values(setup.Lambda, y))) / phi_scale[0];
      check.max_factor_mismatch = std::max(check.max_factor_mismatch, std::abs(ratio * shift - 1.0));
    }
  }
  check.pair = std::move(pair);
  return check;
}

}  // namespace lrpde
