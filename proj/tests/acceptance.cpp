//
// Acceptance suite: one check per criterion, each printing a single
// PASS/FAIL line with the measured quantities. Run with a criterion number
// (1..12) to execute one check, or with no arguments to run all.
//

#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lrpde/experiments.hpp"
#include "lrpde/neumann.hpp"
#include "lrpde/oned.hpp"
#include "lrpde/skeleton.hpp"

using namespace lrpde;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (int i = 0; i < n; ++i) {
    const double p = fit.slope * x[i] + fit.intercept;
    ss_res += (y[i] - p) * (y[i] - p);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

// Criterion 1: contraction estimates at corner parameters.
Outcome criterion_contraction() {
  const ProblemSetup s =
      make_setup(build_mesh(GeometrySpec::checkerboard(2, 3, 1.0)), 0.5, 1.0, 1);
  double worst_corner = 0.0;
  for (int mask = 0; mask < 8; ++mask) {
    std::vector<double> y(4);
    for (int i = 0; i < 3; ++i) y[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    y[3] = -1.0;
    worst_corner = std::max(worst_corner, contraction_estimate(s, y, 60));
  }
  const double at_ones = contraction_estimate(s, std::vector<double>(4, 1.0), 60);
  std::ostringstream detail;
  detail << "max corner estimate " << worst_corner << " (<= 0.5+1e-8), at ones " << at_ones
         << " (= 0.5 +- 1e-10)";
  return {worst_corner <= 0.5 + 1e-8 && std::abs(at_ones - 0.5) <= 1e-10, detail.str()};
}

// Criterion 2: geometric error decay with ratio <= 0.55 for k = 1..8.
Outcome criterion_error_decay() {
  const ProblemSetup s =
      make_setup(build_mesh(GeometrySpec::checkerboard(2, 3, 1.5)), 0.5, 1.0, 12);
  ErrorSampler sampler(s, 20, 20240829);
  std::vector<double> e;
  iterate(s, 9, 1e-15, 0.0, [&](int, const LowRankPair& u) { e.push_back(sampler(u)); });
  double worst_ratio = 0.0;
  for (int k = 1; k <= 8; ++k) worst_ratio = std::max(worst_ratio, e[k + 1] / e[k]);
  std::ostringstream detail;
  detail << "max e_{k+1}/e_k over k=1..8 is " << worst_ratio << " (<= 0.55)";
  return {worst_ratio <= 0.55, detail.str()};
}

// Criterion 3: iterate with eps = 0 reproduces the Taylor partial sums.
Outcome criterion_exact_recovery() {
  const ProblemSetup s =
      make_setup(build_mesh(GeometrySpec::checkerboard(2, 2, 1.0)), 0.5, 1.0, 8);
  double worst = 0.0;
  auto callback = [&](int k, const LowRankPair& u) {
    if (k < 1 || k > 6) return;
    const Matrix taylor = dense_from_taylor(s, k);
    const double rel = s.chol->mul_Lt(Matrix(u.dense() - taylor)).norm() /
                       s.chol->mul_Lt(taylor).norm();
    worst = std::max(worst, rel);
  };
  iterate(s, 6, 0.0, 0.0, callback);
  std::ostringstream detail;
  detail << "max relative Frobenius deviation over k=1..6 is " << worst << " (<= 1e-11)";
  return {worst <= 1e-11, detail.str()};
}

struct RankRun {
  std::vector<int> ranks;  // numerical rank of u_k at cutoff 1e-10, k = 1..k_max
  LowRankPair final;
  ProblemSetup setup;
};

RankRun rank_run(GeometrySpec geometry, int k_max, int k_conv) {
  RankRun run;
  run.setup = make_setup(build_mesh(geometry), 0.5, 1.0, 11);
  auto callback = [&](int k, const LowRankPair& u) {
    if (k >= 1 && k <= k_max) run.ranks.push_back(numerical_rank(u.sigma, 1e-10));
  };
  auto [u, trace] = iterate(run.setup, k_conv, 1e-15, 1e-14, callback);
  run.final = std::move(u);
  return run;
}

// Criterion 4: rank(u_k) <= 8k+5 on the symmetric geometry, slope <= 9.
Outcome criterion_rank_bound_2x2() {
  const RankRun run = rank_run(GeometrySpec::checkerboard(2, 4, 2.0), 10, 10);
  bool bounded = true;
  std::vector<double> ks, rs;
  for (int k = 1; k <= 10; ++k) {
    bounded = bounded && run.ranks[k - 1] <= 8 * k + 5;
    ks.push_back(k);
    rs.push_back(run.ranks[k - 1]);
  }
  const LinearFit fit = least_squares(ks, rs);
  std::ostringstream detail;
  detail << "ranks";
  for (int r : run.ranks) detail << ' ' << r;
  detail << "; bound 8k+5 " << (bounded ? "holds" : "violated") << ", slope " << fit.slope
         << " (<= 9)";
  return {bounded && fit.slope <= 9.0, detail.str()};
}

// Criterion 5: the distorted geometry breaks the 8k+5 law.
Outcome criterion_rank_growth_distorted() {
  const RankRun run = rank_run(GeometrySpec::distorted(4, 2.0), 8, 8);
  bool exceeded = false;
  int at_k = -1;
  for (int k = 1; k <= 8; ++k)
    if (run.ranks[k - 1] > 8 * k + 5 && !exceeded) {
      exceeded = true;
      at_k = k;
    }
  std::ostringstream detail;
  detail << "ranks";
  for (int r : run.ranks) detail << ' ' << r;
  detail << "; first exceeds 8k+5 at k=" << at_k;
  return {exceeded, detail.str()};
}

// Criterion 6: singular values decay ahead of sorted Legendre norms.
Outcome criterion_svd_vs_legendre() {
  const RankRun run = rank_run(GeometrySpec::checkerboard(2, 4, 2.0), 10, 60);
  const ProblemSetup& s = run.setup;
  const Vector sigma = run.final.sigma;

  const Matrix w = s.chol->mul_Lt(run.final.V);
  std::vector<double> norms(s.Lambda.size());
  for (std::size_t p = 0; p < s.Lambda.size(); ++p)
    norms[p] = (w * run.final.Phi.row(p).transpose()).norm();
  std::sort(norms.begin(), norms.end(), std::greater<>());

  bool pointwise = true;
  const int upto = static_cast<int>(std::min<std::size_t>(sigma.size(), norms.size()));
  for (int k = 5; k <= upto; ++k)
    pointwise = pointwise && sigma[k - 1] <= norms[k - 1];

  const double threshold = 1e-8 * sigma[0];
  int n_sigma = 0, n_norms = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) n_sigma += sigma[i] > threshold;
  for (double v : norms) n_norms += v > threshold;

  std::ostringstream detail;
  detail << "sigma_k <= norm_k for k>=5 " << (pointwise ? "holds" : "violated") << "; "
         << n_sigma << " sigma vs " << n_norms << " norms above 1e-8*sigma_1";
  return {pointwise && 2 * n_sigma <= n_norms, detail.str()};
}

// Criterion 7: lemma residuals and span growth.
Outcome criterion_lemma_suite() {
  const ProblemSetup s =
      make_setup(build_mesh(GeometrySpec::checkerboard(2, 3, 1.0)), 0.5, 1.0, 2);
  const SkeletonSetup sk(s);
  const LemmaReport report = verify_lemmas(sk, 20, 20240829);

  const std::vector<int> dims = span_growth(sk, sk.g_trace(), 6);
  const std::vector<int> full = span_growth_full_enumeration(sk, sk.g_trace(), 4);
  bool span_ok = true;
  for (int k = 0; k <= 6; ++k) span_ok = span_ok && dims[k] <= 8 * k + 1;
  bool agree = true;
  for (int k = 0; k <= 4; ++k) agree = agree && dims[k] == full[k];

  std::ostringstream detail;
  detail << "max residual " << report.max_residual << " (<= 1e-8); span dims";
  for (int d : dims) detail << ' ' << d;
  detail << (span_ok ? " within 8k+1" : " exceed 8k+1") << ", full enumeration "
         << (agree ? "agrees" : "disagrees");
  return {report.max_residual <= 1e-8 && span_ok && agree, detail.str()};
}

// Criterion 8: 1D exact rank bound and nodal exactness.
Outcome criterion_oned_rank() {
  double worst_ratio = 0.0, worst_nodal = 0.0;
  for (int d : {2, 4, 8}) {
    const Vector sigma = snapshot_rank(d, 0.5, 50, 20240829);
    worst_ratio = std::max(worst_ratio, sigma[2 * d - 1] / sigma[0]);

    const IntervalMesh mesh = build_interval_mesh(d, 16);
    const DofMap1D dof = make_dof_map(mesh);
    std::mt19937_64 rng(555);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> y(d);
      for (double& yi : y) yi = unif(rng);
      const Analytic1D sol = solve_1d_analytic(d, 0.5, y);
      const Vector fem = solve_1d_fem(mesh, dof, 0.5, y);
      for (int i = 0; i < dof.n_free; ++i)
        worst_nodal = std::max(worst_nodal,
                               std::abs(fem[i] - sol.eval(mesh.nodes[dof.node_of_free[i]])));
    }
  }
  std::ostringstream detail;
  detail << "max sigma_2d/sigma_1 " << worst_ratio << " (<= 1e-10), max nodal gap "
         << worst_nodal << " (<= 1e-12)";
  return {worst_ratio <= 1e-10 && worst_nodal <= 1e-12, detail.str()};
}

// Criterion 9: rank-one proportional case.
Outcome criterion_rank_one() {
  const std::vector<double> c = {0.3, 0.2};
  const ProportionalCheck check = proportional_rank_check(
      build_mesh(GeometrySpec::checkerboard(2, 2, 1.0)), c, 1.0, 35, 60, 1e-15, 10, 20240829);
  const double ratio = check.sigma.size() >= 2 ? check.sigma[1] / check.sigma[0] : 0.0;
  std::ostringstream detail;
  detail << "sigma_2/sigma_1 " << ratio << " (<= 1e-12), factor mismatch "
         << check.max_factor_mismatch << " (<= 1e-10)";
  return {ratio <= 1e-12 && check.max_factor_mismatch <= 1e-10, detail.str()};
}

// Criterion 10: partition-of-unity improved bound n(3,k).
Outcome criterion_improved_bound() {
  const RankRun run = rank_run(GeometrySpec::checkerboard(2, 4, 2.0), 8, 8);
  bool ok = true;
  std::ostringstream detail;
  detail << "ranks vs n(3,k):";
  for (int k = 1; k <= 8; ++k) {
    const auto bound = total_degree_count(3, k);
    detail << ' ' << run.ranks[k - 1] << "/" << bound;
    ok = ok && run.ranks[k - 1] <= static_cast<int>(bound);
  }
  return {ok, detail.str()};
}

// Criterion 11: index-set combinatorics and bidiagonal structure.
Outcome criterion_combinatorics() {
  bool ok = total_degree_count(4, 15) == 3876 && total_degree_count(16, 5) == 20349;
  const MultiIndexSet set = MultiIndexSet::total_degree(4, 5);
  for (int axis = 1; axis <= 4 && ok; ++axis) {
    const Eigen::SparseMatrix<double> m = multiplication_matrix(axis, set);
    for (int col = 0; col < m.outerSize() && ok; ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it) {
        auto mu = set.index(it.row());
        auto nu = set.index(it.col());
        int diffs = 0;
        for (int i = 0; i < 4; ++i)
          if (mu[i] != nu[i]) {
            ++diffs;
            ok = ok && std::abs(mu[i] - nu[i]) == 1 && i == axis - 1;
          }
        ok = ok && diffs == 1;
      }
  }
  std::ostringstream detail;
  detail << "n(4,15) = " << total_degree_count(4, 15) << ", n(16,5) = "
         << total_degree_count(16, 5) << ", M_i bidiagonal-in-axis "
         << (ok ? "holds" : "violated");
  return {ok, detail.str()};
}

// Criterion 12: 4x4 checkerboard at reduced scale.
Outcome criterion_4x4() {
  const ProblemSetup s =
      make_setup(build_mesh(GeometrySpec::checkerboard(4, 1, 1.5)), 0.5, 1.0, 5);
  std::vector<int> ranks;
  auto callback = [&](int k, const LowRankPair& u) {
    if (k >= 1 && k <= 5) ranks.push_back(numerical_rank(u.sigma, 1e-10));
  };
  auto [u, trace] = iterate(s, 34, 1e-15, 0.0, callback);

  // Superlinear growth: some later increment exceeds the first one.
  bool superlinear = false;
  for (int k = 1; k + 1 < static_cast<int>(ranks.size()); ++k)
    superlinear = superlinear || (ranks[k + 1] - ranks[k] > ranks[1] - ranks[0]);

  // Exponential decay: log-linear fit of sigma_5..sigma_40.
  const Vector sigma = u.sigma;
  bool have_range = sigma.size() >= 40;
  LinearFit fit;
  if (have_range) {
    std::vector<double> ks, logs;
    for (int k = 5; k <= 40; ++k) {
      ks.push_back(k);
      logs.push_back(std::log(sigma[k - 1]));
    }
    fit = least_squares(ks, logs);
  }
  std::ostringstream detail;
  detail << "ranks";
  for (int r : ranks) detail << ' ' << r;
  detail << (superlinear ? " grow superlinearly" : " fail superlinearity") << "; log-fit slope "
         << fit.slope << ", R^2 " << fit.r_squared << " (>= 0.95)";
  return {superlinear && have_range && fit.slope < 0.0 && fit.r_squared >= 0.95, detail.str()};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {"contraction estimate (corners and ones)", criterion_contraction},
      {"sampled error decay ratio", criterion_error_decay},
      {"exact partial-sum recovery", criterion_exact_recovery},
      {"rank bound 8k+5 on symmetric 2x2", criterion_rank_bound_2x2},
      {"rank growth beyond 8k+5 on distorted geometry", criterion_rank_growth_distorted},
      {"singular values vs sorted Legendre norms", criterion_svd_vs_legendre},
      {"lemma residuals and span growth", criterion_lemma_suite},
      {"1D snapshot rank 2d-1 and nodal exactness", criterion_oned_rank},
      {"rank-one proportional coefficients", criterion_rank_one},
      {"improved bound n(3,k) under partition of unity", criterion_improved_bound},
      {"index-set combinatorics and bidiagonal structure", criterion_combinatorics},
      {"4x4 checkerboard: exponential decay, superlinear ranks", criterion_4x4},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  if (argc > 1) {
    for (int a = 1; a < argc; ++a) {
      const int n = std::atoi(argv[a]);
      if (n < 1 || n > static_cast<int>(criteria().size())) {
        std::cerr << "usage: acceptance [criterion number 1.." << criteria().size() << "]\n";
        return 2;
      }
      selected.push_back(n);
    }
  } else {
    for (std::size_t i = 1; i <= criteria().size(); ++i) selected.push_back(static_cast<int>(i));
  }

  int failures = 0;
  for (int n : selected) {
    const Criterion& c = criteria()[n - 1];
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %2d: %s | %s\n", outcome.pass ? "PASS" : "FAIL", n, c.name,
                outcome.detail.c_str());
    std::fflush(stdout);
    failures += outcome.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
