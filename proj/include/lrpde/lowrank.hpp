#pragma once
//
// Factored low-rank representation u = V Phi^T of semidiscrete functions
// (spatial FEM coefficients x parametric Legendre coefficients) and its SVD
// truncation in the energy metric induced by the stiffness operator.
//
// Truncation follows the orthogonalize-then-small-SVD scheme: factor the
// metric through the sparse Cholesky factor L, orthogonalize L^T V and Phi,
// and take a dense SVD of the small core. When the representation rank
// exceeds the smaller of the two ambient dimensions, the core is formed
// against the full parametric factor instead, which avoids the useless tall
// QR and keeps the cost at max(M_h, N_J) * rank^2.
//

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <stdexcept>
#include <vector>

#include "lrpde/fem.hpp"

namespace lrpde {

/// Low-rank pair u = V Phi^T. In SVD-normalized form, sigma holds the
/// nonincreasing singular values, Phi has orthonormal columns, and the
/// columns of L^T P V are orthogonal with norms sigma (the spatial factor
/// carries the scaling).
struct LowRankPair {
  Matrix V;            // M_h x r
  Matrix Phi;          // N_J x r
  Vector sigma;        // length r when SVD-normalized, otherwise empty

  int rank() const { return static_cast<int>(V.cols()); }
  bool svd_normalized() const { return sigma.size() == V.cols(); }
  Matrix dense() const { return V * Phi.transpose(); }

  static LowRankPair zero(int rows_v, int rows_phi) {
    LowRankPair p;
    p.V = Matrix::Zero(rows_v, 0);
    p.Phi = Matrix::Zero(rows_phi, 0);
    p.sigma = Vector::Zero(0);
    return p;
  }
};

struct TruncationReport {
  int input_rank = 0;
  int output_rank = 0;
  double discarded_tail_norm = 0.0;  // sqrt(sum of discarded sigma^2)
  Vector singular_values;            // full sequence before truncation
};

enum class TruncMode { absolute, relative };

/// Factor concatenation; the representation rank is the sum of ranks.
inline LowRankPair add(const std::vector<const LowRankPair*>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("add: empty sequence");
  const Eigen::Index rows_v = pairs[0]->V.rows();
  const Eigen::Index rows_phi = pairs[0]->Phi.rows();
  Eigen::Index r = 0;
  for (const LowRankPair* p : pairs) {
    if (p->V.rows() != rows_v || p->Phi.rows() != rows_phi)
      throw std::invalid_argument("add: dimension mismatch");
    r += p->V.cols();
  }
  LowRankPair out;
  out.V.resize(rows_v, r);
  out.Phi.resize(rows_phi, r);
  Eigen::Index c = 0;
  for (const LowRankPair* p : pairs) {
    out.V.middleCols(c, p->V.cols()) = p->V;
    out.Phi.middleCols(c, p->Phi.cols()) = p->Phi;
    c += p->V.cols();
  }
  return out;
}

inline LowRankPair add(const LowRankPair& a, const LowRankPair& b) { return add({&a, &b}); }

namespace detail {

// Full SVD data of the represented operator in the metric:
// L^T P (V Phi^T) = Q diag(s) Z^T with Q, Z orthonormal.
struct MetricSvd {
  Matrix Q;   // M_h x p, orthonormal columns (metric side)
  Matrix Z;   // N_J x p, orthonormal columns (parametric side)
  Vector s;   // length p, nonincreasing
};

inline MetricSvd metric_svd(const LowRankPair& pair, const CholeskyFactor& metric) {
  const Eigen::Index m = pair.V.rows(), nj = pair.Phi.rows(), r = pair.V.cols();
  MetricSvd out;
  if (r == 0) {
    out.Q.resize(m, 0);
    out.Z.resize(nj, 0);
    out.s.resize(0);
    return out;
  }
  const Matrix W = metric.mul_Lt(pair.V);  // M_h x r

  if (r <= std::min(m, nj)) {
    // Standard route: thin QR of both factors, SVD of the r x r core.
    Eigen::HouseholderQR<Matrix> qr_w(W);
    Eigen::HouseholderQR<Matrix> qr_phi(pair.Phi);
    const Matrix Rw = qr_w.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    const Matrix Rp = qr_phi.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    Matrix core = Rw * Rp.transpose();
    Eigen::BDCSVD<Matrix> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.Q = qr_w.householderQ() * Matrix::Identity(m, r) * svd.matrixU();
    out.Z = qr_phi.householderQ() * Matrix::Identity(nj, r) * svd.matrixV();
    out.s = svd.singularValues();
  } else {
    // Rank exceeds an ambient dimension: orthogonalize the smaller side only.
    const Eigen::Index k = std::min(m, r);
    Eigen::HouseholderQR<Matrix> qr_w(W);
    const Matrix Rw = qr_w.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const Matrix Bt = pair.Phi * Rw.transpose();  // N_J x k, equals (R_w Phi^T)^T
    Eigen::BDCSVD<Matrix> svd(Bt, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.Q = qr_w.householderQ() * Matrix::Identity(m, k) * svd.matrixV();
    out.Z = svd.matrixU();
    out.s = svd.singularValues();
  }
  return out;
}

inline int kept_rank(const Vector& s, double tol, TruncMode mode) {
  const Eigen::Index p = s.size();
  double total_sq = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) total_sq += s[i] * s[i];
  const double budget = (mode == TruncMode::absolute) ? tol * tol : tol * tol * total_sq;
  // Largest tail within budget; exact zeros are always dropped.
  int keep = static_cast<int>(p);
  while (keep > 0 && s[keep - 1] == 0.0) --keep;
  double tail_sq = 0.0;
  while (keep > 0) {
    const double next = tail_sq + s[keep - 1] * s[keep - 1];
    if (next > budget) break;
    tail_sq = next;
    --keep;
  }
  return keep;
}

}  // namespace detail

/// Singular values of the represented operator between l^2(Lambda) and the
/// energy-metric space; no truncation is performed.
inline Vector singular_values_in_metric(const LowRankPair& pair, const CholeskyFactor& metric) {
  return detail::metric_svd(pair, metric).s;
}

/// Truncated SVD in the energy metric. The discarded tail obeys the tolerance
/// in the Frobenius norm (absolute, or relative to the input norm). The
/// output is SVD-normalized; each parametric singular vector is sign-fixed so
/// that its largest-magnitude entry is positive.
inline std::pair<LowRankPair, TruncationReport> svd_truncate(const LowRankPair& pair,
                                                             const CholeskyFactor& metric,
                                                             double tol,
                                                             TruncMode mode = TruncMode::absolute) {
  if (tol < 0.0) throw std::invalid_argument("svd_truncate: tolerance must be nonnegative");
  detail::MetricSvd svd = detail::metric_svd(pair, metric);
  const int keep = detail::kept_rank(svd.s, tol, mode);

  TruncationReport report;
  report.input_rank = pair.rank();
  report.output_rank = keep;
  report.singular_values = svd.s;
  double tail_sq = 0.0;
  for (Eigen::Index i = keep; i < svd.s.size(); ++i) tail_sq += svd.s[i] * svd.s[i];
  report.discarded_tail_norm = std::sqrt(tail_sq);

  LowRankPair out;
  out.Phi = svd.Z.leftCols(keep);
  Matrix q = svd.Q.leftCols(keep);
  for (int j = 0; j < keep; ++j) {
    Eigen::Index imax = 0;
    out.Phi.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.Phi(imax, j) < 0.0) {
      out.Phi.col(j) = -out.Phi.col(j);
      q.col(j) = -q.col(j);
    }
  }
  out.V = metric.solve_Lt(q) * svd.s.head(keep).asDiagonal();
  out.sigma = svd.s.head(keep);
  return {std::move(out), std::move(report)};
}

/// Count of singular values above cutoff_relative times the largest one.
inline int numerical_rank(const Vector& sigma, double cutoff_relative) {
  if (!(cutoff_relative > 0.0 && cutoff_relative < 1.0))
    throw std::invalid_argument("numerical_rank: cutoff must be in (0,1)");
  if (sigma.size() == 0) return 0;
  const double top = sigma[0];
  if (!(top > 0.0)) return 0;
  int count = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma[i] > cutoff_relative * top) ++count;
  return count;
}

/// Frobenius inner product of two pairs in the metric (Gram trick on the
/// factors; never densifies).
inline double frobenius_inner(const LowRankPair& a, const LowRankPair& b,
                              const CholeskyFactor& metric) {
  if (a.rank() == 0 || b.rank() == 0) return 0.0;
  const Matrix wa = metric.mul_Lt(a.V), wb = metric.mul_Lt(b.V);
  return ((wa.transpose() * wb).array() * (a.Phi.transpose() * b.Phi).array()).sum();
}

inline double frobenius_norm(const LowRankPair& a, const CholeskyFactor& metric) {
  return std::sqrt(std::max(0.0, frobenius_inner(a, a, metric)));
}

}  // namespace lrpde
