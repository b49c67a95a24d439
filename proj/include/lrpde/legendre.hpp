#pragma once
//
// Orthonormal tensor Legendre basis on [-1,1]^d under the uniform probability
// measure: total-degree multi-index sets in graded-lexicographic order, the
// bidiagonal multiplication-by-y_i matrices, and basis/expansion evaluation.
//
// Normalization: L_n = sqrt(2n+1) P_n, so that <L_n, L_m> = delta_nm with
// d(mu) = dy/2 per axis. The coupling in y*L_n = beta_{n-1} L_{n-1} +
// beta_n L_{n+1} is beta_n = (n+1)/sqrt((2n+1)(2n+3)).
//

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace lrpde {

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

/// n(d,k) = #{nu : |nu| <= k} = binomial(k+d, d).
inline std::uint64_t total_degree_count(int d, int k) { return binomial(k + d, d); }

inline double legendre_coupling(int n) {
  return (n + 1.0) / std::sqrt((2.0 * n + 1.0) * (2.0 * n + 3.0));
}

/// Ordered total-degree index set over d parameters: |nu| <= J, graded
/// lexicographic (total degree ascending, then lexicographic), position 0 is
/// nu = 0. The ordering is part of the file-format contract.
class MultiIndexSet {
 public:
  static MultiIndexSet total_degree(int d, int J, std::uint64_t size_cap = 2000000) {
    if (d < 1 || J < 0) throw std::invalid_argument("total_degree: need d >= 1, J >= 0");
    const std::uint64_t n = total_degree_count(d, J);
    if (n > size_cap) throw std::invalid_argument("total_degree: index set exceeds size cap");
    MultiIndexSet set;
    set.d_ = d;
    set.J_ = J;
    set.flat_.reserve(n * d);
    std::vector<int> nu(d, 0);
    for (int t = 0; t <= J; ++t) set.emit_degree(nu, 0, t);
    for (std::size_t p = 0; p < set.size(); ++p)
      set.position_of_.emplace(std::vector<int>(set.begin(p), set.begin(p) + d), static_cast<int>(p));
    return set;
  }

  int d() const { return d_; }
  int degree_bound() const { return J_; }
  std::size_t size() const { return flat_.size() / d_; }

  std::span<const int> index(std::size_t p) const { return {begin(p), static_cast<std::size_t>(d_)}; }

  int total_degree_of(std::size_t p) const {
    int s = 0;
    for (int c : index(p)) s += c;
    return s;
  }

  /// Position of a multi-index, or -1 if it is not in the set.
  int position(std::span<const int> nu) const {
    auto it = position_of_.find(std::vector<int>(nu.begin(), nu.end()));
    return it == position_of_.end() ? -1 : it->second;
  }

 private:
  const int* begin(std::size_t p) const { return flat_.data() + p * d_; }

  void emit_degree(std::vector<int>& nu, int axis, int remaining) {
    if (axis == d_ - 1) {
      nu[axis] = remaining;
      flat_.insert(flat_.end(), nu.begin(), nu.end());
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      nu[axis] = v;
      emit_degree(nu, axis + 1, remaining - v);
    }
    nu[axis] = 0;
  }

  int d_ = 0;
  int J_ = 0;
  std::vector<int> flat_;
  std::map<std::vector<int>, int> position_of_;
};

/// Galerkin discretization of multiplication by y_axis on span{L_nu}: couples
/// nu and nu + e_axis with weight beta_{nu_axis}; couplings out of the set
/// (degree J to J+1) are dropped. Symmetric with zero diagonal.
inline Eigen::SparseMatrix<double> multiplication_matrix(int axis, const MultiIndexSet& set) {
  if (axis < 1 || axis > set.d()) throw std::invalid_argument("multiplication_matrix: axis out of range");
  const int a = axis - 1;
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<int> up(set.d());
  for (std::size_t p = 0; p < set.size(); ++p) {
    auto nu = set.index(p);
    std::copy(nu.begin(), nu.end(), up.begin());
    up[a] += 1;
    const int q = set.position(up);
    if (q < 0) continue;
    const double beta = legendre_coupling(nu[a]);
    trip.emplace_back(static_cast<int>(p), q, beta);
    trip.emplace_back(q, static_cast<int>(p), beta);
  }
  Eigen::SparseMatrix<double> m(static_cast<int>(set.size()), static_cast<int>(set.size()));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

/// Values L_0(y),...,L_n(y) of the orthonormal Legendre polynomials.
inline std::vector<double> legendre_values_1d(int n, double y) {
  std::vector<double> v(static_cast<std::size_t>(n) + 1);
  v[0] = 1.0;
  if (n >= 1) v[1] = std::sqrt(3.0) * y;
  for (int k = 1; k < n; ++k)
    v[k + 1] = (y * v[k] - legendre_coupling(k - 1) * v[k - 1]) / legendre_coupling(k);
  return v;
}

inline double eval_legendre_1d(int n, double y) { return legendre_values_1d(n, y)[n]; }

inline double eval_tensor_legendre(std::span<const int> nu, std::span<const double> y) {
  double p = 1.0;
  for (std::size_t i = 0; i < nu.size(); ++i) p *= eval_legendre_1d(nu[i], y[i]);
  return p;
}

/// All basis values (L_nu(y))_{nu in set} as a vector in set order.
inline Eigen::VectorXd basis_values(const MultiIndexSet& set, std::span<const double> y) {
  if (static_cast<int>(y.size()) != set.d())
    throw std::invalid_argument("basis_values: y must have d components");
  std::vector<std::vector<double>> table(set.d());
  for (int i = 0; i < set.d(); ++i) table[i] = legendre_values_1d(set.degree_bound(), y[i]);
  Eigen::VectorXd v(static_cast<Eigen::Index>(set.size()));
  for (std::size_t p = 0; p < set.size(); ++p) {
    double prod = 1.0;
    auto nu = set.index(p);
    for (int i = 0; i < set.d(); ++i) prod *= table[i][nu[i]];
    v[static_cast<Eigen::Index>(p)] = prod;
  }
  return v;
}

/// Coefficients of the monomial y^n in the orthonormal Legendre basis
/// (length n+1, exact recurrence y^{k+1} = y * y^k applied coefficientwise).
inline Eigen::VectorXd monomial_in_legendre_1d(int n) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n + 1);
  c[0] = 1.0;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(n + 1);
    for (int j = 0; j <= k; ++j) {
      if (c[j] == 0.0) continue;
      next[j + 1] += legendre_coupling(j) * c[j];
      if (j > 0) next[j - 1] += legendre_coupling(j - 1) * c[j];
    }
    c.swap(next);
  }
  return c;
}

}  // namespace lrpde
