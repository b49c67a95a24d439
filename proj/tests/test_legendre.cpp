#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lrpde/legendre.hpp"

using namespace lrpde;

namespace {

// 5-point Gauss-Legendre rule on [-1,1], here used against the uniform
// probability measure (weights halved); exact for polynomials of degree 9.
struct GaussRule {
  std::array<double, 5> nodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
  std::array<double, 5> weights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                   0.4786286704993665, 0.2369268850561891};
  template <typename F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += 0.5 * weights[i] * f(nodes[i]);
    return s;
  }
};

}  // namespace

TEST_CASE("total-degree set sizes") {
  REQUIRE(MultiIndexSet::total_degree(4, 15).size() == 3876);
  REQUIRE(MultiIndexSet::total_degree(16, 5).size() == 20349);
  const MultiIndexSet trivial = MultiIndexSet::total_degree(7, 0);
  REQUIRE(trivial.size() == 1);
  for (int c : trivial.index(0)) REQUIRE(c == 0);
  REQUIRE_THROWS_AS(MultiIndexSet::total_degree(16, 15), std::invalid_argument);
}

TEST_CASE("graded lexicographic ordering with position lookup") {
  const MultiIndexSet set = MultiIndexSet::total_degree(2, 2);
  const std::vector<std::vector<int>> expected = {{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}};
  REQUIRE(set.size() == expected.size());
  for (std::size_t p = 0; p < set.size(); ++p) {
    auto nu = set.index(p);
    REQUIRE(std::vector<int>(nu.begin(), nu.end()) == expected[p]);
    REQUIRE(set.position(expected[p]) == static_cast<int>(p));
  }
  REQUIRE(set.position(std::vector<int>{3, 0}) == -1);
}

TEST_CASE("n(d,k) bounds k^d/d! <= n <= (k+1)^d") {
  for (int d : {1, 2, 3, 5, 8}) {
    for (int k : {0, 1, 2, 4, 7}) {
      const double n = static_cast<double>(total_degree_count(d, k));
      double factorial = 1.0;
      for (int i = 2; i <= d; ++i) factorial *= i;
      REQUIRE(n >= std::pow(double(k), d) / factorial - 1e-9);
      REQUIRE(n <= std::pow(double(k) + 1.0, d) + 1e-9);
    }
  }
}

TEST_CASE("coupling coefficient matches the quadrature oracle") {
  // beta_0 = int y L_0 L_1 dmu with L_1 = sqrt(3) y.
  const GaussRule gauss;
  const double oracle = gauss.integrate([](double y) { return y * 1.0 * (std::sqrt(3.0) * y); });
  REQUIRE_THAT(legendre_coupling(0), Catch::Matchers::WithinAbs(oracle, 1e-15));
  REQUIRE_THAT(legendre_coupling(0), Catch::Matchers::WithinAbs(1.0 / std::sqrt(3.0), 1e-15));
  // beta_1 against quadrature with L_2 evaluated by the recurrence.
  const double beta1 = gauss.integrate(
      [](double y) { return y * (std::sqrt(3.0) * y) * eval_legendre_1d(2, y); });
  REQUIRE_THAT(legendre_coupling(1), Catch::Matchers::WithinAbs(beta1, 1e-15));
}

TEST_CASE("multiplication matrix structure") {
  const MultiIndexSet set = MultiIndexSet::total_degree(3, 4);
  for (int axis = 1; axis <= 3; ++axis) {
    const Eigen::SparseMatrix<double> m = multiplication_matrix(axis, set);
    for (int c = 0; c < m.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(m, c); it; ++it) {
        REQUIRE(it.row() != it.col());  // zero diagonal
        auto mu = set.index(it.row());
        auto nu = set.index(it.col());
        int diff_axis = -1;
        for (int i = 0; i < 3; ++i) {
          if (mu[i] != nu[i]) {
            REQUIRE(std::abs(mu[i] - nu[i]) == 1);
            REQUIRE(diff_axis == -1);
            diff_axis = i;
          }
        }
        REQUIRE(diff_axis == axis - 1);
        // Symmetry.
        REQUIRE(m.coeff(it.col(), it.row()) == it.value());
      }
  }
}

TEST_CASE("eigenvalues of the d=1, J=2 multiplication matrix are the Gauss nodes") {
  const MultiIndexSet set = MultiIndexSet::total_degree(1, 2);
  const Eigen::MatrixXd m = Eigen::MatrixXd(multiplication_matrix(1, set));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  // Three-point Gauss-Legendre nodes -sqrt(3/5), 0, sqrt(3/5); all in (-1,1).
  REQUIRE_THAT(lambda[0], Catch::Matchers::WithinAbs(-std::sqrt(0.6), 1e-14));
  REQUIRE_THAT(lambda[1], Catch::Matchers::WithinAbs(0.0, 1e-14));
  REQUIRE_THAT(lambda[2], Catch::Matchers::WithinAbs(std::sqrt(0.6), 1e-14));
  REQUIRE(lambda.cwiseAbs().maxCoeff() < 1.0);
}

TEST_CASE("tensor basis evaluation") {
  REQUIRE(eval_legendre_1d(0, 0.37) == 1.0);
  REQUIRE_THAT(eval_legendre_1d(1, 1.0), Catch::Matchers::WithinAbs(std::sqrt(3.0), 1e-15));

  const std::vector<int> e1 = {1, 0, 0};
  const std::vector<double> y = {1.0, -0.3, 0.8};
  REQUIRE_THAT(eval_tensor_legendre(e1, y), Catch::Matchers::WithinAbs(std::sqrt(3.0), 1e-15));
  const std::vector<int> zero = {0, 0, 0};
  REQUIRE(eval_tensor_legendre(zero, y) == 1.0);
}

TEST_CASE("orthonormality under tensor Gauss quadrature") {
  const GaussRule gauss;
  const MultiIndexSet set = MultiIndexSet::total_degree(2, 3);
  // Gram matrix via the 5x5 tensor rule (exact through degree 9 per axis).
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(set.size(), set.size());
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      const std::vector<double> y = {gauss.nodes[a], gauss.nodes[b]};
      const Eigen::VectorXd v = basis_values(set, y);
      gram += 0.25 * gauss.weights[a] * gauss.weights[b] * v * v.transpose();
    }
  REQUIRE((gram - Eigen::MatrixXd::Identity(set.size(), set.size())).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("multiplication matrix is exact below the degree bound") {
  const int d = 3, J = 5;
  const MultiIndexSet set = MultiIndexSet::total_degree(d, J);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  // Random polynomial supported on degrees < J.
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(set.size());
  for (std::size_t p = 0; p < set.size(); ++p)
    if (set.total_degree_of(p) < J) coeffs[p] = unif(rng);

  for (int axis = 1; axis <= d; ++axis) {
    const Eigen::VectorXd product = multiplication_matrix(axis, set) * coeffs;
    for (int s = 0; s < 20; ++s) {
      std::vector<double> y(d);
      for (double& yi : y) yi = unif(rng);
      const Eigen::VectorXd basis = basis_values(set, y);
      const double lhs = product.dot(basis);
      const double rhs = y[axis - 1] * coeffs.dot(basis);
      REQUIRE_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-12));
    }
  }
}

TEST_CASE("monomial re-expansion in the orthonormal basis") {
  const GaussRule gauss;
  for (int n : {0, 1, 2, 3, 4}) {
    const Eigen::VectorXd c = monomial_in_legendre_1d(n);
    for (int m = 0; m <= n; ++m) {
      const double oracle =
          gauss.integrate([&](double y) { return std::pow(y, n) * eval_legendre_1d(m, y); });
      REQUIRE_THAT(c[m], Catch::Matchers::WithinAbs(oracle, 1e-14));
    }
  }
}
