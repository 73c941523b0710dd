#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "subeq/spectral.hpp"

using namespace subeq;

namespace {

SymMatrix diag3(double a, double b, double c) {
  SymMatrix d = SymMatrix::Zero(3, 3);
  d(0, 0) = a;
  d(1, 1) = b;
  d(2, 2) = c;
  return d;
}

std::vector<double> to_vec(const EigenList& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("eigenvalues of identity and diagonal matrices") {
  const EigenList id = eigenvalues_sym(SymMatrix(SymMatrix::Identity(3, 3)));
  CHECK(id.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(id(i) == doctest::Approx(1.0));
  const EigenList d = eigenvalues_sym(diag3(3, 1, 2));
  CHECK(d(0) == 1.0);
  CHECK(d(1) == 2.0);
  CHECK(d(2) == 3.0);
}

TEST_CASE("eigenvalues match a characteristic polynomial root oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = oracle::random_symmetric(4, rng);
    const EigenList mine = eigenvalues_sym(a);
    const std::vector<double> ref = oracle::charpoly_eigenvalues(a);
    REQUIRE(ref.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(mine(i) - ref[i]) <= 1e-9);
  }
}

TEST_CASE("eigen decomposition reconstructs the matrix") {
  std::mt19937_64 rng(12);
  for (int m = 1; m <= 8; ++m) {
    const Eigen::MatrixXd a = oracle::random_symmetric(m, rng, 3.0);
    const auto eig = eigen_decomposition_sym(a);
    const Eigen::MatrixXd back = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    CHECK((back - a).norm() <= 1e-12 * (1 + a.norm()));
    for (int i = 1; i < m; ++i) CHECK(eig.values(i - 1) <= eig.values(i));
  }
}

TEST_CASE("non-finite and malformed input is rejected") {
  SymMatrix a = SymMatrix::Identity(2, 2);
  a(0, 1) = a(1, 0) = std::nan("");
  CHECK_THROWS_AS(eigenvalues_sym(a), InputError);
  SymMatrix b = SymMatrix::Zero(2, 2);
  b(0, 1) = 1.0;
  CHECK_THROWS_AS(eigenvalues_sym(b), InputError);
  CHECK_THROWS_AS(eigenvalues_sym(Eigen::MatrixXd::Identity(9, 9)), InputError);
  const std::array<double, 2> lam{1.0, 2.0};
  CHECK_THROWS_AS(sigma_k(std::span<const double>(lam), 3), InputError);
  CHECK_THROWS_AS(sigma_k(std::span<const double>(lam), 0), InputError);
}

TEST_CASE("Weyl monotonicity under PSD perturbation") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = 1 + trial % 6;
    const Eigen::MatrixXd a = oracle::random_symmetric(m, rng);
    const Eigen::MatrixXd p = oracle::random_psd(m, rng, 0.5);
    const EigenList before = eigenvalues_sym(a), after = eigenvalues_sym(Eigen::MatrixXd(a + p));
    for (int j = 0; j < m; ++j) CHECK(after(j) >= before(j) - 1e-9);
  }
}

TEST_CASE("sigma_k of (1,2,3)") {
  const std::array<double, 3> lam{1.0, 2.0, 3.0};
  const std::span<const double> s(lam);
  CHECK(sigma_k(s, 1) == 6.0);
  CHECK(sigma_k(s, 2) == 11.0);
  CHECK(sigma_k(s, 3) == 6.0);
}

TEST_CASE("sigma_k agrees with subset enumeration") {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + trial % 8;
    std::vector<double> x(m);
    for (double& v : x) v = n(rng);
    for (int k = 1; k <= m; ++k) {
      const double ref = oracle::sigma_brute(x, k);
      CHECK(std::abs(sigma_k(std::span<const double>(x), k) - ref) <= 1e-10 * (1 + std::abs(ref)) * 20);
    }
  }
}

TEST_CASE("Garding eigenvalues on diag(1,2,3)") {
  const SymMatrix a = diag3(1, 2, 3);
  const EigenList k1 = garding_eigenvalues(a, 1);
  REQUIRE(k1.size() == 1);
  CHECK(k1(0) == doctest::Approx(2.0).epsilon(1e-14));
  // 3t^2 + 12t + 11 = 0
  const EigenList k2 = garding_eigenvalues(a, 2);
  REQUIRE(k2.size() == 2);
  const double disc = std::sqrt(144.0 - 4 * 3 * 11);
  const double t_hi = (-12 + disc) / 6, t_lo = (-12 - disc) / 6;
  CHECK(std::abs(k2(0) - (-t_hi)) <= 1e-12);
  CHECK(std::abs(k2(1) - (-t_lo)) <= 1e-12);
  CHECK(std::abs(k2(0) - (2 - 1 / std::sqrt(3.0))) <= 1e-12);
  const EigenList k3 = garding_eigenvalues(a, 3);
  CHECK(to_vec(k3) == std::vector<double>{1, 2, 3});
}

TEST_CASE("Garding eigenvalues with k = m are the eigenvalues (det(A + tI) oracle)") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd a = oracle::random_symmetric(4, rng);
    const EigenList mu = garding_eigenvalues(a, 4);
    std::vector<double> roots = oracle::scan_roots(
        [&](double t) { return (a + t * Eigen::MatrixXd::Identity(4, 4)).determinant(); }, -a.norm() - 1,
        a.norm() + 1, 40000);
    REQUIRE(roots.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(mu(i) - (-roots[3 - i])) <= 1e-9);
  }
}

TEST_CASE("Garding eigenvalues match a brute-force root oracle") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 2 + trial % 4;
    const Eigen::MatrixXd a = oracle::random_symmetric(m, rng);
    const std::vector<double> lam = to_vec(eigenvalues_sym(a));
    for (int k = 1; k <= m; ++k) {
      const EigenList mu = garding_eigenvalues(a, k);
      const std::vector<double> ref = oracle::garding_brute(lam, k);
      REQUIRE(static_cast<int>(ref.size()) == k);
      for (int j = 0; j < k; ++j) CHECK(std::abs(mu(j) - ref[j]) <= 1e-8);
    }
  }
}

TEST_CASE("Garding eigenvalues of degenerate spectra are repeated values") {
  const SymMatrix a = diag3(2, 2, 2);
  const EigenList mu = garding_eigenvalues(a, 2);
  CHECK(mu(0) == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(mu(1) == doctest::Approx(2.0).epsilon(1e-7));
  const EigenList z = garding_eigenvalues(SymMatrix(SymMatrix::Zero(5, 5)), 3);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(z(j)) <= 1e-7);
}

TEST_CASE("Garding duality, monotonicity and shift equivariance") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 1 + trial % 6;
    const Eigen::MatrixXd a = oracle::random_symmetric(m, rng);
    const Eigen::MatrixXd p = oracle::random_psd(m, rng, 0.5);
    std::uniform_real_distribution<double> u(-3, 3);
    const double c = u(rng);
    for (int k = 1; k <= m; ++k) {
      const EigenList mu = garding_eigenvalues(a, k);
      const EigenList neg = garding_eigenvalues(Eigen::MatrixXd(-a), k);
      const EigenList up = garding_eigenvalues(Eigen::MatrixXd(a + p), k);
      const EigenList shifted = garding_eigenvalues(Eigen::MatrixXd(a + c * Eigen::MatrixXd::Identity(m, m)), k);
      for (int j = 0; j < k; ++j) {
        CHECK(std::abs(neg(j) + mu(k - 1 - j)) <= 1e-9);
        CHECK(up(j) >= mu(j) - 1e-9);
        CHECK(std::abs(shifted(j) - mu(j) - c) <= 1e-9);
      }
    }
  }
}

TEST_CASE("Garding eigenvalues are invariant under permutation of the eigenvalues") {
  std::mt19937_64 rng(18);
  const Eigen::MatrixXd a = oracle::random_symmetric(5, rng);
  const EigenList lam = eigenvalues_sym(a);
  SymMatrix d = SymMatrix::Zero(5, 5);
  const int perm[5] = {3, 0, 4, 1, 2};
  for (int i = 0; i < 5; ++i) d(i, i) = lam(perm[i]);
  for (int k = 1; k <= 5; ++k) {
    const EigenList x = garding_eigenvalues(a, k), y = garding_eigenvalues(d, k);
    for (int j = 0; j < k; ++j) CHECK(std::abs(x(j) - y(j)) <= 1e-9);
  }
}

TEST_CASE("trace on frames") {
  const SymMatrix a = diag3(1, 2, 3);
  CHECK(trace_on_frame(a, Eigen::MatrixXd::Identity(3, 3)) == doctest::Approx(6.0));
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(3, 2);
  v(0, 0) = 1;
  v(1, 1) = 1;
  CHECK(trace_on_frame(a, v) == doctest::Approx(3.0));
  Eigen::MatrixXd bad = v;
  bad(0, 1) = 0.5;
  CHECK_THROWS_AS(trace_on_frame(a, bad), InputError);
}

TEST_CASE("minimum of the frame trace approaches the partial eigenvalue sum") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> n(0, 1);
  const Eigen::MatrixXd a = oracle::random_symmetric(4, rng);
  const EigenList lam = eigenvalues_sym(a);
  const int k = 2;
  double best = 1e300;
  for (int s = 0; s < 10000; ++s) {
    Eigen::MatrixXd g(4, k);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < k; ++j) g(i, j) = n(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() * Eigen::MatrixXd::Identity(4, k);
    best = std::min(best, trace_on_frame(a, q));
  }
  const double partial = lam(0) + lam(1);
  CHECK(best >= partial - 1e-12);
  CHECK(best - partial <= 1e-2 * (1 + std::abs(partial)) * 10);
}

TEST_CASE("quasilinear T(p)") {
  Vector p(2);
  p << 1.0, 0.0;
  const SymMatrix t_lap = quasilinear_T(p, AProfile::laplacian());
  CHECK((t_lap - SymMatrix::Identity(2, 2)).norm() <= 1e-15);

  const EigenList mc = eigenvalues_sym(quasilinear_T(p, AProfile::mean_curvature()));
  CHECK(std::abs(mc(0) - std::pow(2.0, -1.5)) <= 1e-14);
  CHECK(std::abs(mc(1) - std::pow(2.0, -0.5)) <= 1e-14);

  Vector q(3);
  q << 0.0, 2.0, 0.0;
  const EigenList kl = eigenvalues_sym(quasilinear_T(q, AProfile::k_laplacian(3)));
  CHECK(std::abs(kl(0) - 2.0) <= 1e-12);
  CHECK(std::abs(kl(1) - 2.0) <= 1e-12);
  CHECK(std::abs(kl(2) - 4.0) <= 1e-12);

  CHECK_THROWS_AS(quasilinear_T(Vector(Vector::Zero(2)), AProfile::laplacian()), DomainError);
}

TEST_CASE("T(p) acts by lambda1 on p and lambda2 on its complement") {
  std::mt19937_64 rng(20);
  std::normal_distribution<double> n(0, 1);
  for (const AProfile& prof : {AProfile::mean_curvature(), AProfile::k_laplacian(3.5), AProfile::laplacian()}) {
    for (int trial = 0; trial < 50; ++trial) {
      Vector p(4);
      for (int i = 0; i < 4; ++i) p(i) = n(rng);
      const double t = p.norm();
      const SymMatrix T = quasilinear_T(p, prof);
      CHECK((T * p - prof.lambda1(t) * p).norm() <= 1e-12 * (1 + t) * (1 + prof.lambda1(t)));
      Vector q(4);
      for (int i = 0; i < 4; ++i) q(i) = n(rng);
      q -= p * (p.dot(q) / (t * t));
      CHECK((T * q - prof.lambda2(t) * q).norm() <= 1e-12 * (1 + q.norm()) * (1 + prof.lambda2(t)));
    }
  }
}
