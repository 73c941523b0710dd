#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "subeq/jet.hpp"
#include "subeq/numeric_policy.hpp"

namespace subeq {

namespace detail {

template <typename Derived>
bool is_diagonal(const Eigen::MatrixBase<Derived>& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j && a(i, j) != 0) return false;
  return true;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

}  // namespace detail

template <typename Scalar>
struct SymEigenDecomposition {
  EigenListN<Scalar> values;  // ascending
  SymMatrixN<Scalar> vectors;  // columns are eigenvectors
};

/// Spectral factorization A = Q diag(values) Q^t with ascending values.
template <typename Derived>
SymEigenDecomposition<typename Derived::Scalar> eigen_decomposition_sym(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const SymMatrixN<Scalar> s = symmetrized(a);
  const int m = static_cast<int>(s.rows());
  SymEigenDecomposition<Scalar> out;
  if (detail::is_diagonal(s)) {
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return s(x, x) < s(y, y); });
    out.values.resize(m);
    out.vectors = SymMatrixN<Scalar>::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      out.values(i) = s(order[i], order[i]);
      out.vectors(order[i], i) = Scalar(1);
    }
    return out;
  }
  Eigen::SelfAdjointEigenSolver<SymMatrixN<Scalar>> solver(s, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  return out;
}

/// Ascending eigenvalues of a finite symmetric matrix.
template <typename Derived>
EigenListN<typename Derived::Scalar> eigenvalues_sym(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const SymMatrixN<Scalar> s = symmetrized(a);
  if (detail::is_diagonal(s)) {
    EigenListN<Scalar> d = s.diagonal();
    std::sort(d.data(), d.data() + d.size());
    return d;
  }
  Eigen::SelfAdjointEigenSolver<SymMatrixN<Scalar>> solver(s, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
  return solver.eigenvalues();
}

/// All elementary symmetric polynomials e_0..e_m of the entries, by the one-pass recurrence
/// e_j <- e_j + x_i e_{j-1}.
template <typename Scalar>
std::vector<Scalar> elementary_symmetric_all(std::span<const Scalar> x) {
  std::vector<Scalar> e(x.size() + 1, Scalar(0));
  e[0] = Scalar(1);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j >= 1; --j) e[j] += x[i] * e[j - 1];
  return e;
}

template <typename Scalar>
Scalar sigma_k(std::span<const Scalar> lambda, int k) {
  if (k < 1 || k > static_cast<int>(lambda.size()))
    throw InputError("sigma_k needs 1 <= k <= m, got k=" + std::to_string(k));
  for (const Scalar& v : lambda)
    if (!std::isfinite(static_cast<double>(v))) throw InputError("sigma_k argument is not finite");
  return elementary_symmetric_all(lambda)[k];
}

template <typename Derived>
typename Derived::Scalar sigma_k(const Eigen::MatrixBase<Derived>& lambda, int k) {
  using Scalar = typename Derived::Scalar;
  const EigenListN<Scalar> v = lambda;
  return sigma_k(std::span<const Scalar>(v.data(), static_cast<std::size_t>(v.size())), k);
}

/// Coefficients c_0..c_k (ascending powers of t) of t -> sigma_k(lambda + t(1,...,1)).
/// Uses sigma_k(lambda + t 1) = sum_i C(m-k+i, i) sigma_{k-i}(lambda) t^i.
template <typename Scalar>
std::vector<Scalar> garding_polynomial(std::span<const Scalar> lambda, int k) {
  const int m = static_cast<int>(lambda.size());
  if (k < 1 || k > m) throw InputError("Garding eigenvalues need 1 <= k <= m, got k=" + std::to_string(k));
  const std::vector<Scalar> e = elementary_symmetric_all(lambda);
  std::vector<Scalar> c(k + 1);
  for (int i = 0; i <= k; ++i) c[i] = Scalar(detail::binomial(m - k + i, i)) * e[k - i];
  return c;
}

namespace detail {

template <typename Scalar>
Scalar horner(const std::vector<Scalar>& c, Scalar t) {
  Scalar v(0);
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
  return v;
}

template <typename Scalar>
std::vector<Scalar> derivative(const std::vector<Scalar>& c) {
  std::vector<Scalar> d(c.size() - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = Scalar(i) * c[i];
  return d;
}

// Root of c on [a, b] where c(a), c(b) have opposite signs: Newton steps kept inside the bracket,
// bisection otherwise.
template <typename Scalar>
Scalar bracketed_root(const std::vector<Scalar>& c, const std::vector<Scalar>& dc, Scalar a, Scalar b) {
  Scalar fa = horner(c, a);
  Scalar t = (a + b) / 2;
  for (int iter = 0; iter < 200; ++iter) {
    const Scalar ft = horner(c, t);
    if (ft == Scalar(0)) return t;
    if ((ft < 0) == (fa < 0)) {
      a = t;
      fa = ft;
    } else {
      b = t;
    }
    const Scalar dft = horner(dc, t);
    Scalar next = (dft != Scalar(0)) ? t - ft / dft : (a + b) / 2;
    if (!(next > a && next < b)) next = (a + b) / 2;
    const Scalar step = std::abs(next - t);
    t = next;
    if (step <= 4 * std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), std::abs(t)) ||
        std::abs(b - a) <= 4 * std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), std::abs(t)))
      return t;
  }
  return t;
}

// All roots of a real-rooted polynomial, ascending, by interlacing with the roots of its derivative.
template <typename Scalar>
std::vector<Scalar> real_rooted_roots(const std::vector<Scalar>& c) {
  const std::size_t deg = c.size() - 1;
  if (deg == 0) return {};
  if (deg == 1) return {-c[0] / c[1]};
  const std::vector<Scalar> dc = derivative(c);
  const std::vector<Scalar> crit = real_rooted_roots(dc);
  Scalar bound(0);
  for (std::size_t i = 0; i < deg; ++i) bound = std::max(bound, std::abs(c[i] / c[deg]));
  bound += Scalar(1);
  std::vector<Scalar> knots;
  knots.reserve(deg + 1);
  knots.push_back(-bound);
  for (const Scalar& x : crit) knots.push_back(std::clamp(x, -bound, bound));
  knots.push_back(bound);
  std::vector<Scalar> roots;
  roots.reserve(deg);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const Scalar a = knots[i], b = knots[i + 1];
    const Scalar fa = horner(c, a), fb = horner(c, b);
    if (fa == Scalar(0)) {
      roots.push_back(a);
    } else if (fb == Scalar(0)) {
      roots.push_back(b);
    } else if ((fa < 0) != (fb < 0)) {
      roots.push_back(bracketed_root(c, dc, a, b));
    } else {
      // no sign change: a multiple root sits on a critical endpoint
      roots.push_back(std::abs(fa) <= std::abs(fb) ? a : b);
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace detail

/// Garding eigenvalues mu_1^{(k)} <= ... <= mu_k^{(k)} of sigma_k in direction (1,...,1): the
/// negatives of the k real roots of t -> sigma_k(lambda(A) + t 1).
template <typename Derived>
EigenListN<typename Derived::Scalar> garding_eigenvalues(const Eigen::MatrixBase<Derived>& a, int k,
                                                        const NumericPolicy& policy = default_policy()) {
  using Scalar = typename Derived::Scalar;
  const EigenListN<Scalar> lambda = eigenvalues_sym(a);
  const int m = static_cast<int>(lambda.size());
  if (k < 1 || k > m) throw InputError("Garding eigenvalues need 1 <= k <= m, got k=" + std::to_string(k));
  if (k == m) return lambda;
  // shift to the centroid so root magnitudes stay comparable to the spread of lambda
  const Scalar shift = lambda.mean();
  EigenListN<Scalar> centred = lambda.array() - shift;
  const std::vector<Scalar> c =
      garding_polynomial(std::span<const Scalar>(centred.data(), static_cast<std::size_t>(m)), k);
  const std::vector<Scalar> roots = detail::real_rooted_roots(c);
  const Scalar norm = lambda.cwiseAbs().maxCoeff();
  const Scalar budget = Scalar(policy.garding_residual_rel) * (Scalar(1) + std::pow(norm, k)) *
                        Scalar(detail::binomial(m, k));
  for (const Scalar& t : roots) {
    const Scalar res = std::abs(detail::horner(c, t));
    if (!(res <= budget)) {
      std::ostringstream os;
      os << "Garding root finder failed (k=" << k << ", residual " << res << "); coefficients:";
      for (const Scalar& ci : c) os << ' ' << ci;
      throw NumericalError(os.str());
    }
  }
  EigenListN<Scalar> mu(k);
  for (int i = 0; i < k; ++i) mu(i) = -roots[k - 1 - i] + shift;
  return mu;
}

/// Sum over an orthonormal k-frame of A(v_i, v_i); the frame vectors are the columns of `frame`.
template <typename DerivedA, typename DerivedV>
typename DerivedA::Scalar trace_on_frame(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedV>& frame,
                                         const NumericPolicy& policy = default_policy()) {
  using Scalar = typename DerivedA::Scalar;
  const SymMatrixN<Scalar> s = symmetrized(a);
  if (frame.rows() != s.rows() || frame.cols() < 1 || frame.cols() > s.rows())
    throw InputError("frame must consist of 1..m vectors of length m");
  const auto gram = (frame.transpose() * frame).eval();
  const auto identity = decltype(gram)::Identity(gram.rows(), gram.cols());
  if ((gram - identity).cwiseAbs().maxCoeff() > policy.frame_orthonormality)
    throw InputError("frame is not orthonormal");
  return (frame.transpose() * s * frame).trace();
}

/// Coefficient function a(t) of div(a(|grad u|) grad u) together with its derivative.
struct AProfile {
  std::string name;
  std::function<double(double)> a;
  std::function<double(double)> da;

  double lambda1(double t) const { return a(t) + t * da(t); }  // along p
  double lambda2(double t) const { return a(t); }              // on p-perp

  static AProfile laplacian() {
    return {"laplacian", [](double) { return 1.0; }, [](double) { return 0.0; }};
  }
  static AProfile mean_curvature() {
    return {"mean_curvature", [](double t) { return 1.0 / std::sqrt(1.0 + t * t); },
            [](double t) { return -t / std::pow(1.0 + t * t, 1.5); }};
  }
  /// a(t) = t^{k-2}
  static AProfile k_laplacian(double k) {
    return {"k_laplacian", [k](double t) { return std::pow(t, k - 2.0); },
            [k](double t) { return (k - 2.0) * std::pow(t, k - 3.0); }};
  }
};

/// T(p) = lambda1(|p|) Pi_p + lambda2(|p|) Pi_{p-perp}.
template <typename Derived>
SymMatrixN<typename Derived::Scalar> quasilinear_T(const Eigen::MatrixBase<Derived>& p, const AProfile& profile) {
  using Scalar = typename Derived::Scalar;
  check_dim(static_cast<int>(p.size()));
  if (!p.allFinite()) throw InputError("quasilinear_T: gradient is not finite");
  const Scalar t = p.norm();
  if (!(t > Scalar(0))) throw DomainError("quasilinear_T is undefined at p = 0");
  const Scalar l1 = Scalar(profile.lambda1(static_cast<double>(t)));
  const Scalar l2 = Scalar(profile.lambda2(static_cast<double>(t)));
  if (!(l1 >= Scalar(0)) || !(l2 > Scalar(0)))
    throw DomainError("quasilinear profile '" + profile.name + "' violates lambda1 >= 0, lambda2 > 0");
  const VectorN<Scalar> e = p / t;
  const SymMatrixN<Scalar> proj = e * e.transpose();
  const int m = static_cast<int>(p.size());
  return l1 * proj + l2 * (SymMatrixN<Scalar>::Identity(m, m) - proj);
}

}  // namespace subeq
