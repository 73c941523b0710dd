#pragma once

#include <cmath>
#include <span>
#include <string>

#include <Eigen/Core>

#include "subeq/errors.hpp"

namespace subeq {

/// Fiber dimension cap. Fixed-capacity storage keeps the kernels allocation-free.
inline constexpr int kMaxDim = 8;

template <typename Scalar>
using VectorN = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

/// Symmetric m x m matrix, 1 <= m <= 8. Symmetry is established by the factories below.
template <typename Scalar>
using SymMatrixN = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

/// Ascending eigenvalue list.
template <typename Scalar>
using EigenListN = VectorN<Scalar>;

using Vector = VectorN<double>;
/// General (not necessarily symmetric) square matrix of the same capacity.
using Matrix = SymMatrixN<double>;
using SymMatrix = SymMatrixN<double>;
using EigenList = EigenListN<double>;

inline void check_dim(int m) {
  if (m < 1 || m > kMaxDim) throw InputError("dimension must lie in [1, 8], got " + std::to_string(m));
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
  return x.allFinite();
}

/// Builds a symmetric matrix from its upper triangle given row-major: (0,0),(0,1),...,(0,m-1),(1,1),...
template <typename Scalar>
SymMatrixN<Scalar> sym_from_upper(int m, std::span<const Scalar> upper) {
  check_dim(m);
  if (static_cast<int>(upper.size()) != m * (m + 1) / 2)
    throw InputError("upper triangle of a " + std::to_string(m) + "x" + std::to_string(m) + " matrix needs " +
                     std::to_string(m * (m + 1) / 2) + " entries");
  SymMatrixN<Scalar> a(m, m);
  std::size_t idx = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      a(i, j) = upper[idx];
      a(j, i) = upper[idx];
      ++idx;
    }
  if (!a.allFinite()) throw InputError("symmetric matrix has a non-finite entry");
  return a;
}

/// Returns (A + A^t)/2 after checking that A is finite and symmetric to `tol` (relative to its size).
template <typename Derived>
SymMatrixN<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& a, double tol = 1e-12) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw InputError("symmetric matrix must be square");
  check_dim(static_cast<int>(a.rows()));
  if (!a.allFinite()) throw InputError("symmetric matrix has a non-finite entry");
  const Scalar scale = Scalar(1) + a.cwiseAbs().maxCoeff();
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol * scale) throw InputError("matrix is not symmetric");
  return (a + a.transpose()) / Scalar(2);
}

/// A 2-jet (r, p, A) in an orthonormal frame at a base point.
template <typename Scalar>
struct BasicJet {
  Scalar r{0};
  VectorN<Scalar> p;
  SymMatrixN<Scalar> A;

  BasicJet() = default;
  BasicJet(Scalar r_, VectorN<Scalar> p_, SymMatrixN<Scalar> a_) : r(r_), p(std::move(p_)), A(std::move(a_)) {
    if (p.size() != A.rows() || A.rows() != A.cols()) throw InputError("jet gradient and Hessian dimensions differ");
    check_dim(static_cast<int>(p.size()));
  }

  static BasicJet zero(int m) {
    check_dim(m);
    return BasicJet(Scalar(0), VectorN<Scalar>::Zero(m), SymMatrixN<Scalar>::Zero(m, m));
  }

  int dim() const { return static_cast<int>(p.size()); }

  bool finite() const { return std::isfinite(static_cast<double>(r)) && p.allFinite() && A.allFinite(); }

  BasicJet operator-() const { return BasicJet(-r, -p, -A); }
  BasicJet operator+(const BasicJet& o) const { return BasicJet(r + o.r, p + o.p, A + o.A); }
  BasicJet operator-(const BasicJet& o) const { return BasicJet(r - o.r, p - o.p, A - o.A); }
  BasicJet operator*(Scalar s) const { return BasicJet(r * s, p * s, A * s); }
};

template <typename Scalar>
BasicJet<Scalar> operator*(Scalar s, const BasicJet<Scalar>& j) {
  return j * s;
}

using Jet = BasicJet<double>;

/// Number of real coordinates of a fiber J^2 in dimension m.
inline int fiber_coordinate_count(int m) { return 1 + m + m * (m + 1) / 2; }

/// Flat fiber coordinates (r, p, A) with off-diagonal entries weighted by sqrt(2),
/// so the Euclidean norm of the coordinates equals sqrt(r^2 + |p|^2 + |A|_F^2).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> to_fiber_coordinates(const BasicJet<Scalar>& j) {
  const int m = j.dim();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c(fiber_coordinate_count(m));
  int idx = 0;
  c(idx++) = j.r;
  for (int i = 0; i < m; ++i) c(idx++) = j.p(i);
  const Scalar root2 = std::sqrt(Scalar(2));
  for (int i = 0; i < m; ++i)
    for (int k = i; k < m; ++k) c(idx++) = (i == k) ? j.A(i, k) : root2 * j.A(i, k);
  return c;
}

template <typename Scalar>
BasicJet<Scalar> from_fiber_coordinates(int m, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& c) {
  if (c.size() != fiber_coordinate_count(m)) throw InputError("fiber coordinate vector has the wrong length");
  BasicJet<Scalar> j = BasicJet<Scalar>::zero(m);
  int idx = 0;
  j.r = c(idx++);
  for (int i = 0; i < m; ++i) j.p(i) = c(idx++);
  const Scalar root2 = std::sqrt(Scalar(2));
  for (int i = 0; i < m; ++i)
    for (int k = i; k < m; ++k) {
      const Scalar v = (i == k) ? c(idx) : c(idx) / root2;
      j.A(i, k) = v;
      j.A(k, i) = v;
      ++idx;
    }
  return j;
}

/// Flat fiber norm sqrt(r^2 + |p|^2 + |A|_F^2).
template <typename Scalar>
Scalar fiber_norm(const BasicJet<Scalar>& j) {
  return std::sqrt(j.r * j.r + j.p.squaredNorm() + j.A.squaredNorm());
}

}  // namespace subeq
