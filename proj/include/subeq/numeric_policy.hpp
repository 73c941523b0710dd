#pragma once

namespace subeq {

/// Every tolerance used by the library lives here so that suites are reproducible.
struct NumericPolicy {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;

  // spectral kernels
  double eig_reconstruction_rel = 1e-12;
  double garding_residual_rel = 1e-10;
  double frame_orthonormality = 1e-10;

  // solvers
  double membership_tol = 1e-8;
  double convergence_tol = 1e-10;
  double comparison_slack = 1e-8;

  double scaled(double magnitude) const { return abs_tol + rel_tol * magnitude; }
};

inline const NumericPolicy& default_policy() {
  static const NumericPolicy policy{};
  return policy;
}

}  // namespace subeq
