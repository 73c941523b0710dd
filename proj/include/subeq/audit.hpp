#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "subeq/certificate.hpp"
#include "subeq/subequation.hpp"

namespace subeq {

/// Representative catalog members in dimension m: every constructor with linear, zero and tabulated
/// profiles, and all sigma branches.
std::vector<Subequation> audit_catalog(int m);

/// dual(dual(F)) against F on random jets; jets within tol of either boundary are skipped.
/// metrics: "jets", "disagreements". One check per subequation (violation = disagreement count).
Certificate duality_audit(const std::vector<Subequation>& family, std::size_t jets, std::uint64_t seed = 0,
                          double tol = 1e-9);
Certificate duality_audit(std::size_t jets = 10000, std::uint64_t seed = 0, double tol = 1e-9);

/// Garding eigenvalues on random (A, PSD P), m <= 6, all k: reflection |mu_j(-A) + mu_{k-j+1}(A)| and
/// monotonicity mu_j(A + P) >= mu_j(A), both within tol.
Certificate garding_audit(std::size_t trials = 1000, std::uint64_t seed = 0, double tol = 1e-9);

/// (P), (N), (T) over the catalog for m in {2, 3}.
Certificate axiom_audit(std::size_t jets = 2000, std::uint64_t seed = 0, double tol = 1e-9);

/// Harmonic annulus in R^3 against 2/r - 1 at spacing h and h/2 (log-spaced, largest spacing h).
/// metrics: "error_h", "error_h2", "ratio".
Certificate dirichlet_annulus_oracle(double h = 1.0 / 200, double tol = 1e-8, int threads = 1);

/// Solvers below run at their default membership tolerance; tol only sets what the certificates accept.

/// The two 1D obstacle cases at 401 nodes. metrics: "active_error", "inactive_error",
/// "active_complementarity", "inactive_complementarity".
Certificate obstacle_oracle(double tol = 1e-8, int threads = 1);

/// Ordered boundary data give ordered solutions, certified by comparison_check, over a matrix of
/// problems with strictly increasing profiles and the infinity-Laplacian. metrics: "problems",
/// "violations", "max_excess".
Certificate comparison_matrix(double tol = 1e-8, int threads = 1);

}  // namespace subeq
