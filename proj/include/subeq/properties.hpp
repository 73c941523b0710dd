#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subeq/certificate.hpp"
#include "subeq/khasminskii.hpp"
#include "subeq/manifold.hpp"
#include "subeq/solver.hpp"
#include "subeq/subequation.hpp"

namespace subeq {

enum class Result { Holds, Fails, Inconclusive, InternalError };
const char* to_string(Result r);

/// Three-valued outcome of a property check. Fails carries a witness, Holds a certificate.
struct Verdict {
  std::string property;
  Result result = Result::Inconclusive;
  std::optional<GridFunction> witness;
  std::vector<double> trace;
  std::string provenance;
  std::optional<Certificate> certificate;
  std::vector<std::string> notes;
};

struct AhlforsOptions {
  double tol = 1e-8;
  /// Outer-tagged grid ends stand for infinity: they belong to the closure of U but neither to its
  /// boundary nor to the membership check. Only meaningful for witnesses that extend past the grid.
  bool outer_is_infinity = false;
  SchemeParams scheme;
};

/// Tests one candidate u against the maximum principle sup_U u <= sup_{bd U} u^+ for
/// H = F_dual united with {r <= 0}. Fails iff membership is certified and the principle breaks.
Verdict ahlfors_violation_check(const Subequation& F_dual, const std::vector<std::size_t>& U, const GridFunction& u,
                                const AhlforsOptions& opt = {});

/// Fails iff u >= 0 is bounded, a member of F_dual at every node with a jet, and not constant.
Verdict liouville_check(const Subequation& F_dual, const GridFunction& u, double tol = 1e-8);

struct CapacityEstimate {
  double estimate = 0;
  std::vector<double> trace;  // discrete Lipschitz constant of each capacitor
  std::vector<int> levels;    // exhaustion index of each capacitor
  bool non_increasing = true;
  Certificate cert;
};

/// Infinity-Laplacian capacitors: u = 0 on K, u = 1 off D_j, F_inf-harmonic between.
CapacityEstimate inf_capacity(const std::vector<std::size_t>& K, const Exhaustion& exhaustion, const ManifoldPtr& M,
                              const SolverParams& params = {});

/// max(u - c, 0) node-wise.
GridFunction truncate_shift(const GridFunction& u, double c);

/// Smallest shift c on [0, sup] with min_{[c, sup]} g >= max_{[0, sup - c]} gbar (sampled). g and gbar are
/// dual-side profiles ({tr A >= g(r)}); truncating by c carries members of the first to the second where
/// positive. nullopt when no shift works.
std::optional<double> transport_shift(const Profile& g, const Profile& gbar, double sup, int samples = 400);

/// Bounded increasing solution of the discrete equation tr A = lambda r on a radial grid (reflected at an
/// inner boundary),
/// normalized to max 1. Built by forward recursion of the grid scheme itself.
GridFunction bounded_radial_solution(const ManifoldPtr& M, double lambda = 1.0);

struct StochasticOptions {
  double lambda = 1.0;
  RadialOdeOptions ode;
  double volume_r_max = 50.0;
  double volume_step = 0.01;
  double witness_radius = 4.0;        // grid for the Liouville witness on the Fail branch
  std::size_t witness_intervals = 1000;
};

/// Radial models: Holds from the ODE or volume oracle, Fails with a Liouville witness when the ODE
/// solution stays bounded, InternalError when the two oracles contradict each other.
Verdict stochastic_completeness(const Warp& warp, int m, const StochasticOptions& opt = {});

/// Falsification search for the maximum principle of dual(F) outside K. Candidates: dual Perron
/// solutions on D_j \ K with random data, their truncations, random bumps, and (when the radial ODE
/// reports a bounded solution) the normalized bounded radial solution with the outer end at infinity.
/// Holds means only "no violation found under this generator".
Verdict ahlfors_search(const Subequation& F, const std::vector<std::size_t>& K, const Exhaustion& exhaustion,
                       const ManifoldPtr& M, std::uint64_t seed = 0, int candidates = 12);

}  // namespace subeq
