#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "subeq/certificate.hpp"
#include "subeq/manifold.hpp"
#include "subeq/solver.hpp"
#include "subeq/subequation.hpp"

namespace subeq {

/// Compact node set K and a comparison function h: h < 0 off K, diverging to -inf along the exhaustion.
struct PairKh {
  std::vector<std::size_t> K;
  GridFunction h;
  Exhaustion exhaustion;
  int from_level = 1;  // level-wise maxima of h decrease strictly from here on

  /// Validates the invariants; throws InputError naming the first violation.
  static PairKh make(std::vector<std::size_t> K, GridFunction h, Exhaustion exhaustion, int from_level = 1);

  std::vector<char> in_K() const;
};

struct Schedule {
  double epsilon = 0.5;
  int stages = 3;
  std::vector<int> gap_levels;  // stage i measures its gap on D_{gap_levels[i]} minus K; default i + 1
  int psi_count = 3;            // approximants psi_k = w_i + 1/k used to confirm monotone decrease in k
  SolverParams solver;
};

struct StageRecord {
  int stage = 0;
  int level = 0;            // chosen exhaustion index j
  double gap = 0;           // max |w_{i+1} - w_i| on the gap region
  double pinch_margin = 0;  // min of w_{i+1} - (1 - 2^{-i-2}) h off K
  double escape = 0;        // max of w_{i+1} outside D_j (must be <= -(i+1))
  double monotone = 0;      // max of w_{i+1} - w_i
  double psi_monotone = 0;  // max increase of u_{j,k} in k
  int candidates = 0;       // levels tried
};

struct Potential {
  GridFunction w;
  std::vector<GridFunction> stages;  // w_1, ..., w_imax
  std::vector<StageRecord> records;
  Certificate cert;
};

/// Staged obstacle construction of a Khas'minskii potential for F on the exterior of K.
Potential build_potential(const Subequation& F, const PairKh& pair, const Schedule& sched);

enum class OdeVerdict { Pass, Fail, Inconclusive };
const char* to_string(OdeVerdict v);

struct RadialOde {
  OdeVerdict verdict = OdeVerdict::Inconclusive;
  std::vector<double> r, w, dw;
  std::string note;
};

struct RadialOdeOptions {
  double lambda = 1.0;
  double r0 = 0.0;
  double r_max = 50.0;
  double threshold = 1e6;
  double window = 0.1;  // trailing fraction of the range used for the trend
};

/// Integrates w'' + (m-1)(g'/g) w' = lambda w outward from w(r0) = 1, w'(r0) = 0.
RadialOde radial_khasminskii_test(const Warp& warp, int m, const RadialOdeOptions& opt = {});

/// w = G(-dist(x, K)) with G convex, 0 < G' < 1 and G(-t) above the level maxima of h.
Solution ekeland_potential(const PairKh& pair);

/// w = -mu log g with the gradient and Hessian bounds that g's Hessian bound implies.
/// Throws PreconditionError when g < 1 or Hess g <= lambda^2 g fails beyond `pre_rel_tol` g.
Solution log_transform(const GridFunction& g, double lambda, double mu, double tol = 1e-6, double pre_rel_tol = 1e-3);

/// Membership of -|x|^2 - |x|^{2-m} (m >= 3) or -|x|^2 + log|x| (m = 2) in {tr A >= lambda r} on a
/// punctured grid. metrics: K_inner, K_outer (the failing annulus), min_residual_outside.
Certificate punctured_example_check(int m, double lambda, const ModelManifold& M, double tol = 1e-8);

/// Explicit potential of punctured_example_check.
double punctured_potential(int m, double r);

/// Grid distance from K along manifold edges.
std::vector<double> distance_from(const ModelManifold& M, const std::vector<std::size_t>& K);

}  // namespace subeq
