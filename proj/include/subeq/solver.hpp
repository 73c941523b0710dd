#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "subeq/certificate.hpp"
#include "subeq/manifold.hpp"
#include "subeq/subequation.hpp"

namespace subeq {

struct SolverParams {
  SchemeParams scheme;
  double membership_tol = 1e-8;
  double change_tol = 1e-10;  // max node change of a sweep
  std::size_t max_sweeps = 20000;
  double init_slack = 1.0;
  bool accelerate = true;  // safeguarded linearized correction between sweeps
  int threads = 1;         // > 1: colored parallel sweeps
};

/// Dirichlet (or obstacle) problem on a grid. Nodes marked active are unknowns; every other node
/// holds the boundary value phi(point). An empty mask means every interior node is active.
struct ProblemSpec {
  Subequation F;
  ManifoldPtr M;
  std::function<double(const Point&)> boundary;
  std::optional<GridFunction> obstacle;
  std::vector<char> active;
  std::optional<GridFunction> initial;  // start from this subsolution instead of a constant
  SolverParams params;
  std::string label = "dirichlet";
};

struct Solution {
  GridFunction u;
  Certificate cert;
};

Solution perron_dirichlet(const ProblemSpec& spec);
Solution solve_obstacle(const ProblemSpec& spec);

/// Discrete F-subharmonicity: G(x, discrete_jet(u)) >= -tol at the given nodes (all interior
/// nodes when empty). Nodes flagged -inf, or whose stencil touches one, are skipped.
Certificate verify_subharmonic(const Subequation& F, const GridFunction& u, std::vector<std::size_t> nodes = {},
                               double tol = 1e-8, const SchemeParams& scheme = {});

/// Zero maximum principle for u + v on the node set K. metrics["precondition_fail"] is 1 when u or v
/// failed its membership check; then the certificate fails without a comparison verdict.
Certificate comparison_check(const Subequation& F, const GridFunction& u, const GridFunction& v,
                             const std::vector<std::size_t>& K, double tol = 1e-8, const SchemeParams& scheme = {});

struct BarrierRequest {
  Subequation F;
  GridFunction rho;                       // defining function, < 0 inside, 0 on the boundary piece
  std::vector<std::size_t> boundary;      // nodes of the boundary piece
  std::vector<std::size_t> collar;        // interior nodes where strictness is certified
  std::vector<double> s_grid;
  std::vector<double> t_grid;
  double margin = 1e-3;                   // required fiber distance to the boundary of F
  double tol = 1e-8;
};

struct Barrier {
  bool found = false;
  GridFunction beta;
  double s = 0, t = 0;
  double best_margin = -1e300;  // largest worst-node margin seen over the search
  Certificate cert;
};

/// beta = t (rho + s rho^2), the first (s, t) in search order such that every t' >= t on the grid is
/// strictly F-subharmonic on the collar.
Barrier make_barrier(const BarrierRequest& req);

}  // namespace subeq
