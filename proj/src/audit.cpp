#include "subeq/audit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "subeq/errors.hpp"
#include "subeq/manifold.hpp"
#include "subeq/solver.hpp"
#include "subeq/spectral.hpp"

namespace subeq {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::MatrixXd random_symmetric(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) a(i, j) = a(j, i) = n(rng);
  return a;
}

Eigen::MatrixXd random_psd(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 0.5);
  Eigen::MatrixXd b(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) b(i, j) = n(rng);
  return b * b.transpose();
}

std::vector<std::size_t> every_node(const ModelManifold& M) {
  std::vector<std::size_t> out(M.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

}  // namespace

std::vector<Subequation> audit_catalog(int m) {
  const Profile lin = Profile::linear(1.0), zero = Profile::constant(0.0);
  const Profile table = Profile::tabulated({-2, -1, 0, 1, 3}, {-3, -1.5, 0, 0.5, 2});
  const Profile xi = Profile::tabulated({-2, 0, 2}, {3, 1, 0.5});
  std::vector<Subequation> out = {
      eikonal(m, Profile::constant(1.0)),
      eikonal(m, xi),
      laplace(m, lin),
      laplace(m, table),
      hessian_branch(m, 1, zero),
      hessian_branch(m, m, lin),
      plurisub_trace(m, 1, table),
      plurisub_trace(m, m > 1 ? m - 1 : 1, lin),
      quasilinear(m, AProfile::mean_curvature(), lin),
      quasilinear(m, AProfile::laplacian(), table),
      inf_laplacian(m, zero),
      inf_laplacian(m, lin),
  };
  for (int k = 1; k <= m; ++k)
    for (int j = 1; j <= k; ++j) out.push_back(sigma_branch(m, j, k, lin));
  return out;
}

Certificate duality_audit(const std::vector<Subequation>& family, std::size_t jets, std::uint64_t seed, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  Certificate cert("duality_involution", 0.0);
  std::size_t total = 0, bad_total = 0;
  for (std::size_t f = 0; f < family.size(); ++f) {
    const Subequation& F = family[f];
    const Subequation DD = F.dual().dual();
    std::mt19937_64 rng(seed + 7919 * f);
    const JetSampler sample = gaussian_jet_sampler(F.dim());
    const Point x = Point::origin(F.dim());
    std::size_t bad = 0;
    for (std::size_t n = 0; n < jets; ++n) {
      const Jet j = sample(rng);
      const double a = F.value(x, j), b = DD.value(x, j);
      if (std::abs(a) <= tol || std::abs(b) <= tol) continue;
      ++total;
      if ((a > 0) != (b > 0)) ++bad;
    }
    bad_total += bad;
    cert.check(static_cast<double>(bad), F.describe() + ": " + std::to_string(bad) + " disagreements");
  }
  cert.metrics["jets"] = static_cast<double>(total);
  cert.metrics["disagreements"] = static_cast<double>(bad_total);
  cert.metrics["subequations"] = static_cast<double>(family.size());
  cert.wall_time = seconds_since(t0);
  return cert;
}

Certificate duality_audit(std::size_t jets, std::uint64_t seed, double tol) {
  std::vector<Subequation> family;
  for (int m = 2; m <= 4; ++m)
    for (Subequation& F : audit_catalog(m)) family.push_back(std::move(F));
  return duality_audit(family, jets, seed, tol);
}

Certificate garding_audit(std::size_t trials, std::uint64_t seed, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  Certificate cert("garding_identity", tol);
  std::mt19937_64 rng(seed);
  double worst_reflect = 0, worst_mono = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const int m = 1 + static_cast<int>(t % 6);
    const Eigen::MatrixXd a = random_symmetric(m, rng);
    const Eigen::MatrixXd p = random_psd(m, rng);
    const Eigen::MatrixXd neg = -a, up = a + p;
    for (int k = 1; k <= m; ++k) {
      const EigenList mu = garding_eigenvalues(a, k);
      const EigenList mneg = garding_eigenvalues(neg, k);
      const EigenList mup = garding_eigenvalues(up, k);
      for (int j = 0; j < k; ++j) {
        const double reflect = std::abs(mneg(j) + mu(k - 1 - j));
        const double drop = mu(j) - mup(j);
        worst_reflect = std::max(worst_reflect, reflect);
        worst_mono = std::max(worst_mono, drop);
        cert.check(reflect, "reflection, m=" + std::to_string(m) + " k=" + std::to_string(k));
        cert.check(drop, "monotonicity, m=" + std::to_string(m) + " k=" + std::to_string(k));
      }
    }
  }
  cert.metrics["max_reflection_error"] = worst_reflect;
  cert.metrics["max_monotonicity_drop"] = worst_mono;
  cert.metrics["trials"] = static_cast<double>(trials);
  cert.wall_time = seconds_since(t0);
  return cert;
}

Certificate axiom_audit(std::size_t jets, std::uint64_t seed, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  Certificate cert("axioms_PNT", 0.0);
  std::uint64_t s = seed;
  double violations = 0;
  for (int m = 2; m <= 3; ++m)
    for (const Subequation& F : audit_catalog(m))
      for (const Subequation& G : {F, F.dual()}) {
        const Certificate a = audit_PNT(G, gaussian_jet_sampler(m), jets, s++, Point::origin(m), tol);
        const double v = a.metrics.at("violations_P") + a.metrics.at("violations_N") + a.metrics.at("violations_T");
        violations += v;
        cert.check(v, G.describe());
      }
  cert.metrics["violations"] = violations;
  cert.wall_time = seconds_since(t0);
  return cert;
}

Certificate dirichlet_annulus_oracle(double h, double tol, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  Certificate cert("dirichlet_annulus", tol);
  // log spacing on [1, 2] has its largest step at r = 2: n = ceil(2 ln 2 / h)
  const std::size_t n = static_cast<std::size_t>(std::ceil(2 * std::log(2.0) / h));
  auto error_at = [&](std::size_t intervals) {
    ProblemSpec spec{laplace(3, Profile::constant(0)), ModelManifold::punctured(3, 1.0, 2.0, intervals)};
    spec.boundary = [](const Point& x) { return x.coords(0) < 1.5 ? 1.0 : 0.0; };
    spec.params.threads = threads;
    const Solution s = perron_dirichlet(spec);
    cert.merge(s.cert, "annulus " + std::to_string(intervals));
    double e = 0;
    for (std::size_t i = 0; i < s.u.size(); ++i) e = std::max(e, std::abs(s.u[i] - (2 / spec.M->radius(i) - 1)));
    return e;
  };
  const double e1 = error_at(n), e2 = error_at(2 * n);
  const double ratio = e1 / e2;
  cert.check(e1 - 5e-3, "error " + std::to_string(e1) + " above 5e-3");
  cert.check(3.5 - ratio, "refinement ratio " + std::to_string(ratio) + " below 3.5");
  cert.check(ratio - 4.5, "refinement ratio " + std::to_string(ratio) + " above 4.5");
  cert.metrics["error_h"] = e1;
  cert.metrics["error_h2"] = e2;
  cert.metrics["ratio"] = ratio;
  cert.metrics["intervals"] = static_cast<double>(n);
  cert.wall_time = seconds_since(t0);
  return cert;
}

Certificate obstacle_oracle(double tol, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  Certificate cert("obstacle_oracles", tol);
  const auto M = ModelManifold::flat_box(1, {{0, 1}}, 1.0 / 400);
  const Subequation convex = laplace(1, Profile::constant(0));
  auto run = [&](const std::string& name, const std::function<double(double)>& g, double data,
                 const std::function<double(double)>& exact, bool data_from_g) {
    ProblemSpec spec{convex, M};
    spec.obstacle = GridFunction::from(M, [&](const Point& x) { return g(x.coords(0)); });
    spec.boundary = [&](const Point& x) { return data_from_g ? g(x.coords(0)) : data; };
    spec.params.threads = threads;
    spec.label = name;
    const Solution s = solve_obstacle(spec);
    double err = 0;
    for (std::size_t i = 0; i < M->size(); ++i) err = std::max(err, std::abs(s.u[i] - exact(M->point(i).coords(0))));
    const double comp = s.cert.metrics.at("complementarity");
    cert.merge(s.cert, name);
    cert.check(err - 1e-3, name + " error " + std::to_string(err));
    cert.check(comp - 1e-8, name + " complementarity " + std::to_string(comp));
    cert.metrics[name + "_error"] = err;
    cert.metrics[name + "_complementarity"] = comp;
  };
  // convex obstacle x^2 with matching data: the obstacle itself, contact everywhere
  run("active", [](double x) { return x * x; }, 0, [](double x) { return x * x; }, true);
  // concave cap -(x - 1/2)^2 with data -1/4: the constant -1/4, contact only at the apex
  run("inactive", [](double x) { return -(x - 0.5) * (x - 0.5); }, -0.25, [](double) { return -0.25; }, false);
  cert.wall_time = seconds_since(t0);
  return cert;
}

Certificate comparison_matrix(double tol, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  Certificate cert("comparison_matrix", 0.0);
  struct Case {
    std::string name;
    Subequation F;
    ManifoldPtr M;
    std::function<double(const Point&)> data;
  };
  const Profile lin = Profile::linear(1.0);
  auto radial_data = [](double split, double inner, double outer) {
    return [=](const Point& x) { return x.coords(0) < split ? inner : outer; };
  };
  const std::vector<Case> cases = {
      {"segment laplace r", laplace(1, lin), ModelManifold::flat_box(1, {{0, 1}}, 0.01),
       [](const Point& x) { return x.coords(0); }},
      {"square laplace r", laplace(2, lin), ModelManifold::flat_box(2, {{-1, 1}, {-1, 1}}, 0.1),
       [](const Point& x) { return x.coords(0) * x.coords(0) - 0.5 * x.coords(1) + 1; }},
      {"hyperbolic laplace r", laplace(2, lin), ModelManifold::radial(2, Warp::hyperbolic(), 0.5, 4.0, 140),
       radial_data(2, 1.0, 0.0)},
      {"punctured laplace 2r", laplace(3, Profile::linear(2.0)), ModelManifold::punctured(3, 1.0, 2.0, 100),
       radial_data(1.5, 0.5, -0.5)},
      {"square convex branch", hessian_branch(2, 1, lin), ModelManifold::flat_box(2, {{-1, 1}, {-1, 1}}, 0.25),
       [](const Point& x) { return 0.5 * x.coords(0) + x.coords(1) * x.coords(1); }},
      {"hyperbolic infinity-Laplacian", inf_laplacian(2, Profile::constant(0)),
       ModelManifold::radial(2, Warp::hyperbolic(), 1.0, 5.0, 100), radial_data(3, 0.0, 1.0)},
      {"segment infinity-Laplacian r", inf_laplacian(1, lin), ModelManifold::flat_box(1, {{0, 1}}, 0.02),
       [](const Point& x) { return 0.3 * x.coords(0); }},
  };
  int problems = 0, violations = 0;
  double excess = -1e300;
  for (const Case& c : cases)
    for (double shift : {0.05, 0.5}) {
      auto solve = [&](double s) {
        ProblemSpec spec{c.F, c.M};
        spec.boundary = [&, s](const Point& x) { return c.data(x) + s; };
            spec.params.threads = threads;
        spec.label = c.name;
        return perron_dirichlet(spec);
      };
      Solution low, high;
      try {
        low = solve(0.0);
        high = solve(shift);
      } catch (const std::exception& e) {
        throw NumericalError(c.name + ": " + e.what());
      }
      std::vector<double> neg(high.u.size());
      for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -high.u[i];
      const Certificate cmp = comparison_check(c.F, low.u, GridFunction(c.M, neg), every_node(*c.M), tol);
      ++problems;
      const bool bad = !cmp.pass();
      violations += bad;
      excess = std::max(excess, cmp.metrics.count("max") ? cmp.metrics.at("max") : 0.0);
      cert.check(bad ? 1.0 : 0.0, c.name + " shift " + std::to_string(shift) + ": " +
                                      (cmp.violations.empty() ? std::string("fails") : cmp.violations.front()));
    }
  cert.metrics["problems"] = problems;
  cert.metrics["violations"] = violations;
  cert.metrics["max_excess"] = excess;
  cert.wall_time = seconds_since(t0);
  return cert;
}

}  // namespace subeq
