// One line per acceptance criterion; exit status 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "runner.hpp"
#include "subeq/audit.hpp"
#include "subeq/khasminskii.hpp"
#include "subeq/properties.hpp"

using namespace subeq;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<std::size_t> ball(const ModelManifold& M, double radius) {
  std::vector<std::size_t> K;
  for (std::size_t i = 0; i < M.size(); ++i)
    if (M.radius(i) <= radius + 1e-12) K.push_back(i);
  return K;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome duality() {
  const Certificate c = duality_audit(10000, 0, 1e-9);
  return {c.pass(), fmt("%.0f subequations, %.0f decided jets, %.0f disagreements", c.metrics.at("subequations"),
                        c.metrics.at("jets"), c.metrics.at("disagreements"))};
}

Outcome garding() {
  const Certificate c = garding_audit(1000, 0, 1e-9);
  return {c.pass(), fmt("max reflection error %.2e, max monotonicity drop %.2e", c.metrics.at("max_reflection_error"),
                        c.metrics.at("max_monotonicity_drop"))};
}

Outcome dirichlet() {
  const Certificate c = dirichlet_annulus_oracle(1.0 / 200);
  const double e = c.metrics.at("error_h"), ratio = c.metrics.at("ratio");
  return {c.pass() && e <= 5e-3 && ratio >= 3.5 && ratio <= 4.5,
          fmt("error(h) %.3e, error(h/2) %.3e, ratio %.3f", e, c.metrics.at("error_h2"), ratio)};
}

Outcome obstacles() {
  const Certificate c = obstacle_oracle(1e-8);
  const double ea = c.metrics.at("active_error"), ei = c.metrics.at("inactive_error");
  const double comp = std::max(c.metrics.at("active_complementarity"), c.metrics.at("inactive_complementarity"));
  return {c.pass() && ea <= 1e-3 && ei <= 1e-3 && comp <= 1e-8,
          fmt("errors %.2e / %.2e, complementarity %.2e", ea, ei, comp)};
}

Outcome comparison() {
  const Certificate c = comparison_matrix(1e-8);
  return {c.pass() && c.metrics.at("violations") == 0,
          fmt("%.0f ordered pairs, %.0f violations", c.metrics.at("problems"), c.metrics.at("violations"))};
}

Outcome punctured() {
  const auto M3 = ModelManifold::punctured(3, 0.01, 5.0, 2000);
  const Certificate c3 = punctured_example_check(3, 1.0, *M3);
  double worst = 1e300;
  for (std::size_t i = 0; i < M3->size(); ++i) {
    const double r = M3->radius(i);
    if (r <= 0.16 || r >= 2.4) worst = std::min(worst, c3.residual[i]);
  }
  const auto M2 = ModelManifold::punctured(2, 0.001, 5.0, 2000);
  const Certificate c2 = punctured_example_check(2, 1.0, *M2);
  return {c3.pass() && worst >= -1e-8 && c2.pass(),
          fmt("m=3 min residual on r<=0.16 or r>=2.4: %.2e; failing annuli m=3 [%.3f, %.3f]", worst,
              c3.metrics.at("K_inner"), c3.metrics.at("K_outer")) +
              fmt(", m=2 [%.4f, %.3f]", c2.metrics.at("K_inner"), c2.metrics.at("K_outer"))};
}

Outcome capacity() {
  const auto H = ModelManifold::radial(2, Warp::hyperbolic(), 0, 200, 400);
  const CapacityEstimate h = inf_capacity(ball(*H, 1.0), make_exhaustion(*H, 100), H);
  const auto B = ModelManifold::radial(2, Warp::euclidean(), 0, 3, 300);
  std::vector<double> radii;
  for (int q = 11; q <= 30; ++q) radii.push_back(q / 10.0);
  const CapacityEstimate b = inf_capacity(ball(*B, 1.0), make_radial_exhaustion(*B, radii), B);
  return {h.estimate <= 1e-2 && b.estimate >= 0.49 && h.non_increasing && b.non_increasing && h.cert.pass() &&
              b.cert.pass(),
          fmt("sinh model %.4e at j=%.0f, truncated ball %.4f", h.estimate, h.levels.empty() ? 0.0 : h.levels.back(),
              b.estimate)};
}

Outcome khasminskii() {
  const auto M = ModelManifold::radial(2, Warp::hyperbolic(), 0.0, 60, 400);
  const auto K = ball(*M, 1.0);
  std::vector<double> hv(M->size());
  for (std::size_t i = 0; i < M->size(); ++i) hv[i] = M->radius(i) <= 1 + 1e-12 ? 0.0 : -std::log1p(M->radius(i));
  const PairKh pair = PairKh::make(K, GridFunction(M, hv), make_exhaustion(*M, 30));
  const Subequation F = laplace(2, Profile::linear(1));
  Schedule sched;
  sched.stages = 3;
  const Potential P = build_potential(F, pair, sched);
  bool stages_ok = P.records.size() == 3;
  std::ostringstream gaps;
  for (std::size_t s = 0; s < P.records.size(); ++s) {
    const StageRecord& r = P.records[s];
    stages_ok = stages_ok && r.gap <= sched.epsilon / std::ldexp(1.0, static_cast<int>(s)) && r.pinch_margin > 0 &&
                r.monotone <= 1e-8 && r.psi_monotone <= 1e-8 && r.escape <= -(s + 1.0) + 1e-12;
    gaps << (s ? ", " : "") << fmt("%.3f", r.gap);
  }
  std::vector<std::size_t> exterior;
  const auto inK = pair.in_K();
  for (std::size_t i : M->interior_nodes())
    if (!inK[i]) exterior.push_back(i);
  const Certificate v = verify_subharmonic(F, P.w, exterior, 1e-6);
  return {P.cert.pass() && stages_ok && v.pass(),
          "stage gaps " + gaps.str() + fmt(", min residual %.2e", P.cert.metrics.at("subharmonic_min_residual"))};
}

Outcome stochastic() {
  const Verdict flat = stochastic_completeness(Warp::euclidean(), 2);
  const Verdict flat3 = stochastic_completeness(Warp::euclidean(), 3);
  const Verdict hyp = stochastic_completeness(Warp::hyperbolic(), 2);
  const Verdict cube = stochastic_completeness(Warp::exp_cube(), 2);
  const bool ok = flat.result == Result::Holds && flat3.result == Result::Holds && hyp.result == Result::Holds &&
                  cube.result == Result::Fails && cube.witness.has_value();
  return {ok, std::string("r: ") + to_string(flat.result) + ", sinh: " + to_string(hyp.result) +
                  ", exp(r^3): " + to_string(cube.result) + (cube.witness ? " with witness" : "")};
}

Outcome log_transform_bounds() {
  const auto M = ModelManifold::radial(3, Warp::hyperbolic(), 0.0, 5.0, 500);
  const Solution s = log_transform(GridFunction::radial(M, [](double r) { return std::cosh(r); }), 1.0, 0.5);
  const double grad = s.cert.metrics.at("max_grad_w"), hess = s.cert.metrics.at("min_hess_w");
  const double ratio = s.cert.metrics.at("max_grad_g_over_g");
  return {s.cert.pass() && grad <= 0.5 + 1e-6 && hess >= -0.5 - 1e-6 && ratio <= 1 + 1e-6,
          fmt("|dw| <= %.6f, min eig Hess w %.6f, |dg|/g <= %.6f", grad, hess, ratio)};
}

Outcome determinism() {
  app::AuditOptions opt;
  opt.seed = 0;
  opt.threads = 1;
  const std::string a = app::audit_report(opt).dump(), b = app::audit_report(opt).dump();
  return {a == b, fmt("%.0f-byte audit reports ", static_cast<double>(a.size())) + (a == b ? "identical" : "differ")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget;  // seconds; 0 = none
  };
  const Criterion criteria[] = {
      {"duality involution", duality, 5},
      {"Garding identity", garding, 10},
      {"Dirichlet annulus oracle", dirichlet, 10},
      {"obstacle oracles", obstacles, 5},
      {"comparison matrix", comparison, 0},
      {"punctured-space certificate", punctured, 0},
      {"infinity-capacity dichotomy", capacity, 0},
      {"Khas'minskii construction", khasminskii, 60},
      {"stochastic-completeness triple", stochastic, 0},
      {"log-transform bounds", log_transform_bounds, 0},
      {"audit determinism", determinism, 0},
  };
  int failed = 0, index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget > 0 && secs >= c.budget) {
      o.pass = false;
      o.detail += fmt(" [over the %.0f s budget]", c.budget);
    }
    failed += !o.pass;
    std::printf("%s %2d %-32s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria pass\n", index - failed, index);
  return failed ? 1 : 0;
}
