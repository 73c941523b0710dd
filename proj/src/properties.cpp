#include "subeq/properties.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "subeq/errors.hpp"

namespace subeq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool jet_ok(const ModelManifold& M, std::size_t i) {
  return M.kind() == ManifoldKind::FlatBox ? M.depth(i) >= 1 : !M.is_boundary(i);
}

std::vector<char> mask_of(std::size_t n, const std::vector<std::size_t>& nodes) {
  std::vector<char> mask(n, 0);
  for (std::size_t i : nodes) mask.at(i) = 1;
  return mask;
}

std::string first_or(const Certificate& c, const std::string& fallback) {
  return c.violations.empty() ? fallback : c.violations.front();
}

}  // namespace

const char* to_string(Result r) {
  switch (r) {
    case Result::Holds: return "holds";
    case Result::Fails: return "fails";
    case Result::Inconclusive: return "inconclusive";
    case Result::InternalError: return "internal_error";
  }
  return "?";
}

// ---- Ahlfors ------------------------------------------------------------------------------

Verdict ahlfors_violation_check(const Subequation& F_dual, const std::vector<std::size_t>& U, const GridFunction& u,
                                const AhlforsOptions& opt) {
  const ManifoldPtr& Mp = u.manifold();
  if (!Mp) throw InputError("candidate has no grid");
  const ModelManifold& M = *Mp;
  if (U.empty()) throw InputError("empty region");
  for (std::size_t i : U)
    if (std::isnan(u[i])) throw InputError("candidate is NaN at node " + std::to_string(i));
  const auto inU = mask_of(M.size(), U);
  auto at_infinity = [&](std::size_t i) { return opt.outer_is_infinity && M.tag(i) == BoundaryTag::Outer; };

  Verdict v;
  v.property = "ahlfors";
  v.provenance = "maximum principle for " + F_dual.describe() + " united with {r <= 0}";
  std::vector<std::size_t> rim, members;
  double sup_rim = 0, sup_all = -kInf;
  for (std::size_t i : U) {
    sup_all = std::max(sup_all, u[i]);
    if (at_infinity(i)) continue;
    bool leaves = !jet_ok(M, i);
    for (const auto& [j, len] : M.neighbors(i)) leaves = leaves || !inU[j];
    if (leaves) {
      rim.push_back(i);
      sup_rim = std::max(sup_rim, u[i]);
    } else if (u[i] > opt.tol) {
      members.push_back(i);
    }
  }
  if (rim.empty()) v.notes.push_back("region has no boundary on the grid; its boundary supremum is 0");
  Certificate cert("ahlfors_membership", opt.tol);
  if (!members.empty()) cert = verify_subharmonic(F_dual, u, members, opt.tol, opt.scheme);
  cert.metrics["sup_boundary_positive_part"] = sup_rim;
  cert.metrics["sup_closure"] = sup_all;
  cert.metrics["checked_nodes"] = static_cast<double>(members.size());
  v.trace = {sup_all, sup_rim};
  const double excess = sup_all - sup_rim;
  if (!cert.pass()) {
    v.result = Result::Inconclusive;
    v.notes.push_back("membership fails where u > 0 (" + std::to_string(cert.violation_count) +
                      " nodes): " + first_or(cert, "?"));
  } else if (excess > opt.tol) {
    v.result = Result::Fails;
    v.witness = u;
    std::ostringstream os;
    os << "interior supremum " << sup_all << " exceeds boundary supremum " << sup_rim;
    v.notes.push_back(os.str());
  } else {
    v.result = Result::Holds;
    v.notes.push_back("no violation by this candidate");
  }
  v.certificate = std::move(cert);
  return v;
}

// ---- Liouville -----------------------------------------------------------------------------

Verdict liouville_check(const Subequation& F_dual, const GridFunction& u, double tol) {
  const ManifoldPtr& Mp = u.manifold();
  if (!Mp) throw InputError("candidate has no grid");
  Verdict v;
  v.property = "liouville";
  v.provenance = "membership in " + F_dual.describe();
  const double lo = u.min(), hi = u.max();
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw InputError("candidate must be bounded and finite");
  v.trace = {lo, hi};
  if (lo < -tol) {
    v.notes.push_back("candidate takes negative values");
    return v;
  }
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < Mp->size(); ++i)
    if (jet_ok(*Mp, i)) nodes.push_back(i);
  Certificate cert = verify_subharmonic(F_dual, u, nodes, tol);
  cert.metrics["spread"] = hi - lo;
  if (!cert.pass()) {
    v.notes.push_back("membership fails: " + first_or(cert, "?"));
  } else if (hi - lo > tol) {
    v.result = Result::Fails;
    v.witness = u;
    v.notes.push_back("bounded nonnegative nonconstant member, spread " + std::to_string(hi - lo));
  } else {
    v.result = Result::Holds;
    v.notes.push_back("candidate is constant within tolerance");
  }
  v.certificate = std::move(cert);
  return v;
}

// ---- capacity ------------------------------------------------------------------------------

CapacityEstimate inf_capacity(const std::vector<std::size_t>& K, const Exhaustion& exhaustion, const ManifoldPtr& Mp,
                              const SolverParams& params) {
  const ModelManifold& M = *Mp;
  if (exhaustion.level_of.size() != M.size()) throw InputError("exhaustion lives on a different grid");
  if (K.empty()) throw InputError("capacity needs a nonempty K");
  const auto inK = mask_of(M.size(), K);
  CapacityEstimate out;
  out.cert = Certificate("inf_capacity", params.membership_tol);
  const auto t0 = std::chrono::steady_clock::now();
  if (std::all_of(inK.begin(), inK.end(), [](char c) { return c != 0; })) {
    out.cert.notes.push_back("K is the whole grid: no exterior, capacity 0 by convention");
    return out;
  }
  for (std::size_t i : K)
    if (!exhaustion.contains(1, i)) throw InputError("K must lie in every exhaustion member");
  const Subequation Finf = inf_laplacian(M.dim(), Profile::constant(0));
  for (int j = 1; j <= static_cast<int>(exhaustion.count()); ++j) {
    std::vector<char> active(M.size(), 0);
    bool any = false;
    for (std::size_t i = 0; i < M.size(); ++i) {
      if (!exhaustion.contains(j, i) || inK[i] || !jet_ok(M, i)) continue;
      bool inside = true;
      for (const auto& [n, len] : M.neighbors(i)) inside = inside && exhaustion.contains(j, n);
      active[i] = inside;
      any = any || inside;
    }
    if (!any) continue;
    ProblemSpec spec{Finf, Mp};
    spec.active = active;
    spec.boundary = [&](const Point& x) { return inK[*x.node] ? 0.0 : 1.0; };
    spec.params = params;
    spec.label = "capacitor " + std::to_string(j);
    const Solution s = perron_dirichlet(spec);
    out.cert.merge(s.cert, spec.label);
    std::vector<std::size_t> closure;
    for (std::size_t i = 0; i < M.size(); ++i)
      if (exhaustion.contains(j, i)) closure.push_back(i);
    out.trace.push_back(discrete_lipschitz(s.u, closure));
    out.levels.push_back(j);
  }
  if (out.trace.empty()) throw InputError("no exhaustion level leaves room outside K");
  for (std::size_t q = 1; q < out.trace.size(); ++q) {
    const double rise = out.trace[q] - out.trace[q - 1];
    out.cert.check(rise - 1e-9 * out.trace[q - 1], "Lipschitz constant rises at level " + std::to_string(out.levels[q]));
    if (rise > 1e-9 * out.trace[q - 1]) out.non_increasing = false;
  }
  out.estimate = out.trace.back();
  out.cert.metrics["estimate"] = out.estimate;
  out.cert.metrics["capacitors"] = static_cast<double>(out.trace.size());
  out.cert.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// ---- truncation ----------------------------------------------------------------------------

GridFunction truncate_shift(const GridFunction& u, double c) {
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = std::max(u[i] - c, 0.0);
  return GridFunction(u.manifold(), std::move(v));
}

std::optional<double> transport_shift(const Profile& g, const Profile& gbar, double sup, int samples) {
  if (!(sup > 0) || samples < 1) throw InputError("transport needs a positive supremum and samples");
  for (int k = 0; k <= samples; ++k) {
    const double c = sup * k / samples;
    double low = kInf, high = -kInf;
    for (int q = 0; q <= samples; ++q) {
      low = std::min(low, g(c + (sup - c) * q / samples));
      high = std::max(high, gbar((sup - c) * q / samples));
    }
    if (low >= high) return c;
  }
  return std::nullopt;
}

// ---- bounded radial solutions ------------------------------------------------------------------

GridFunction bounded_radial_solution(const ManifoldPtr& Mp, double lambda) {
  const ModelManifold& M = *Mp;
  if (M.kind() != ManifoldKind::Radial) throw InputError("bounded radial solution needs a radial grid");
  const std::size_t n = M.size();
  std::vector<double> v(n, 0.0);
  v[0] = 1.0;
  // without a pole the first step reflects: w'(r_min) = 0
  const std::size_t first = M.has_pole() ? 0 : 1;
  if (first == 1) v[1] = 1.0;
  // the scheme is affine in the next value: solve tr A - lambda r = 0 for it node by node
  for (std::size_t i = first; i + 1 < n; ++i) {
    auto residual = [&](double next) {
      v[i + 1] = next;
      const Jet J = discrete_jet(M, v, i);
      return J.A.trace() - lambda * J.r;
    };
    const double r0 = residual(0.0), r1 = residual(1.0);
    if (!(r1 != r0)) throw NumericalError("radial recursion degenerates at node " + std::to_string(i));
    v[i + 1] = -r0 / (r1 - r0);
    if (!std::isfinite(v[i + 1])) throw NumericalError("radial recursion overflows at node " + std::to_string(i));
  }
  const double top = *std::max_element(v.begin(), v.end());
  for (double& x : v) x /= top;
  return GridFunction(Mp, std::move(v));
}

// ---- stochastic completeness -------------------------------------------------------------------

Verdict stochastic_completeness(const Warp& warp, int m, const StochasticOptions& opt) {
  RadialOdeOptions ode_opt = opt.ode;
  ode_opt.lambda = opt.lambda;
  const RadialOde ode = radial_khasminskii_test(warp, m, ode_opt);
  const VolumeGrowth vol = volume_growth_test(warp, m, opt.volume_r_max, opt.volume_step);
  Verdict v;
  v.property = "stochastic_completeness";
  v.trace = ode.w;
  std::ostringstream prov;
  prov << "radial ODE " << to_string(ode.verdict) << " (" << ode.note << "); volume test " << to_string(vol.verdict)
       << " (tail exponent " << vol.tail_exponent << ")";
  v.provenance = prov.str();
  const bool diverges = vol.verdict == GrowthVerdict::Diverges;
  Certificate cert("stochastic_completeness", 0.0);
  cert.metrics["ode_final_w"] = ode.w.empty() ? 0.0 : ode.w.back();
  cert.metrics["volume_tail_exponent"] = vol.tail_exponent;
  cert.metrics["volume_diverges"] = diverges ? 1.0 : 0.0;
  cert.metrics["ode_pass"] = ode.verdict == OdeVerdict::Pass ? 1.0 : 0.0;
  if (diverges && ode.verdict == OdeVerdict::Fail) {
    v.result = Result::InternalError;
    v.notes.push_back("volume growth guarantees completeness but the ODE solution stays bounded");
    cert.fail("oracle contradiction");
    v.certificate = cert;
    return v;
  }
  if (ode.verdict == OdeVerdict::Pass || diverges) {
    v.result = Result::Holds;
    v.notes.push_back(ode.verdict == OdeVerdict::Pass ? "increasing radial solution diverges: it is a potential"
                                                      : "volume growth is slow enough");
    v.certificate = cert;
    return v;
  }
  if (ode.verdict == OdeVerdict::Fail) {
    const auto M = ModelManifold::radial(m, warp, opt.ode.r0, opt.witness_radius, opt.witness_intervals);
    const GridFunction w = bounded_radial_solution(M, opt.lambda);
    Verdict L = liouville_check(laplace(m, Profile::linear(opt.lambda)).dual(), w);
    if (L.result == Result::Fails) {
      v.result = Result::Fails;
      v.witness = L.witness;
      v.certificate = L.certificate;
      v.notes.push_back("bounded radial solution is a nonconstant Liouville witness");
    } else {
      v.notes.push_back("bounded ODE solution, but the grid witness did not certify");
      for (auto& n : L.notes) v.notes.push_back(n);
    }
    return v;
  }
  v.notes.push_back("neither oracle decides");
  return v;
}

// ---- falsification search -----------------------------------------------------------------------

Verdict ahlfors_search(const Subequation& F, const std::vector<std::size_t>& K, const Exhaustion& exhaustion,
                       const ManifoldPtr& Mp, std::uint64_t seed, int candidates) {
  const ModelManifold& M = *Mp;
  const Subequation Fd = F.dual();
  const auto inK = mask_of(M.size(), K);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int levels = static_cast<int>(exhaustion.count());
  if (levels < 2) throw InputError("search needs at least two exhaustion levels");

  Verdict out;
  out.property = "ahlfors";
  out.provenance = "falsification search over dual Perron solutions, truncations, bumps and bounded radial solutions";
  int certified = 0, tried = 0;
  Certificate summary("ahlfors_search", 1e-8);

  auto consider = [&](const GridFunction& u, const std::vector<std::size_t>& U, const AhlforsOptions& opt,
                      const std::string& label) {
    ++tried;
    Verdict v = ahlfors_violation_check(Fd, U, u, opt);
    out.trace.push_back(v.trace.empty() ? 0.0 : v.trace.front() - v.trace.back());
    if (v.result == Result::Inconclusive) return false;
    ++certified;
    if (v.result == Result::Fails) {
      out.result = Result::Fails;
      out.witness = v.witness;
      out.certificate = v.certificate;
      out.notes.push_back("violation by candidate " + std::to_string(tried) + " (" + label + "): " + v.notes.back());
      return true;
    }
    return false;
  };

  for (int c = 0; c < candidates; ++c) {
    const int j = 2 + static_cast<int>(unit(rng) * (levels - 1)) % (levels - 1);
    const double a = unit(rng), b = unit(rng), cut = unit(rng);
    std::vector<std::size_t> U;
    std::vector<char> active(M.size(), 0);
    for (std::size_t i = 0; i < M.size(); ++i) {
      if (!exhaustion.contains(j, i) || inK[i]) continue;
      U.push_back(i);
      if (!jet_ok(M, i)) continue;
      bool inside = true;
      for (const auto& [n, len] : M.neighbors(i)) inside = inside && exhaustion.contains(j, n) && !inK[n];
      active[i] = inside;
    }
    if (U.empty()) continue;
    ProblemSpec spec{Fd, Mp};
    spec.active = active;
    spec.boundary = [&](const Point& x) { return exhaustion.contains(j - 1, *x.node) ? a : b; };
    spec.label = "candidate " + std::to_string(c);
    GridFunction u;
    try {
      u = perron_dirichlet(spec).u;
    } catch (const std::exception& e) {
      out.notes.push_back("candidate " + std::to_string(c) + " skipped: " + e.what());
      continue;
    }
    if (consider(u, U, {}, "dual Perron solution")) return out;
    if (consider(truncate_shift(u, cut * std::max(u.max(), 0.0)), U, {}, "truncation")) return out;
    // bump centred in the region
    const std::size_t centre = U[static_cast<std::size_t>(unit(rng) * U.size()) % U.size()];
    const double width = 0.5 + 2 * unit(rng);
    const double r0 = M.radius(centre), amp = 0.2 + unit(rng);
    std::vector<double> bump(M.size());
    for (std::size_t i = 0; i < M.size(); ++i) {
      const double d = (M.radius(i) - r0) / width;
      bump[i] = amp * std::exp(-d * d);
    }
    if (consider(GridFunction(Mp, bump), U, {}, "bump")) return out;
  }
  // bounded radial solutions exist exactly when the radial ODE saturates
  const auto& meta = F.meta();
  if (M.kind() == ManifoldKind::Radial && meta.tag == "laplace" && meta.f &&
      meta.f->kind() == Profile::Kind::Linear && meta.f->slope() > 0) {
    RadialOdeOptions ode;
    ode.lambda = meta.f->slope();
    if (radial_khasminskii_test(M.warp(), M.dim(), ode).verdict == OdeVerdict::Fail) {
      std::vector<std::size_t> U;
      for (std::size_t i = 0; i < M.size(); ++i)
        if (!inK[i]) U.push_back(i);
      AhlforsOptions opt;
      opt.outer_is_infinity = true;
      if (consider(bounded_radial_solution(Mp, ode.lambda), U, opt, "bounded radial solution")) return out;
    }
  }
  summary.metrics["candidates"] = tried;
  summary.metrics["certified"] = certified;
  out.certificate = summary;
  if (certified == 0) {
    out.result = Result::Inconclusive;
    out.notes.push_back("no candidate passed its membership check");
  } else {
    out.result = Result::Holds;
    out.notes.push_back("no violation found under the documented generator (" + std::to_string(certified) + " of " +
                        std::to_string(tried) + " candidates certified)");
  }
  return out;
}

}  // namespace subeq
