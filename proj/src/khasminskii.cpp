#include "subeq/khasminskii.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "subeq/errors.hpp"
#include "subeq/spectral.hpp"

namespace subeq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string at(const ModelManifold& M, std::size_t i) {
  std::ostringstream os;
  os << "node " << i << " (r=" << M.radius(i) << ")";
  return os.str();
}

bool jet_ok(const ModelManifold& M, std::size_t i) {
  return M.kind() == ManifoldKind::FlatBox ? M.depth(i) >= 1 : !M.is_boundary(i);
}

}  // namespace

const char* to_string(OdeVerdict v) {
  switch (v) {
    case OdeVerdict::Pass: return "pass";
    case OdeVerdict::Fail: return "fail";
    case OdeVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::vector<double> distance_from(const ModelManifold& M, const std::vector<std::size_t>& K) {
  std::vector<double> d(M.size(), kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
  for (std::size_t i : K) {
    d.at(i) = 0;
    q.emplace(0.0, i);
  }
  while (!q.empty()) {
    const auto [di, i] = q.top();
    q.pop();
    if (di > d[i]) continue;
    for (const auto& [j, len] : M.neighbors(i))
      if (di + len < d[j]) {
        d[j] = di + len;
        q.emplace(d[j], j);
      }
  }
  return d;
}

// ---- pairs -------------------------------------------------------------------------------

PairKh PairKh::make(std::vector<std::size_t> K, GridFunction h, Exhaustion exhaustion, int from_level) {
  const ManifoldPtr M = h.manifold();
  if (!M) throw InputError("pair function has no grid");
  if (K.empty()) throw InputError("pair needs a nonempty compact set K");
  if (exhaustion.level_of.size() != M->size()) throw InputError("exhaustion lives on a different grid");
  if (from_level < 1 || from_level > static_cast<int>(exhaustion.count()))
    throw InputError("pair monotonicity level out of range");
  PairKh p{std::move(K), std::move(h), std::move(exhaustion), from_level};
  const auto inK = p.in_K();
  for (std::size_t i = 0; i < M->size(); ++i)
    if (!inK[i] && !(p.h[i] < 0)) throw InputError("h must be negative off K; fails at " + at(*M, i));
  for (std::size_t i : p.K)
    if (!p.exhaustion.contains(1, i)) throw InputError("K must lie in the first exhaustion level");
  // level-wise maxima of h over D_j \ D_{j-1} must decrease strictly: the discrete face of h -> -inf
  double prev = kInf;
  for (int j = from_level; j <= static_cast<int>(p.exhaustion.count()); ++j) {
    double top = -kInf;
    for (std::size_t i = 0; i < M->size(); ++i)
      if (p.exhaustion.level_of[i] == j && !inK[i]) top = std::max(top, p.h[i]);
    if (!std::isfinite(top)) continue;
    if (!(top < prev))
      throw InputError("h does not decrease along the exhaustion at level " + std::to_string(j) +
                       "; a pair needs h -> -inf");
    prev = top;
  }
  return p;
}

std::vector<char> PairKh::in_K() const {
  std::vector<char> mask(h.size(), 0);
  for (std::size_t i : K) mask.at(i) = 1;
  return mask;
}

// ---- staged construction ----------------------------------------------------------------

namespace {

struct Layout {
  std::vector<char> active;
  std::vector<char> inside;  // D_j
};

/// Unknowns of the stage problem on D_j \ K: nodes of D_j off K whose neighbors all lie in D_j.
Layout stage_layout(const ModelManifold& M, const PairKh& pair, const std::vector<char>& inK, int j) {
  Layout L;
  L.active.assign(M.size(), 0);
  L.inside.assign(M.size(), 0);
  for (std::size_t i = 0; i < M.size(); ++i) L.inside[i] = pair.exhaustion.contains(j, i);
  for (std::size_t i = 0; i < M.size(); ++i) {
    if (!L.inside[i] || inK[i] || !jet_ok(M, i)) continue;
    bool interior = true;
    for (const auto& [n, len] : M.neighbors(i)) interior = interior && L.inside[n];
    L.active[i] = interior;
  }
  return L;
}

}  // namespace

Potential build_potential(const Subequation& F, const PairKh& pair, const Schedule& sched) {
  const auto t_start = std::chrono::steady_clock::now();
  const ManifoldPtr& Mp = pair.h.manifold();
  const ModelManifold& M = *Mp;
  if (!(sched.epsilon > 0)) throw InputError("schedule epsilon must be positive");
  if (sched.stages < 1) throw InputError("schedule needs at least one stage");
  for (std::size_t s = 1; s < sched.gap_levels.size(); ++s)
    if (sched.gap_levels[s] <= sched.gap_levels[s - 1]) throw InputError("schedule levels must increase strictly");
  if (F.dim() != M.dim()) throw InputError("subequation and manifold dimensions differ");
  const std::size_t n = M.size();
  const auto inK = pair.in_K();
  const std::vector<double> dist = distance_from(M, pair.K);
  const int levels = static_cast<int>(pair.exhaustion.count());

  // boundary of K: nodes of K with a neighbor off K
  std::vector<std::size_t> rim;
  for (std::size_t i : pair.K) {
    bool edge = false;
    for (const auto& [j, len] : M.neighbors(i)) edge = edge || !inK[j];
    if (edge) rim.push_back(i);
  }
  if (rim.empty()) throw InputError("K has no boundary inside the grid");

  Potential out;
  out.cert = Certificate("khasminskii", 1e-6);
  Certificate& cert = out.cert;

  // barrier at height 0 on the boundary of K, with rho = -dist
  {
    double spacing = kInf;
    for (std::size_t i : rim)
      for (const auto& [j, len] : M.neighbors(i)) spacing = std::min(spacing, len);
    std::vector<std::size_t> collar;
    for (std::size_t i = 0; i < n; ++i)
      if (!inK[i] && jet_ok(M, i) && dist[i] <= std::max(0.3, 3 * spacing)) collar.push_back(i);
    std::vector<double> rho(n);
    for (std::size_t i = 0; i < n; ++i) rho[i] = std::isfinite(dist[i]) ? -dist[i] : -1e6;
    BarrierRequest req{F, GridFunction(Mp, rho), rim, collar, {0, 0.25, 0.5, 1, 2, 4, 8}, {0.25, 0.5, 1, 2, 4, 8, 16}};
    Barrier b = make_barrier(req);
    if (!b.found) {
      // gradient constraints cap the usable scale; retry with small multiples only
      req.t_grid = {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4};
      const Barrier small = make_barrier(req);
      if (small.found || small.best_margin > b.best_margin) b = small;
    }
    if (!b.found) {
      std::ostringstream os;
      os << "no F-barrier at height 0 on the boundary of K (" << rim.size() << " nodes); best margin "
         << b.best_margin;
      throw PreconditionError(os.str());
    }
    cert.metrics["barrier_s"] = b.s;
    cert.metrics["barrier_t"] = b.t;
  }
  const auto& meta = F.meta();
  if (!(meta.tag == "inf_laplacian" || (meta.f && meta.f->flags().strictly_increasing)))
    cert.notes.push_back("comparison regime not certified: profile not strictly increasing");

  std::vector<double> w(n, 0.0);
  int prev_level = 1;
  for (int stage = 0; stage < sched.stages; ++stage) {
    const double floor_value = -(stage + 1.0);
    const int gap_level =
        std::min(levels, stage < static_cast<int>(sched.gap_levels.size()) ? sched.gap_levels[stage] : stage + 1);
    const double allowed = sched.epsilon / std::ldexp(1.0, stage);
    const double pinch = 1 - std::ldexp(1.0, -stage - 2);
    StageRecord rec;
    rec.stage = stage + 1;
    double best_gap = kInf;
    bool accepted = false;
    std::vector<double> next;
    for (int j = std::max(prev_level + 1, 2); j <= levels && !accepted; ++j) {
      ++rec.candidates;
      const Layout L = stage_layout(M, pair, inK, j);
      // lambda_j: 0 on K, -1 outside D_{j-1}, linear in the distance from K in between
      double reach = kInf;
      for (std::size_t i = 0; i < n; ++i)
        if (!pair.exhaustion.contains(j - 1, i)) reach = std::min(reach, dist[i]);
      if (!std::isfinite(reach) || !(reach > 0)) continue;
      bool any = false;
      for (char a : L.active) any = any || a;
      if (!any) continue;
      std::vector<double> ramp(n);
      for (std::size_t i = 0; i < n; ++i) ramp[i] = -std::min(1.0, dist[i] / reach);

      auto solve_with = [&](double shift) {
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) g[i] = w[i] + shift + ramp[i];
        ProblemSpec spec{F, Mp};
        spec.active = L.active;
        spec.obstacle = GridFunction(Mp, g);
        spec.boundary = [&](const Point& x) { return inK[*x.node] ? 0.0 : floor_value; };
        spec.params = sched.solver;
        spec.label = "stage " + std::to_string(stage + 1) + " level " + std::to_string(j);
        try {
          return solve_obstacle(spec);
        } catch (const NumericalError&) {
          // a gradient constraint can leave no root below a steep constant start; descend from the
          // unshifted obstacle, which already matches the boundary data
          std::vector<double> start(n);
          for (std::size_t i = 0; i < n; ++i) start[i] = w[i] + ramp[i];
          spec.initial = GridFunction(Mp, start);
          return solve_obstacle(spec);
        }
      };
      const Solution limit = solve_with(0.0);
      std::vector<double> cand(n);
      for (std::size_t i = 0; i < n; ++i) cand[i] = inK[i] ? 0.0 : (L.inside[i] ? limit.u[i] : floor_value);

      double gap = 0, pinch_margin = kInf;
      for (std::size_t i = 0; i < n; ++i) {
        if (inK[i]) continue;
        if (pair.exhaustion.contains(gap_level, i)) gap = std::max(gap, std::abs(cand[i] - w[i]));
        pinch_margin = std::min(pinch_margin, cand[i] - pinch * pair.h[i]);
      }
      best_gap = std::min(best_gap, gap);
      if (!(gap <= allowed) || !(pinch_margin > 0)) continue;

      // approximants psi_k = w + 1/k: solutions must decrease in k toward the limit solve
      double psi_rise = -kInf;
      std::vector<double> last;
      for (int k = 1; k <= sched.psi_count; ++k) {
        const Solution sk = solve_with(1.0 / k);
        std::vector<double> cur(sk.u.values());
        if (!last.empty())
          for (std::size_t i = 0; i < n; ++i) psi_rise = std::max(psi_rise, cur[i] - last[i]);
        last = std::move(cur);
      }
      if (!last.empty())
        for (std::size_t i = 0; i < n; ++i) psi_rise = std::max(psi_rise, limit.u[i] - last[i]);

      accepted = true;
      rec.level = j;
      rec.gap = gap;
      rec.pinch_margin = pinch_margin;
      rec.psi_monotone = psi_rise;
      rec.escape = -kInf;
      rec.monotone = -kInf;
      for (std::size_t i = 0; i < n; ++i) {
        if (!L.inside[i]) rec.escape = std::max(rec.escape, cand[i]);
        rec.monotone = std::max(rec.monotone, cand[i] - w[i]);
      }
      cert.merge(limit.cert, "stage " + std::to_string(stage + 1));
      next = std::move(cand);
    }
    if (!accepted) {
      std::ostringstream os;
      os << "stage " << stage + 1 << ": no exhaustion level meets gap <= " << allowed
         << " with pinching; best gap " << best_gap;
      throw ScheduleError(os.str(), best_gap);
    }
    const std::string tag = "stage " + std::to_string(stage + 1);
    cert.check(rec.gap - allowed, tag + " gap " + std::to_string(rec.gap));
    cert.check(-rec.pinch_margin, tag + " pinching margin " + std::to_string(rec.pinch_margin));
    cert.check(rec.monotone, tag + " rises above the previous stage by " + std::to_string(rec.monotone));
    if (std::isfinite(rec.escape))
      cert.check(rec.escape - floor_value, tag + " escape value " + std::to_string(rec.escape));
    if (std::isfinite(rec.psi_monotone))
      cert.check(rec.psi_monotone, tag + " approximants increase by " + std::to_string(rec.psi_monotone));
    out.records.push_back(rec);
    w = std::move(next);
    out.stages.emplace_back(Mp, w);
    prev_level = rec.level;
  }

  out.w = GridFunction(Mp, w);
  for (std::size_t i = 0; i < n; ++i) {
    if (inK[i]) continue;
    cert.check(w[i], "positive value at " + at(M, i));
    cert.check(pair.h[i] - w[i], "below h at " + at(M, i));
  }
  for (std::size_t i : rim) cert.check(std::abs(w[i]), "nonzero on the boundary of K at " + at(M, i));
  std::vector<std::size_t> exterior;
  for (std::size_t i = 0; i < n; ++i)
    if (!inK[i] && jet_ok(M, i)) exterior.push_back(i);
  const Certificate sub = verify_subharmonic(F, out.w, exterior, 1e-6);
  cert.merge(sub, "subharmonic");
  cert.metrics["subharmonic_min_residual"] = sub.metrics.at("min_residual");
  cert.metrics["stages"] = static_cast<double>(out.records.size());
  cert.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

// ---- radial ODE oracle --------------------------------------------------------------------

RadialOde radial_khasminskii_test(const Warp& warp, int m, const RadialOdeOptions& opt) {
  if (m < 1) throw InputError("dimension must be positive");
  if (!(opt.lambda > 0)) throw InputError("lambda must be positive");
  if (!(opt.r_max > opt.r0)) throw InputError("empty radial range");
  using State = std::array<double, 2>;
  namespace ode = boost::numeric::odeint;
  RadialOde out;
  double r = opt.r0;
  State y{1.0, 0.0};
  if (warp.pole && r == 0.0) {
    // regular start off the pole: w = 1 + lambda r^2 / (2m) + ...
    r = 1e-6;
    y = {1 + opt.lambda * r * r / (2 * m), opt.lambda * r / m};
  }
  if (!(warp.g(r) > 0)) throw DomainError("warp is not positive at the start of the range");
  const auto rhs = [&](const State& s, State& ds, double t) {
    ds[0] = s[1];
    ds[1] = opt.lambda * s[0] - (m - 1) * warp.log_derivative(t) * s[1];
  };
  auto stepper = ode::make_controlled(1e-10, 1e-10, ode::runge_kutta_dopri5<State>());
  const int chunks = 2000;
  const double span = opt.r_max - r;
  out.r.push_back(r);
  out.w.push_back(y[0]);
  out.dw.push_back(y[1]);
  bool monotone = true;
  try {
    for (int c = 1; c <= chunks; ++c) {
      const double next = opt.r0 + (opt.r_max - opt.r0) * c / chunks;
      if (next <= r) continue;
      ode::integrate_adaptive(stepper, rhs, y, r, next, span / chunks / 10);
      r = next;
      if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
        out.note = "non-finite solution near r = " + std::to_string(r);
        return out;
      }
      out.r.push_back(r);
      out.w.push_back(y[0]);
      out.dw.push_back(y[1]);
      monotone = monotone && y[1] >= 0;
      if (y[0] > opt.threshold) {
        out.verdict = monotone && y[1] > 0 ? OdeVerdict::Pass : OdeVerdict::Inconclusive;
        out.note = "exceeded " + std::to_string(opt.threshold) + " at r = " + std::to_string(r);
        return out;
      }
    }
  } catch (const std::exception& e) {
    out.note = std::string("integration failed: ") + e.what();
    return out;
  }
  // trend over the trailing window
  const std::size_t N = out.r.size();
  const double r_cut = opt.r_max - opt.window * (opt.r_max - opt.r0);
  std::size_t s = N - 1;
  while (s > 0 && out.r[s - 1] >= r_cut) --s;
  const double w_end = out.w.back(), dw_end = out.dw.back();
  // power-law fit w' ~ r^-alpha over the window; alpha > 1 leaves a finite remaining rise
  double alpha = 0;
  if (dw_end > 0 && out.dw[s] > 0 && out.r[s] > 0 && out.r.back() > out.r[s])
    alpha = -std::log(dw_end / out.dw[s]) / std::log(out.r.back() / out.r[s]);
  const double tail = alpha > 1 ? dw_end * out.r.back() / (alpha - 1) : kInf;
  const double rel_tail = tail / std::max(std::abs(w_end), 1e-300);
  std::ostringstream os;
  if (monotone && (dw_end == 0 || rel_tail < 0.05)) {
    out.verdict = OdeVerdict::Fail;
    os << "bounded: w(r_max) = " << w_end << ", w' ~ r^-" << alpha << ", remaining rise " << rel_tail << " w";
  } else {
    os << "undecided at r_max: w = " << w_end << ", w' ~ r^-" << alpha;
  }
  out.note = os.str();
  return out;
}

// ---- Ekeland potential ----------------------------------------------------------------------

Solution ekeland_potential(const PairKh& pair) {
  const ManifoldPtr& Mp = pair.h.manifold();
  const ModelManifold& M = *Mp;
  if (M.kind() == ManifoldKind::Punctured)
    throw PreconditionError("punctured space is incomplete: the puncture lies at finite distance, so no "
                            "potential with |grad w| <= 1 can diverge there");
  if (M.kind() != ManifoldKind::Radial) throw PreconditionError("ekeland potential needs a radial distance coordinate");
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = M.size();
  const auto inK = pair.in_K();
  const std::vector<double> d = distance_from(M, pair.K);

  // non-increasing envelope of h as a function of the distance to K
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i)
    if (!inK[i]) order.push_back(i);
  if (order.empty()) throw InputError("K covers the whole grid");
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
  std::vector<std::pair<double, double>> env;  // (t, envelope) ascending in t after reversal
  double run = -kInf;
  for (std::size_t i : order) {
    run = std::max(run, pair.h[i]);
    env.emplace_back(d[i], run);
  }
  std::reverse(env.begin(), env.end());
  const double t_far = env.back().first;
  // first distance where the envelope drops to y or below
  auto tau = [&](double y) {
    for (const auto& [t, v] : env)
      if (v <= y) return t;
    return kInf;
  };
  const double top = env.front().second;
  if (!(top < 0)) throw InputError("h must be negative off K");
  const double delta = std::min(0.25, -top);
  // knots (t_k, -k delta) with non-decreasing gaps and phi(t_{k+1}) >= envelope(t_k)
  std::vector<double> knots{0.0};
  double gap = 2 * delta;
  while (knots.back() <= t_far) {
    const std::size_t k = knots.size() - 1;
    const double need = tau(-(static_cast<double>(k) + 2) * delta);
    if (std::isfinite(need)) gap = std::max(gap, need - knots.back());
    knots.push_back(knots.back() + gap);
  }
  const std::size_t K = knots.size();
  std::vector<double> slope(K - 1);
  for (std::size_t k = 0; k + 1 < K; ++k) slope[k] = -delta / (knots[k + 1] - knots[k]);
  // piecewise-linear profile with quadratic rounding at each interior knot
  auto phi = [&](double t) {
    if (t <= 0) return 0.0;
    std::size_t k = std::upper_bound(knots.begin(), knots.end(), t) - knots.begin() - 1;
    if (k >= K - 1) return -delta * (K - 1.0) + slope.back() * (t - knots.back());
    const double lin = -delta * static_cast<double>(k) + slope[k] * (t - knots[k]);
    auto rounded = [&](std::size_t c, double tt) {
      const double eta = 0.25 * std::min(knots[c] - knots[c - 1], knots[c + 1] - knots[c]);
      if (std::abs(tt - knots[c]) >= eta) return kInf;
      const double left = -delta * static_cast<double>(c) + slope[c - 1] * (tt - knots[c]);
      const double s = tt - knots[c] + eta;
      return left + (slope[c] - slope[c - 1]) * s * s / (4 * eta);
    };
    double v = lin;
    if (k >= 1 && std::isfinite(rounded(k, t))) v = rounded(k, t);
    if (k + 1 < K - 1 && std::isfinite(rounded(k + 1, t))) v = rounded(k + 1, t);
    return v;
  };
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = phi(d[i]);
  GridFunction W(Mp, w);

  Certificate cert("ekeland", 1e-8);
  const Subequation E = eikonal(M.dim(), Profile::constant(1));
  const Subequation Finf = inf_laplacian(M.dim(), Profile::constant(0));
  std::vector<std::size_t> exterior;
  for (std::size_t i = 0; i < n; ++i)
    if (!inK[i] && jet_ok(M, i)) exterior.push_back(i);
  cert.merge(verify_subharmonic(E, W, exterior, 1e-8), "eikonal");
  cert.merge(verify_subharmonic(Finf, W, exterior, 1e-8), "infinity-Laplacian");
  for (std::size_t i : order) cert.check(pair.h[i] - w[i], "below h at " + at(M, i));
  double smax = 0, smin = kInf;
  for (double s : slope) {
    smax = std::max(smax, -s);
    smin = std::min(smin, -s);
  }
  cert.check(smax - 1, "profile slope reaches 1");
  cert.check(-smin, "profile slope vanishes");
  cert.metrics["max_slope"] = smax;
  cert.metrics["min_slope"] = smin;
  cert.metrics["knots"] = static_cast<double>(K);
  cert.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {W, cert};
}

// ---- log transform --------------------------------------------------------------------------

Solution log_transform(const GridFunction& g, double lambda, double mu, double tol, double pre_rel_tol) {
  if (!(lambda > 0)) throw InputError("lambda must be positive");
  if (!(mu > 0 && mu < 1)) throw InputError("mu must lie in (0, 1)");
  const ManifoldPtr& Mp = g.manifold();
  const ModelManifold& M = *Mp;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < M.size(); ++i)
    if (!(g[i] >= 1)) bad.push_back(at(M, i) + ": g = " + std::to_string(g[i]));
  // Hess g <= lambda^2 g with a relative allowance for the discretization error of Hess g
  std::vector<std::pair<double, std::size_t>> excess;
  for (std::size_t i = 0; i < M.size(); ++i) {
    if (!jet_ok(M, i)) continue;
    const Jet J = discrete_jet(g, i);
    const double top = eigenvalues_sym(J.A).maxCoeff();
    const double over = top - lambda * lambda * g[i];
    if (over > pre_rel_tol * g[i]) excess.emplace_back(over / g[i], i);
  }
  if (!bad.empty() || !excess.empty()) {
    std::sort(excess.rbegin(), excess.rend());
    std::ostringstream os;
    os << "log transform precondition fails:";
    for (std::size_t q = 0; q < std::min<std::size_t>(3, bad.size()); ++q) os << " [" << bad[q] << "]";
    for (std::size_t q = 0; q < std::min<std::size_t>(5, excess.size()); ++q)
      os << " [Hess g exceeds lambda^2 g by " << excess[q].first << " g at " << at(M, excess[q].second) << "]";
    throw PreconditionError(os.str());
  }
  std::vector<double> w(M.size());
  for (std::size_t i = 0; i < M.size(); ++i) w[i] = -mu * std::log(g[i]);
  GridFunction W(Mp, w);
  Certificate cert("log_transform", tol);
  double grad_w = 0, hess_w = kInf, grad_ratio = 0;
  for (std::size_t i = 0; i < M.size(); ++i) {
    if (!jet_ok(M, i)) continue;
    const Jet Jw = discrete_jet(W, i);
    const Jet Jg = discrete_jet(g, i);
    const double pw = Jw.p.norm(), low = eigenvalues_sym(Jw.A).minCoeff(), pg = Jg.p.norm();
    cert.check(pw - mu * lambda, "|grad w| " + std::to_string(pw) + " at " + at(M, i));
    cert.check(-mu * lambda * lambda - low, "lowest Hessian eigenvalue " + std::to_string(low) + " at " + at(M, i));
    cert.check(pg / g[i] - lambda, "|grad g| / g " + std::to_string(pg / g[i]) + " at " + at(M, i));
    grad_w = std::max(grad_w, pw);
    hess_w = std::min(hess_w, low);
    grad_ratio = std::max(grad_ratio, pg / g[i]);
  }
  cert.metrics["max_grad_w"] = grad_w;
  cert.metrics["min_hess_w"] = std::isfinite(hess_w) ? hess_w : 0.0;
  cert.metrics["max_grad_g_over_g"] = grad_ratio;
  cert.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {W, cert};
}

// ---- explicit punctured potential -------------------------------------------------------------

double punctured_potential(int m, double r) {
  if (m == 2) return -r * r + std::log(r);
  return -r * r - std::pow(r, 2.0 - m);
}

Certificate punctured_example_check(int m, double lambda, const ModelManifold& M, double tol) {
  if (m < 2) throw InputError("punctured example needs m >= 2");
  if (!(lambda > 0)) throw InputError("lambda must be positive");
  if (M.kind() == ManifoldKind::FlatBox || M.warp().name != "euclidean" || M.dim() != m)
    throw InputError("punctured example runs on a Euclidean radial grid of matching dimension");
  const Warp flat = Warp::euclidean();
  const auto& rs = M.radii();
  if (!(rs.front() > 0)) throw InputError("the grid must avoid the puncture");
  Certificate cert("punctured_example", tol);
  std::vector<double> res(M.size()), w(M.size());
  double k_in = kInf, k_out = -kInf;
  for (std::size_t i = 0; i < M.size(); ++i) {
    const double r = rs[i];
    double d1, d2;
    if (m == 2) {
      d1 = -2 * r + 1 / r;
      d2 = -2 - 1 / (r * r);
    } else {
      d1 = -2 * r + (m - 2) * std::pow(r, 1.0 - m);
      d2 = -2 - (m - 2.0) * (m - 1.0) * std::pow(r, -static_cast<double>(m));
    }
    w[i] = punctured_potential(m, r);
    res[i] = radial_hessian_eigs(d1, d2, r, flat, m).sum() - lambda * w[i];
    if (res[i] < -tol) {
      k_in = std::min(k_in, r);
      k_out = std::max(k_out, r);
    }
  }
  double outside = kInf;
  for (std::size_t i = 0; i < M.size(); ++i) {
    if (rs[i] >= k_in && rs[i] <= k_out) continue;
    outside = std::min(outside, res[i]);
    cert.check(-res[i], "membership residual " + std::to_string(res[i]) + " at r=" + std::to_string(rs[i]));
  }
  // w <= 0, rising then falling: w -> -inf toward the puncture and toward infinity
  const std::size_t peak = std::max_element(w.begin(), w.end()) - w.begin();
  for (std::size_t i = 0; i < M.size(); ++i) {
    cert.check(w[i], "positive potential at r=" + std::to_string(rs[i]));
    if (i > 0 && i <= peak) cert.check(w[i - 1] - w[i], "potential not rising toward its peak");
    if (i > peak) cert.check(w[i] - w[i - 1], "potential not falling past its peak");
  }
  if (peak == 0 || peak + 1 == M.size()) cert.fail("potential does not decrease toward both ends");
  cert.residual = res;
  cert.metrics["K_inner"] = std::isfinite(k_in) ? k_in : 0.0;
  cert.metrics["K_outer"] = std::isfinite(k_out) ? k_out : 0.0;
  cert.metrics["K_empty"] = std::isfinite(k_in) ? 0.0 : 1.0;
  cert.metrics["min_residual_outside"] = std::isfinite(outside) ? outside : 0.0;
  return cert;
}

}  // namespace subeq
