#include "subeq/solver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "subeq/errors.hpp"

namespace subeq {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string node_label(const ModelManifold& M, std::size_t i, const std::string& what, double amount) {
  std::ostringstream os;
  os << what << " at node " << i << " (r=" << M.radius(i) << "): " << amount;
  return os.str();
}

/// Nodes whose values enter the discrete jet at i.
std::vector<std::size_t> stencil(const ModelManifold& M, std::size_t i, const SchemeParams& scheme) {
  std::vector<std::size_t> out;
  if (M.kind() != ManifoldKind::FlatBox) {
    if (i > 0) out.push_back(i - 1);
    out.push_back(i);
    if (i + 1 < M.size()) out.push_back(i + 1);
    return out;
  }
  const int s = scheme.kind == JetScheme::MonotoneWide ? scheme.radius : 1;
  const std::vector<int> base = M.multi_index(i);
  const int m = M.dim();
  std::vector<int> off(m, -s);
  while (true) {
    std::vector<int> idx = base;
    bool inside = true;
    for (int a = 0; a < m; ++a) {
      idx[a] += off[a];
      if (idx[a] < 0 || idx[a] >= M.shape()[a]) inside = false;
    }
    if (inside) out.push_back(M.flat_index(idx));
    int a = 0;
    while (a < m && ++off[a] > s) off[a++] = -s;
    if (a == m) break;
  }
  return out;
}

int stencil_depth(const SchemeParams& scheme) { return scheme.kind == JetScheme::MonotoneWide ? scheme.radius : 1; }

bool jet_defined(const ModelManifold& M, std::size_t i, const SchemeParams& scheme) {
  if (M.kind() == ManifoldKind::FlatBox) return M.depth(i) >= stencil_depth(scheme);
  return !M.is_boundary(i);
}

/// Color classes whose members never share a stencil; used for parallel sweeps.
std::vector<std::vector<std::size_t>> colorings(const ModelManifold& M, const std::vector<std::size_t>& nodes,
                                                const SchemeParams& scheme) {
  const int period = stencil_depth(scheme) + 1;
  if (M.kind() != ManifoldKind::FlatBox) {
    std::vector<std::vector<std::size_t>> c(2);
    for (std::size_t i : nodes) c[i % 2].push_back(i);
    return c;
  }
  int colors = 1;
  for (int a = 0; a < M.dim(); ++a) colors *= period;
  std::vector<std::vector<std::size_t>> c(colors);
  for (std::size_t i : nodes) {
    const auto idx = M.multi_index(i);
    int color = 0, mul = 1;
    for (int a = 0; a < M.dim(); ++a) {
      color += (idx[a] % period) * mul;
      mul *= period;
    }
    c[color].push_back(i);
  }
  return c;
}

Jet axpy(const Jet& base, double t, const Jet& slope) {
  Jet j = base;
  j.r += t * slope.r;
  j.p += t * slope.p;
  j.A += t * slope.A;
  return j;
}

class Engine {
public:
  Engine(const ProblemSpec& spec, bool with_obstacle) : spec_(spec), M_(*spec.M), P_(spec.params) {
    if (!spec.M) throw InputError("problem has no manifold");
    if (spec.F.dim() != M_.dim())
      throw InputError("subequation dimension " + std::to_string(spec.F.dim()) + " differs from manifold dimension " +
                       std::to_string(M_.dim()));
    if (with_obstacle && !spec.obstacle) throw InputError("obstacle problem without an obstacle");
    const std::size_t n = M_.size();
    active_.assign(n, 0);
    if (spec.active.empty()) {
      for (std::size_t i : M_.interior_nodes()) active_[i] = 1;
    } else {
      if (spec.active.size() != n) throw InputError("active mask has the wrong size");
      active_ = spec.active;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!active_[i]) continue;
      if (!jet_defined(M_, i, P_.scheme))
        throw InputError(node_label(M_, i, "active node too close to the grid boundary", 0));
      nodes_.push_back(i);
      points_.push_back(M_.point(i));
    }
    if (nodes_.empty()) throw InputError("problem has no unknown nodes");
    cap_.assign(n, kInf);
    if (spec.obstacle) {
      if (spec.obstacle->size() != n) throw InputError("obstacle lives on a different grid");
      for (std::size_t i = 0; i < n; ++i) cap_[i] = (*spec.obstacle)[i];
    }
    u_.assign(n, 0.0);
    double lowest = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (active_[i]) continue;
      if (!spec.boundary) throw InputError("problem has no boundary data");
      const double b = spec.boundary(M_.point(i));
      if (!std::isfinite(b)) throw InputError(node_label(M_, i, "non-finite boundary value", b));
      if (b > cap_[i] + P_.membership_tol)
        throw InputError(node_label(M_, i, "boundary value exceeds the obstacle by", b - cap_[i]));
      u_[i] = b;
      lowest = std::min(lowest, b);
    }
    if (!std::isfinite(lowest)) lowest = 0;
    slope_.reserve(nodes_.size());
    std::vector<double> unit(n, 0.0);
    for (std::size_t i : nodes_) {
      unit[i] = 1.0;
      slope_.push_back(discrete_jet(M_, unit, i, P_.scheme));
      unit[i] = 0.0;
    }
    initialize(lowest);
  }

  Solution run() {
    const auto t0 = std::chrono::steady_clock::now();
    Certificate cert(spec_.label, P_.membership_tol);
    std::size_t sweeps = 0, corrections = 0;
    bool converged = false;
    const double bound = 1e8 * (1 + max_abs(u_));
    for (; sweeps < P_.max_sweeps; ++sweeps) {
      const double change = sweep(sweeps % 2 == 1);
      cert.trace.push_back(change);
      // a non-monotone scheme (centered gradients inside a non-trace operator) can run away
      if (!(max_abs(u_) <= bound))
        throw ConvergenceError(spec_.label + ": iterates diverge; the scheme is not monotone for this operator",
                               cert.trace);
      if (change <= P_.change_tol && max_abs(residuals(u_)) <= 0.5 * P_.membership_tol) {
        converged = true;
        ++sweeps;
        break;
      }
      if (P_.accelerate && sweeps % 3 == 0 && correct()) ++corrections;
    }
    if (!converged) {
      std::ostringstream os;
      os << spec_.label << ": no convergence after " << sweeps << " sweeps, last change "
         << (cert.trace.empty() ? 0.0 : cert.trace.back());
      throw ConvergenceError(os.str(), cert.trace);
    }
    cert.metrics["sweeps"] = static_cast<double>(sweeps);
    cert.metrics["corrections"] = static_cast<double>(corrections);
    cert.metrics["monotone_violations"] = static_cast<double>(decreases_);
    cert.metrics["degenerate_updates"] = static_cast<double>(degenerate_.load());
    certify(cert);
    cert.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {GridFunction(spec_.M, u_), std::move(cert)};
  }

private:
  double G(std::size_t k, const Jet& j) const {
    const double v = spec_.F.value(points_[k], j);
    if (std::isnan(v)) throw NumericalError(node_label(M_, nodes_[k], "defining function is NaN", v));
    return v;
  }

  void initialize(double lowest) {
    if (spec_.initial) {
      if (spec_.initial->size() != M_.size()) throw InputError("initial guess lives on a different grid");
      for (std::size_t i : nodes_) u_[i] = std::min((*spec_.initial)[i], cap_[i]);
      return;
    }
    // lower a constant until its jet lies in F at every unknown node
    double c = lowest - P_.init_slack;
    double step = std::max(P_.init_slack, 1.0);
    for (int attempt = 0; attempt < 64; ++attempt) {
      bool ok = true;
      for (std::size_t k = 0; k < nodes_.size() && ok; ++k) {
        Jet j = Jet::zero(M_.dim());
        j.r = std::min(c, cap_[nodes_[k]]);
        ok = G(k, j) >= -P_.membership_tol;
      }
      if (ok) {
        for (std::size_t i : nodes_) u_[i] = std::min(c, cap_[i]);
        return;
      }
      c -= step;
      step *= 2;
    }
    throw InitializationError(spec_.label + ": no constant subsolution below the boundary data");
  }

  /// Largest root of t -> G(x_k, jet with u_k = t), clamped to the obstacle.
  double node_solve(std::size_t k) const {
    const std::size_t i = nodes_[k];
    const Jet& slope = slope_[k];
    const double t0 = u_[i];
    const Jet base = axpy(discrete_jet(M_, u_, i, P_.scheme), -t0, slope);
    auto g = [&](double t) { return G(k, axpy(base, t, slope)); };
    const double cap = cap_[i];
    const double g0 = g(t0);
    if (g0 == 0) return std::min(t0, cap);
    const double d = 1e-6 * (1 + std::abs(t0));
    double rate = (g0 - g(t0 + d)) / d;
    if (!(rate > 0) || !std::isfinite(rate)) rate = 1;
    double lo, hi, glo, ghi;
    double step = std::max(std::abs(g0) / rate, 1e-9 * (1 + std::abs(t0)));
    if (g0 > 0) {
      if (t0 >= cap) return cap;
      lo = t0, glo = g0;
      hi = t0 + 1.5 * step;
      double top = t0, bottom = t0;
      for (std::size_t j : stencil(M_, i, P_.scheme)) {
        top = std::max(top, u_[j]);
        bottom = std::min(bottom, u_[j]);
      }
      const double reach = t0 + 1e6 * (1 + std::abs(t0) + (top - bottom));
      for (int it = 0;; ++it) {
        if (hi > reach) {
          // G stays >= 0: the node is unconstrained (p = 0 for the infinity-Laplacian); hold it
          // at the stencil maximum
          ++degenerate_;
          return std::min(top, cap);
        }
        if (hi >= cap) {
          const double gc = g(cap);
          if (gc >= 0) return cap;
          hi = cap, ghi = gc;
          break;
        }
        ghi = g(hi);
        if (ghi < 0) break;
        lo = hi, glo = ghi;
        step *= 4;
        hi = lo + step;
      }
    } else {
      hi = t0, ghi = g0;
      lo = t0 - 1.5 * step;
      for (int it = 0;; ++it) {
        glo = g(lo);
        if (glo >= 0) break;
        hi = lo, ghi = glo;
        step *= 4;
        lo = hi - step;
        if (it > 200) throw NumericalError(node_label(M_, i, "node equation has no root below", t0));
      }
    }
    // Illinois variant of regula falsi on glo >= 0 > ghi
    int side = 0;
    for (int it = 0; it < 200; ++it) {
      double t = lo - glo * (hi - lo) / (ghi - glo);
      if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
      const double gt = g(t);
      if (gt == 0) return std::min(t, cap);
      if (gt >= 0) {
        lo = t, glo = gt;
        if (side == -1) ghi *= 0.5;
        side = -1;
      } else {
        hi = t, ghi = gt;
        if (side == 1) glo *= 0.5;
        side = 1;
      }
      if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * (1 + std::abs(lo))) break;
    }
    return std::min(lo, cap);
  }

  double update(std::size_t k) {
    const std::size_t i = nodes_[k];
    const double next = node_solve(k);
    const double delta = next - u_[i];
    if (delta < -P_.change_tol) ++decreases_;
    u_[i] = next;
    return std::abs(delta);
  }

  double sweep(bool reverse) {
    if (P_.threads <= 1) {
      double change = 0;
      const std::size_t n = nodes_.size();
      for (std::size_t c = 0; c < n; ++c) change = std::max(change, update(reverse ? n - 1 - c : c));
      return change;
    }
    if (colors_.empty()) {
      std::vector<std::size_t> order(nodes_.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      std::vector<std::size_t> by_node(M_.size(), 0);
      for (std::size_t k = 0; k < nodes_.size(); ++k) by_node[nodes_[k]] = k;
      for (auto& cls : colorings(M_, nodes_, P_.scheme)) {
        for (auto& i : cls) i = by_node[i];
        colors_.push_back(std::move(cls));
      }
    }
    double change = 0;
    const std::size_t nc = colors_.size();
    for (std::size_t cc = 0; cc < nc; ++cc) {
      const auto& cls = colors_[reverse ? nc - 1 - cc : cc];
      const int T = std::min<int>(P_.threads, static_cast<int>(cls.size()));
      std::vector<double> part(T, 0.0);
      std::vector<std::size_t> drops(T, 0);
      std::vector<std::thread> pool;
      for (int t = 0; t < T; ++t)
        pool.emplace_back([&, t] {
          for (std::size_t q = t; q < cls.size(); q += T) {
            const std::size_t k = cls[q];
            const std::size_t i = nodes_[k];
            const double next = node_solve(k);
            if (next - u_[i] < -P_.change_tol) ++drops[t];
            part[t] = std::max(part[t], std::abs(next - u_[i]));
            u_[i] = next;
          }
        });
      for (auto& th : pool) th.join();
      for (int t = 0; t < T; ++t) {
        change = std::max(change, part[t]);
        decreases_ += drops[t];
      }
    }
    return change;
  }

  static double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }

  std::vector<double> residuals(const std::vector<double>& u) const {
    std::vector<double> R(nodes_.size());
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      const std::size_t i = nodes_[k];
      R[k] = std::min(G(k, discrete_jet(M_, u, i, P_.scheme)), cap_[i] - u[i]);
    }
    return R;
  }

  /// One linearized step on min(G, g - u) = 0, kept only if it reduces the residual and leaves
  /// every node a subsolution up to the linearization error.
  bool correct() {
    const std::size_t n = nodes_.size();
    std::vector<long> column(M_.size(), -1);
    for (std::size_t k = 0; k < n; ++k) column[nodes_[k]] = static_cast<long>(k);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs(n);
    std::vector<double> unit(M_.size(), 0.0);
    double before = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = nodes_[k];
      const Jet J = discrete_jet(M_, u_, i, P_.scheme);
      const double gv = G(k, J);
      const double room = cap_[i] - u_[i];
      if (!std::isfinite(gv)) return false;
      // contact where the node equation still holds with the value raised to the obstacle
      if (std::isfinite(room) && G(k, axpy(J, room, slope_[k])) >= 0) {
        rhs(k) = -room;
        trip.emplace_back(k, k, -1.0);
        before = std::max(before, std::abs(room));
        continue;
      }
      rhs(k) = -gv;
      before = std::max(before, std::abs(gv));
      for (std::size_t j : stencil(M_, i, P_.scheme)) {
        if (column[j] < 0) continue;
        unit[j] = 1.0;
        const Jet D = discrete_jet(M_, unit, i, P_.scheme);
        unit[j] = 0.0;
        const double eps = 1e-5 * (1 + std::abs(u_[j]));
        const double dg = (G(k, axpy(J, eps, D)) - G(k, axpy(J, -eps, D))) / (2 * eps);
        if (!std::isfinite(dg)) return false;
        if (dg != 0) trip.emplace_back(k, column[j], dg);
      }
    }
    if (before <= P_.membership_tol * 1e-3) return false;
    Eigen::SparseMatrix<double> Jm(n, n);
    Jm.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(Jm);
    if (lu.info() != Eigen::Success) return false;
    const Eigen::VectorXd delta = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !delta.allFinite()) return false;
    for (double damp = 1.0; damp >= 0.125; damp *= 0.5) {
      std::vector<double> trial = u_;
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = nodes_[k];
        trial[i] = std::min(u_[i] + damp * delta(k), cap_[i]);
      }
      const auto R = residuals(trial);
      double after = 0, lowest = kInf;
      for (double r : R) {
        after = std::max(after, std::abs(r));
        lowest = std::min(lowest, r);
      }
      // an inexact linearization may leave a residual proportional to the one it removed
      if (lowest >= -std::max(0.1 * P_.membership_tol, 1e-6 * before) && after < before) {
        u_ = std::move(trial);
        return true;
      }
    }
    return false;
  }

  void certify(Certificate& cert) const {
    const std::size_t N = M_.size();
    cert.residual.assign(N, 0.0);
    cert.dual_residual.assign(N, 0.0);
    const Subequation D = spec_.F.dual();
    std::vector<double> neg(N);
    for (std::size_t i = 0; i < N; ++i) neg[i] = -u_[i];
    std::vector<char> contact(N, 0);
    const bool obstacle = spec_.obstacle.has_value();
    if (obstacle)
      for (std::size_t i : nodes_) contact[i] = cap_[i] - u_[i] <= P_.membership_tol;
    double complementarity = 0, worst_F = 0, worst_dual = 0;
    std::size_t exempt = 0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      const std::size_t i = nodes_[k];
      const double gF = G(k, discrete_jet(M_, u_, i, P_.scheme));
      const double gD = D.value(points_[k], discrete_jet(M_, neg, i, P_.scheme));
      cert.residual[i] = gF;
      cert.dual_residual[i] = gD;
      cert.check(-gF, node_label(M_, i, "F residual", gF));
      worst_F = std::max(worst_F, -gF);
      if (obstacle) {
        cert.check(u_[i] - cap_[i], node_label(M_, i, "above obstacle by", u_[i] - cap_[i]));
        complementarity = std::max(complementarity, std::min(cap_[i] - u_[i], std::max(gF, 0.0)));
        bool near = false;
        for (std::size_t j : stencil(M_, i, P_.scheme)) near = near || contact[j];
        if (near) {
          ++exempt;
          continue;
        }
      }
      cert.check(-gD, node_label(M_, i, "dual residual", gD));
      worst_dual = std::max(worst_dual, -gD);
    }
    cert.metrics["worst_F_violation"] = worst_F;
    cert.metrics["worst_dual_violation"] = worst_dual;
    if (obstacle) {
      cert.metrics["complementarity"] = complementarity;
      cert.metrics["free_boundary_exempt"] = static_cast<double>(exempt);
      cert.check(complementarity, "complementarity " + std::to_string(complementarity));
    }
    const auto& meta = spec_.F.meta();
    const bool regime = meta.tag == "inf_laplacian" || (meta.f && meta.f->flags().strictly_increasing);
    if (!regime) cert.notes.push_back("comparison regime not certified: profile not strictly increasing");
  }

  const ProblemSpec& spec_;
  const ModelManifold& M_;
  SolverParams P_;
  std::vector<char> active_;
  std::vector<std::size_t> nodes_;
  std::vector<Point> points_;
  std::vector<Jet> slope_;
  std::vector<double> cap_;
  std::vector<double> u_;
  std::vector<std::vector<std::size_t>> colors_;
  std::size_t decreases_ = 0;
  mutable std::atomic<std::size_t> degenerate_{0};
};

}  // namespace

Solution perron_dirichlet(const ProblemSpec& spec) {
  if (spec.obstacle) throw InputError("perron_dirichlet takes no obstacle; use solve_obstacle");
  return Engine(spec, false).run();
}

Solution solve_obstacle(const ProblemSpec& spec) { return Engine(spec, true).run(); }

Certificate verify_subharmonic(const Subequation& F, const GridFunction& u, std::vector<std::size_t> nodes, double tol,
                               const SchemeParams& scheme) {
  const ModelManifold& M = *u.manifold();
  if (nodes.empty()) nodes = M.interior_nodes();
  Certificate cert("subharmonic", tol);
  cert.residual.assign(M.size(), 0.0);
  std::size_t skipped = 0;
  double lowest = kInf;
  for (std::size_t i : nodes) {
    if (!jet_defined(M, i, scheme)) {
      ++skipped;
      continue;
    }
    bool flagged = false;
    for (std::size_t j : stencil(M, i, scheme)) flagged = flagged || u.flagged(j);
    if (flagged) {
      ++skipped;
      continue;
    }
    const double g = F.value(M.point(i), discrete_jet(u, i, scheme));
    if (std::isnan(g)) {
      cert.fail(node_label(M, i, "NaN residual", g));
      continue;
    }
    cert.residual[i] = g;
    lowest = std::min(lowest, g);
    cert.check(-g, node_label(M, i, "residual", g));
  }
  cert.metrics["skipped"] = static_cast<double>(skipped);
  cert.metrics["min_residual"] = std::isfinite(lowest) ? lowest : 0.0;
  return cert;
}

Certificate comparison_check(const Subequation& F, const GridFunction& u, const GridFunction& v,
                             const std::vector<std::size_t>& K, double tol, const SchemeParams& scheme) {
  const ModelManifold& M = *u.manifold();
  if (v.manifold() != u.manifold()) throw InputError("comparison of functions on different grids");
  Certificate cert("comparison", tol);
  if (K.empty()) throw InputError("comparison on an empty node set");
  std::vector<char> inK(M.size(), 0);
  for (std::size_t i : K) inK.at(i) = 1;
  // a node of K lies on its boundary when the manifold ends there or its stencil leaves K
  std::vector<std::size_t> inner, rim;
  for (std::size_t i : K) {
    bool edge = !jet_defined(M, i, scheme);
    if (!edge)
      for (std::size_t j : stencil(M, i, scheme)) edge = edge || !inK[j];
    (edge ? rim : inner).push_back(i);
  }
  cert.metrics["precondition_fail"] = 0;
  if (!inner.empty()) {
    const Certificate cu = verify_subharmonic(F, u, inner, tol, scheme);
    const Certificate cv = verify_subharmonic(F.dual(), v, inner, tol, scheme);
    if (!cu.pass() || !cv.pass()) {
      cert.metrics["precondition_fail"] = 1;
      cert.merge(cu, "u not F-subharmonic");
      cert.merge(cv, "v not dual-subharmonic");
      cert.fail("precondition-fail");
      return cert;
    }
  }
  double rim_max = 0;
  for (std::size_t i : rim) rim_max = std::max(rim_max, u[i] + v[i]);
  double top = -kInf;
  std::size_t arg = K.front();
  for (std::size_t i : K) {
    if (u.flagged(i) || v.flagged(i)) continue;
    if (u[i] + v[i] > top) top = u[i] + v[i], arg = i;
  }
  cert.metrics["boundary_max"] = rim_max;
  cert.metrics["max"] = top;
  cert.metrics["max_node"] = static_cast<double>(arg);
  cert.check(top - rim_max, node_label(M, arg, "u + v exceeds its boundary maximum by", top - rim_max));
  if (!cert.pass()) {
    // doubled-variable diagnostic: maximize u(x) + v(y) - alpha/2 |x - y|^2
    for (double alpha : {1e2, 1e4, 1e6}) {
      double best = -kInf, pen = 0;
      for (std::size_t a : K)
        for (std::size_t b : K) {
          const double d2 = (M.point(a).coords - M.point(b).coords).squaredNorm();
          const double val = u[a] + v[b] - 0.5 * alpha * d2;
          if (val > best) best = val, pen = alpha * d2;
        }
      cert.metrics["doubled_penalty_" + std::to_string(static_cast<long long>(alpha))] = pen;
    }
  }
  return cert;
}

Barrier make_barrier(const BarrierRequest& req) {
  const ManifoldPtr& M = req.rho.manifold();
  if (!M) throw InputError("barrier defining function has no grid");
  if (req.s_grid.empty() || req.t_grid.empty()) throw InputError("empty barrier search grid");
  Barrier out;
  out.cert = Certificate("barrier", req.tol);
  for (std::size_t i : req.boundary)
    if (std::abs(req.rho[i]) > req.tol) {
      out.cert.fail(node_label(*M, i, "defining function does not vanish on the boundary piece", req.rho[i]));
      return out;
    }
  for (std::size_t i : req.collar) {
    if (!(req.rho[i] < 0)) {
      out.cert.fail(node_label(*M, i, "defining function is not negative on the collar", req.rho[i]));
      return out;
    }
  }
  // discrete gradient across the boundary piece
  for (std::size_t i : req.boundary) {
    double jump = 0;
    for (const auto& [j, len] : M->neighbors(i)) jump = std::max(jump, std::abs(req.rho[j] - req.rho[i]) / len);
    if (!(jump > req.tol)) {
      out.cert.fail(node_label(*M, i, "defining function has vanishing gradient", jump));
      return out;
    }
  }
  std::vector<double> ts = req.t_grid;
  std::sort(ts.begin(), ts.end());
  auto margin_of = [&](double s, double t, GridFunction& beta) {
    beta = GridFunction::from(M, [&](const Point& x) {
      const double r = req.rho[*x.node];
      return t * (r + s * r * r);
    });
    double worst = kInf;
    for (std::size_t i : req.collar) {
      const Point x = M->point(i);
      const Jet J = discrete_jet(beta, i);
      const double g = req.F.value(x, J);
      double d;
      if (g <= 0) {
        d = g < 0 ? -distance_to_boundary(req.F, x, J).distance : 0.0;
      } else {
        const BoundaryDistance bd = distance_to_boundary(req.F, x, J);
        d = bd.found ? bd.distance : kInf;
      }
      worst = std::min(worst, d);
    }
    return worst;
  };
  for (double s : req.s_grid) {
    std::vector<double> margins(ts.size());
    std::vector<GridFunction> betas(ts.size());
    for (std::size_t q = 0; q < ts.size(); ++q) {
      margins[q] = margin_of(s, ts[q], betas[q]);
      out.best_margin = std::max(out.best_margin, margins[q]);
    }
    // smallest t whose whole upper tail on the grid certifies
    std::size_t first = ts.size();
    for (std::size_t q = ts.size(); q-- > 0;) {
      if (!(margins[q] >= req.margin)) break;
      first = q;
    }
    if (first < ts.size()) {
      out.found = true;
      out.s = s;
      out.t = ts[first];
      out.beta = betas[first];
      out.cert.metrics["margin"] = margins[first];
      out.cert.metrics["s"] = s;
      out.cert.metrics["t"] = ts[first];
      out.cert.check(req.margin - margins[first], "margin");
      return out;
    }
  }
  std::ostringstream os;
  os << "barrier search exhausted; best margin " << out.best_margin;
  out.cert.fail(os.str());
  out.cert.metrics["best_margin"] = out.best_margin;
  return out;
}

}  // namespace subeq
