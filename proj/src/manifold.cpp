#include "subeq/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/QR>

namespace subeq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// Primitive integer directions v with max |v_i| <= radius, first nonzero entry positive,
// ordered by length then lexicographically.
std::vector<std::vector<int>> lattice_directions(int m, int radius, int max_directions) {
  std::vector<std::vector<int>> dirs;
  std::vector<int> v(m, -radius);
  while (true) {
    int first = 0;
    for (int x : v)
      if (x != 0) {
        first = x;
        break;
      }
    if (first > 0) {
      int g = 0;
      for (int x : v) g = std::gcd(g, std::abs(x));
      if (g == 1) dirs.push_back(v);
    }
    int a = 0;
    while (a < m && v[a] == radius) v[a++] = -radius;
    if (a == m) break;
    ++v[a];
  }
  auto len2 = [](const std::vector<int>& d) {
    int s = 0;
    for (int x : d) s += x * x;
    return s;
  };
  std::stable_sort(dirs.begin(), dirs.end(), [&](const auto& x, const auto& y) {
    if (len2(x) != len2(y)) return len2(x) < len2(y);
    return x > y;
  });
  if (max_directions > 0 && static_cast<int>(dirs.size()) > max_directions) dirs.resize(max_directions);
  return dirs;
}

// Least-squares map from directional second differences to the upper triangle of A.
Eigen::MatrixXd hessian_fit(int m, const std::vector<std::vector<int>>& dirs) {
  const int unknowns = m * (m + 1) / 2;
  Eigen::MatrixXd rows(dirs.size(), unknowns);
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    Eigen::VectorXd v(m);
    for (int i = 0; i < m; ++i) v(i) = dirs[d][i];
    v.normalize();
    int c = 0;
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) rows(d, c++) = (i == j ? 1.0 : 2.0) * v(i) * v(j);
  }
  return rows.completeOrthogonalDecomposition().pseudoInverse();
}

}  // namespace

// ---- warps -----------------------------------------------------------------------------

Warp Warp::euclidean() {
  return {"euclidean", [](double r) { return r; }, [](double) { return 1.0; },
          [](double r) { return std::log(r); }, true, [](double r) { return 1 / r; }};
}

Warp Warp::hyperbolic() {
  return {"sinh", [](double r) { return std::sinh(r); }, [](double r) { return std::cosh(r); },
          [](double r) {
            if (r > 20) return r - std::log(2.0) + std::log1p(-std::exp(-2 * r));
            return std::log(std::sinh(r));
          },
          true, [](double r) { return 1 / std::tanh(r); }};
}

Warp Warp::exp_cube() {
  return {"exp_cube", [](double r) { return std::exp(r * r * r); },
          [](double r) { return 3 * r * r * std::exp(r * r * r); }, [](double r) { return r * r * r; }, false,
          [](double r) { return 3 * r * r; }};
}

Warp Warp::table(std::vector<double> rs, std::vector<double> gs) {
  for (double g : gs)
    if (!(g >= 0)) throw InputError("tabulated warp must be non-negative");
  const bool pole = !rs.empty() && rs.front() == 0.0 && gs.front() == 0.0;
  auto prof = std::make_shared<Profile>(Profile::tabulated(std::move(rs), std::move(gs)));
  return {"table", [prof](double r) { return (*prof)(r); }, [prof](double r) { return prof->derivative(r); },
          [prof](double r) { return std::log((*prof)(r)); }, pole};
}

Warp Warp::by_name(const std::string& name) {
  if (name == "euclidean" || name == "r") return euclidean();
  if (name == "sinh" || name == "hyperbolic") return hyperbolic();
  if (name == "exp_cube" || name == "exp(r^3)") return exp_cube();
  throw InputError("unknown warp '" + name + "'");
}

EigenList radial_hessian_eigs(double phi1, double phi2, double r, const Warp& warp, int m) {
  check_dim(m);
  const double g = warp.g(r);
  if (!(g > 0)) throw DomainError("warp must be positive at r=" + std::to_string(r));
  EigenList out(m);
  out(0) = phi2;
  const double angular = phi1 * warp.log_derivative(r);
  for (int i = 1; i < m; ++i) out(i) = angular;
  std::sort(out.data(), out.data() + m);
  return out;
}

const char* to_string(ManifoldKind k) {
  switch (k) {
    case ManifoldKind::FlatBox: return "flat_box";
    case ManifoldKind::Radial: return "radial";
    case ManifoldKind::Punctured: return "punctured";
  }
  return "?";
}

const char* to_string(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::Interior: return "interior";
    case BoundaryTag::Inner: return "inner";
    case BoundaryTag::Outer: return "outer";
    case BoundaryTag::Side: return "side";
  }
  return "?";
}

// ---- construction ----------------------------------------------------------------------

std::shared_ptr<const ModelManifold> ModelManifold::flat_box(int m, std::vector<std::pair<double, double>> bounds,
                                                             double h) {
  if (m < 1 || m > 3) throw InputError("flat boxes support 1 <= m <= 3");
  if (static_cast<int>(bounds.size()) != m) throw InputError("flat box needs one (lo, hi) pair per axis");
  if (!(h > 0) || !std::isfinite(h)) throw InputError("grid spacing must be positive");
  std::shared_ptr<ModelManifold> M(new ModelManifold());
  M->kind_ = ManifoldKind::FlatBox;
  M->m_ = m;
  M->h_ = h;
  M->bounds_ = bounds;
  std::size_t total = 1;
  for (const auto& [lo, hi] : bounds) {
    if (!(hi > lo)) throw InputError("flat box bounds must satisfy lo < hi");
    const double cells = (hi - lo) / h;
    const long n = std::lround(cells);
    if (n < 2 || std::abs(cells - n) > 1e-6 * std::max(1.0, cells))
      throw InputError("box side is not an integer number (>= 2) of grid spacings");
    M->shape_.push_back(static_cast<int>(n + 1));
    total *= static_cast<std::size_t>(n + 1);
  }
  if (total > 4'000'000) throw InputError("flat box has too many nodes");
  M->strides_.assign(m, 1);
  for (int a = 1; a < m; ++a) M->strides_[a] = M->strides_[a - 1] * M->shape_[a - 1];
  M->tags_.assign(total, BoundaryTag::Interior);
  for (std::size_t i = 0; i < total; ++i)
    if (M->depth(i) == 0) M->tags_[i] = BoundaryTag::Side;
  return M;
}

std::shared_ptr<const ModelManifold> ModelManifold::radial(int m, Warp warp, double r_min, double r_max,
                                                           std::size_t intervals) {
  check_dim(m);
  if (!(r_min >= 0) || !(r_max > r_min)) throw InputError("radial model needs 0 <= r_min < r_max");
  if (intervals < 2) throw InputError("radial model needs at least 2 intervals");
  if (!warp.g || !warp.dg) throw InputError("radial model needs a warp with g and g'");
  std::shared_ptr<ModelManifold> M(new ModelManifold());
  M->kind_ = ManifoldKind::Radial;
  M->m_ = m;
  M->warp_ = warp;
  // r_min = 0 is a pole for warps that vanish there, an ordinary inner boundary when g(0) > 0
  M->pole_ = r_min == 0.0 && warp.pole;
  if (r_min == 0.0 && !warp.pole && !(warp.g(0.0) > 0))
    throw InputError("r_min = 0 needs a warp with g(0) = 0, g'(0) = 1, or g(0) > 0");
  M->r_.resize(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i)
    M->r_[i] = r_min + (r_max - r_min) * static_cast<double>(i) / static_cast<double>(intervals);
  for (std::size_t i = M->pole_ ? 1 : 0; i <= intervals; ++i)
    if (!(warp.g(M->r_[i]) > 0)) throw DomainError("warp is not positive on the radial range");
  M->tags_.assign(intervals + 1, BoundaryTag::Interior);
  if (!M->pole_) M->tags_.front() = BoundaryTag::Inner;
  M->tags_.back() = BoundaryTag::Outer;
  M->h_ = (r_max - r_min) / static_cast<double>(intervals);
  return M;
}

std::shared_ptr<const ModelManifold> ModelManifold::punctured(int m, double r_min, double r_max, std::size_t intervals,
                                                              bool log_spaced) {
  check_dim(m);
  if (!(r_min > 0) || !(r_max > r_min)) throw InputError("punctured space needs 0 < r_min < r_max");
  if (intervals < 2) throw InputError("punctured space needs at least 2 intervals");
  std::shared_ptr<ModelManifold> M(new ModelManifold());
  M->kind_ = ManifoldKind::Punctured;
  M->m_ = m;
  M->warp_ = Warp::euclidean();
  M->r_.resize(intervals + 1);
  const double a = std::log(r_min), b = std::log(r_max);
  for (std::size_t i = 0; i <= intervals; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(intervals);
    M->r_[i] = log_spaced ? std::exp(a + (b - a) * s) : r_min + (r_max - r_min) * s;
  }
  M->r_.front() = r_min;
  M->r_.back() = r_max;
  M->tags_.assign(intervals + 1, BoundaryTag::Interior);
  M->tags_.front() = BoundaryTag::Inner;
  M->tags_.back() = BoundaryTag::Outer;
  M->h_ = (b - a) / static_cast<double>(intervals);
  return M;
}

// ---- queries ---------------------------------------------------------------------------

std::vector<int> ModelManifold::multi_index(std::size_t i) const {
  std::vector<int> idx(m_);
  for (int a = 0; a < m_; ++a) {
    idx[a] = static_cast<int>(i % static_cast<std::size_t>(shape_[a]));
    i /= static_cast<std::size_t>(shape_[a]);
  }
  return idx;
}

std::size_t ModelManifold::flat_index(const std::vector<int>& idx) const {
  std::size_t i = 0;
  for (int a = 0; a < m_; ++a) i += static_cast<std::size_t>(idx[a]) * strides_[a];
  return i;
}

int ModelManifold::depth(std::size_t i) const {
  if (kind_ != ManifoldKind::FlatBox) {
    const int n = static_cast<int>(r_.size()) - 1;
    const int k = static_cast<int>(i);
    if (pole_) return n - k;
    return std::min(k, n - k);
  }
  const std::vector<int> idx = multi_index(i);
  int d = std::numeric_limits<int>::max();
  for (int a = 0; a < m_; ++a) d = std::min({d, idx[a], shape_[a] - 1 - idx[a]});
  return d;
}

Point ModelManifold::point(std::size_t i) const {
  if (kind_ == ManifoldKind::FlatBox) {
    const std::vector<int> idx = multi_index(i);
    Eigen::VectorXd x(m_);
    for (int a = 0; a < m_; ++a) x(a) = bounds_[a].first + idx[a] * h_;
    return Point::at_node(std::move(x), i);
  }
  Eigen::VectorXd x(1);
  x(0) = r_[i];
  return Point::at_node(std::move(x), i);
}

double ModelManifold::radius(std::size_t i) const {
  if (kind_ == ManifoldKind::FlatBox) return point(i).coords.norm();
  return r_[i];
}

std::vector<std::size_t> ModelManifold::interior_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i)
    if (!is_boundary(i)) out.push_back(i);
  return out;
}

std::vector<std::size_t> ModelManifold::boundary_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i)
    if (is_boundary(i)) out.push_back(i);
  return out;
}

std::vector<std::pair<std::size_t, double>> ModelManifold::neighbors(std::size_t i) const {
  std::vector<std::pair<std::size_t, double>> out;
  if (kind_ == ManifoldKind::FlatBox) {
    const std::vector<int> idx = multi_index(i);
    for (int a = 0; a < m_; ++a) {
      if (idx[a] > 0) out.emplace_back(i - strides_[a], h_);
      if (idx[a] + 1 < shape_[a]) out.emplace_back(i + strides_[a], h_);
    }
    return out;
  }
  if (i > 0) out.emplace_back(i - 1, r_[i] - r_[i - 1]);
  if (i + 1 < r_.size()) out.emplace_back(i + 1, r_[i + 1] - r_[i]);
  return out;
}

std::string ModelManifold::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(m=" << m_;
  if (kind_ == ManifoldKind::FlatBox) {
    os << ", h=" << h_ << ", shape=";
    for (std::size_t a = 0; a < shape_.size(); ++a) os << (a ? "x" : "") << shape_[a];
  } else {
    os << ", warp=" << warp_.name << ", r=[" << r_.front() << ", " << r_.back() << "], nodes=" << r_.size();
  }
  os << ")";
  return os.str();
}

// ---- grid functions ----------------------------------------------------------------------

GridFunction::GridFunction(ManifoldPtr M, std::vector<double> values) : M_(std::move(M)), values_(std::move(values)) {
  if (!M_) throw InputError("grid function needs a manifold");
  if (values_.size() != M_->size()) throw InputError("grid function has the wrong number of values");
  for (double v : values_)
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw InputError("grid function values must be finite or -inf");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] == kNegInf) flag_minus_infinity(i);
}

GridFunction GridFunction::constant(ManifoldPtr M, double c) {
  const std::size_t n = M->size();
  return GridFunction(std::move(M), std::vector<double>(n, c));
}

GridFunction GridFunction::from(ManifoldPtr M, const std::function<double(const Point&)>& f) {
  std::vector<double> v(M->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(M->point(i));
  return GridFunction(std::move(M), std::move(v));
}

GridFunction GridFunction::radial(ManifoldPtr M, const std::function<double(double)>& f) {
  std::vector<double> v(M->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(M->radius(i));
  return GridFunction(std::move(M), std::move(v));
}

void GridFunction::flag_minus_infinity(std::size_t i) {
  if (minus_inf_.empty()) minus_inf_.assign(values_.size(), false);
  minus_inf_[i] = true;
  values_[i] = kNegInf;
}

double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }
double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }

PointField GridFunction::as_field(const std::string& name) const {
  auto values = std::make_shared<const std::vector<double>>(values_);
  return {name, [values, name](const Point& x) {
            if (!x.node || *x.node >= values->size())
              throw DomainError("grid field '" + name + "' evaluated off its grid");
            return (*values)[*x.node];
          }};
}

// ---- discrete jets ---------------------------------------------------------------------

std::vector<std::pair<Vector, double>> directional_second_differences(const ModelManifold& M,
                                                                     std::span<const double> u, std::size_t node,
                                                                     int radius, int max_directions) {
  if (M.kind() != ManifoldKind::FlatBox) throw InputError("directional differences need a flat box");
  const int m = M.dim();
  if (M.depth(node) < radius) throw DomainError("wide stencil leaves the domain at node " + std::to_string(node));
  const std::vector<int> idx = M.multi_index(node);
  const double h = M.spacing();
  std::vector<std::pair<Vector, double>> out;
  for (const auto& d : lattice_directions(m, radius, max_directions)) {
    std::vector<int> plus = idx, minus = idx;
    Vector v(m);
    for (int a = 0; a < m; ++a) {
      plus[a] += d[a];
      minus[a] -= d[a];
      v(a) = d[a];
    }
    const double len2 = v.squaredNorm();
    const double dd = (u[M.flat_index(plus)] - 2 * u[node] + u[M.flat_index(minus)]) / (h * h * len2);
    out.emplace_back(v / std::sqrt(len2), dd);
  }
  return out;
}

std::pair<double, double> wide_stencil_extreme_eigs(const ModelManifold& M, std::span<const double> u,
                                                    std::size_t node, int radius, int max_directions) {
  const auto dd = directional_second_differences(M, u, node, radius, max_directions);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [v, val] : dd) {
    lo = std::min(lo, val);
    hi = std::max(hi, val);
  }
  return {lo, hi};
}

Jet discrete_jet(const ModelManifold& M, std::span<const double> u, std::size_t node, const SchemeParams& scheme) {
  if (u.size() != M.size()) throw InputError("values do not match the manifold");
  const int m = M.dim();
  Jet j = Jet::zero(m);
  j.r = u[node];
  if (M.kind() != ManifoldKind::FlatBox) {
    const auto& r = M.radii();
    if (M.has_pole() && node == 0) {
      const double h = r[1] - r[0];
      const double phi2 = 2 * (u[1] - u[0]) / (h * h);
      j.A = SymMatrix::Identity(m, m) * phi2;
      return j;
    }
    if (M.is_boundary(node)) throw DomainError("discrete jet requested at boundary node " + std::to_string(node));
    const double h1 = r[node] - r[node - 1], h2 = r[node + 1] - r[node];
    const double um = u[node - 1], u0 = u[node], up = u[node + 1];
    const double phi1 = -h2 / (h1 * (h1 + h2)) * um + (h2 - h1) / (h1 * h2) * u0 + h1 / (h2 * (h1 + h2)) * up;
    const double phi2 = 2 * (um / (h1 * (h1 + h2)) - u0 / (h1 * h2) + up / (h2 * (h1 + h2)));
    j.p(0) = phi1;
    j.A(0, 0) = phi2;
    const double angular = phi1 * M.warp().log_derivative(r[node]);
    for (int a = 1; a < m; ++a) j.A(a, a) = angular;
    return j;
  }
  const int radius = scheme.kind == JetScheme::MonotoneWide ? std::max(1, scheme.radius) : 1;
  if (M.depth(node) < radius) throw DomainError("stencil leaves the domain at node " + std::to_string(node));
  const std::vector<int> idx = M.multi_index(node);
  const double h = M.spacing();
  for (int a = 0; a < m; ++a) {
    std::vector<int> plus = idx, minus = idx;
    ++plus[a];
    --minus[a];
    j.p(a) = (u[M.flat_index(plus)] - u[M.flat_index(minus)]) / (2 * h);
  }
  const int max_dirs = scheme.kind == JetScheme::MonotoneWide ? scheme.directions : 0;
  const auto dirs = lattice_directions(m, radius, max_dirs);
  if (static_cast<int>(dirs.size()) < m * (m + 1) / 2)
    throw InputError("too few stencil directions to determine the Hessian");
  thread_local std::vector<std::pair<std::pair<int, int>, Eigen::MatrixXd>> cache;
  const Eigen::MatrixXd* fit = nullptr;
  const std::pair<int, int> key{m * 1000 + radius, max_dirs};
  for (const auto& [k, mat] : cache)
    if (k == key) fit = &mat;
  if (!fit) {
    cache.emplace_back(key, hessian_fit(m, dirs));
    fit = &cache.back().second;
  }
  const auto dd = directional_second_differences(M, u, node, radius, max_dirs);
  Eigen::VectorXd rhs(dd.size());
  for (std::size_t d = 0; d < dd.size(); ++d) rhs(d) = dd[d].second;
  const Eigen::VectorXd upper = (*fit) * rhs;
  int c = 0;
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      j.A(a, b) = upper(c);
      j.A(b, a) = upper(c);
      ++c;
    }
  return j;
}

Jet discrete_jet(const GridFunction& u, std::size_t node, const SchemeParams& scheme) {
  return discrete_jet(*u.manifold(), u.values(), node, scheme);
}

double discrete_lipschitz(const GridFunction& u, const std::vector<std::size_t>& nodes) {
  const ModelManifold& M = *u.manifold();
  std::vector<char> in(M.size(), 0);
  for (std::size_t i : nodes) in[i] = 1;
  double lip = 0;
  for (std::size_t i : nodes)
    for (const auto& [k, len] : M.neighbors(i))
      if (in[k] && k > i) lip = std::max(lip, std::abs(u[i] - u[k]) / len);
  return lip;
}

// ---- exhaustions -------------------------------------------------------------------------

namespace {

Exhaustion finish(std::size_t n, std::vector<std::vector<std::size_t>> levels) {
  Exhaustion ex;
  ex.level_of.assign(n, 0);
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (levels[j].empty()) throw InputError("exhaustion level " + std::to_string(j + 1) + " is empty");
    if (j > 0 && levels[j].size() <= levels[j - 1].size())
      throw InputError("manifold is too coarse to nest the requested exhaustion levels");
    for (std::size_t i : levels[j])
      if (ex.level_of[i] == 0) ex.level_of[i] = static_cast<int>(j + 1);
  }
  ex.levels = std::move(levels);
  return ex;
}

}  // namespace

Exhaustion make_radial_exhaustion(const ModelManifold& M, std::vector<double> radii) {
  if (M.kind() == ManifoldKind::FlatBox) throw InputError("radial exhaustion needs a radial manifold");
  std::vector<std::vector<std::size_t>> levels;
  for (std::size_t j = 0; j < radii.size(); ++j) {
    if (j > 0 && !(radii[j] > radii[j - 1])) throw InputError("exhaustion radii must increase strictly");
    std::vector<std::size_t> level;
    for (std::size_t i = 0; i < M.size(); ++i)
      if (M.radii()[i] <= radii[j] + 1e-12 * (1 + radii[j])) level.push_back(i);
    levels.push_back(std::move(level));
  }
  Exhaustion ex = finish(M.size(), std::move(levels));
  ex.radii = std::move(radii);
  return ex;
}

Exhaustion make_exhaustion(const ModelManifold& M, int j_max) {
  if (j_max < 2) throw InputError("exhaustion needs j_max >= 2");
  const std::size_t n = M.size();
  std::vector<std::vector<std::size_t>> levels(j_max);
  switch (M.kind()) {
    case ManifoldKind::Radial: {
      const double lo = M.radii().front(), hi = M.radii().back();
      std::vector<double> radii;
      for (int j = 1; j <= j_max; ++j) radii.push_back(lo + (hi - lo) * j / j_max);
      return make_radial_exhaustion(M, std::move(radii));
    }
    case ManifoldKind::Punctured: {
      const double a = std::log(M.radii().front()), b = std::log(M.radii().back());
      const double c = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int j = 1; j <= j_max; ++j)
        for (std::size_t i = 0; i < n; ++i)
          if (std::abs(std::log(M.radii()[i]) - c) <= half * j / j_max + 1e-12) levels[j - 1].push_back(i);
      return finish(n, std::move(levels));
    }
    case ManifoldKind::FlatBox: {
      const int m = M.dim();
      for (int j = 1; j <= j_max; ++j)
        for (std::size_t i = 0; i < n; ++i) {
          const Point x = M.point(i);
          double s = 0;
          for (int a = 0; a < m; ++a) {
            const auto [lo, hi] = M.bounds()[a];
            s = std::max(s, std::abs(x.coords(a) - 0.5 * (lo + hi)) / (0.5 * (hi - lo)));
          }
          if (s <= static_cast<double>(j) / j_max + 1e-12) levels[j - 1].push_back(i);
        }
      return finish(n, std::move(levels));
    }
  }
  throw InputError("unknown manifold kind");
}

// ---- volume growth -------------------------------------------------------------------

const char* to_string(GrowthVerdict v) { return v == GrowthVerdict::Diverges ? "diverges" : "converges"; }

VolumeGrowth volume_growth_test(const Warp& warp, int m, double r_max, double step) {
  if (m < 2) throw InputError("volume growth needs m >= 2");
  if (!(r_max > 0) || !(step > 0) || step > r_max / 10) throw InputError("volume growth needs 0 < 10 step <= r_max");
  auto log_g = [&](double r) {
    if (r == 0) {
      if (warp.pole) return kNegInf;
    }
    const double g = warp.g(r);
    if (!(g > 0) && !(warp.log_g && std::isfinite(warp.log_g(r))))
      throw DomainError("warp is not positive at r=" + std::to_string(r));
    return warp.log_g ? warp.log_g(r) : std::log(g);
  };
  const double log_sphere = std::log(2.0) + 0.5 * m * std::log(M_PI) - std::lgamma(0.5 * m);
  VolumeGrowth out;
  const std::size_t n = static_cast<std::size_t>(std::ceil(r_max / step));
  double log_int = kNegInf, prev_r = 0, prev_lg = log_g(0.0) * (m - 1);
  if (m - 1 == 0) prev_lg = 0;
  double integral = 0, prev_q = 0;
  bool started = false;
  for (std::size_t i = 1; i <= n; ++i) {
    const double r = std::min(r_max, static_cast<double>(i) * step);
    const double lg = (m - 1) * log_g(r);
    log_int = log_add(log_int, std::log(0.5 * (r - prev_r)) + log_add(prev_lg, lg));
    const double log_vol = log_sphere + log_int;
    if (log_vol > 1) {
      const double q = r / log_vol;
      if (started) integral += 0.5 * (q + prev_q) * (r - prev_r);
      else out.r_start = r;
      started = true;
      prev_q = q;
      out.r.push_back(r);
      out.log_volume.push_back(log_vol);
      out.partial_integral.push_back(integral);
    }
    prev_r = r;
    prev_lg = lg;
  }
  if (out.r.size() < 10) throw InputError("volume growth range too short: log vol(B_r) stays below 1");
  // log-log fit of the integrand over the last decade of the range
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < out.r.size(); ++i) {
    if (out.r[i] < std::max(out.r_start, r_max / 10)) continue;
    const double x = std::log(out.r[i]), y = std::log(out.r[i] / out.log_volume[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 5) throw InputError("volume growth tail window has too few samples");
  out.tail_exponent = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  out.verdict = out.tail_exponent >= -1.0 ? GrowthVerdict::Diverges : GrowthVerdict::Converges;
  return out;
}

}  // namespace subeq
