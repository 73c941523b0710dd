#include "subeq/subequation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace subeq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Limit proxy for |p| -> 0+ in the quasilinear closure.
constexpr double kSmallGradient = 1e-9;

void require_non_decreasing(const Profile& f, const char* who) {
  if (!f.flags().non_decreasing)
    throw InputError(std::string(who) + ": profile " + f.describe() + " is not non-decreasing");
}

void require_xi(const Profile& xi) {
  if (!xi.flags().non_increasing || !xi.flags().nonnegative)
    throw InputError("eikonal: profile " + xi.describe() + " must be non-negative and non-increasing");
}

SubequationMeta catalog_meta(std::string tag, const Profile& f, bool gradient) {
  SubequationMeta meta;
  meta.tag = std::move(tag);
  meta.is_reduced = f.kind() == Profile::Kind::Constant;
  meta.depends_on_gradient = gradient;
  meta.f = f;
  return meta;
}

class Eikonal final : public Subequation::Node {
public:
  Eikonal(Profile xi, bool reflected) : xi_(std::move(xi)), reflected_(reflected) {}
  double eval(const Point&, const Jet& j) const override {
    return reflected_ ? j.p.norm() - xi_(-j.r) : xi_(j.r) - j.p.norm();
  }
  Subequation dual_of(const Subequation& self) const override {
    return reflected_ ? eikonal(self.dim(), xi_) : eikonal_dual(self.dim(), xi_);
  }
  std::string describe() const override {
    return std::string(reflected_ ? "eikonal_dual(" : "eikonal(") + xi_.describe() + ")";
  }

private:
  Profile xi_;
  bool reflected_;
};

class Laplace final : public Subequation::Node {
public:
  explicit Laplace(Profile f) : f_(std::move(f)) {}
  double eval(const Point&, const Jet& j) const override { return j.A.trace() - f_(j.r); }
  Subequation dual_of(const Subequation& self) const override { return laplace(self.dim(), f_.reflected()); }
  std::string describe() const override { return "laplace(" + f_.describe() + ")"; }

private:
  Profile f_;
};

class HessianBranch final : public Subequation::Node {
public:
  HessianBranch(int k, Profile f) : k_(k), f_(std::move(f)) {}
  double eval(const Point&, const Jet& j) const override { return eigenvalues_sym(j.A)(k_ - 1) - f_(j.r); }
  Subequation dual_of(const Subequation& self) const override {
    return hessian_branch(self.dim(), self.dim() - k_ + 1, f_.reflected());
  }
  std::string describe() const override {
    return "hessian_branch(" + std::to_string(k_) + ", " + f_.describe() + ")";
  }

private:
  int k_;
  Profile f_;
};

class SigmaBranch final : public Subequation::Node {
public:
  SigmaBranch(int j, int k, Profile f) : j_(j), k_(k), f_(std::move(f)) {}
  double eval(const Point&, const Jet& jet) const override {
    return garding_eigenvalues(jet.A, k_)(j_ - 1) - f_(jet.r);
  }
  Subequation dual_of(const Subequation& self) const override {
    return sigma_branch(self.dim(), k_ - j_ + 1, k_, f_.reflected());
  }
  std::string describe() const override {
    return "sigma_branch(" + std::to_string(j_) + ", " + std::to_string(k_) + ", " + f_.describe() + ")";
  }

private:
  int j_, k_;
  Profile f_;
};

class PlurisubTrace final : public Subequation::Node {
public:
  PlurisubTrace(int k, Profile f, bool upper) : k_(k), f_(std::move(f)), upper_(upper) {}
  double eval(const Point&, const Jet& j) const override {
    const EigenList lam = eigenvalues_sym(j.A);
    return (upper_ ? lam.tail(k_).sum() : lam.head(k_).sum()) - f_(j.r);
  }
  Subequation dual_of(const Subequation& self) const override {
    return plurisub_trace(self.dim(), k_, f_.reflected(), !upper_);
  }
  std::string describe() const override {
    return std::string(upper_ ? "plurisub_upper(" : "plurisub(") + std::to_string(k_) + ", " + f_.describe() + ")";
  }

private:
  int k_;
  Profile f_;
  bool upper_;
};

class Quasilinear final : public Subequation::Node {
public:
  Quasilinear(AProfile a, Profile f) : a_(std::move(a)), f_(std::move(f)) {}
  double eval(const Point&, const Jet& j) const override {
    const double t = j.p.norm();
    if (t > 0) {
      const double l1 = a_.lambda1(t), l2 = a_.lambda2(t);
      const double along = j.p.dot(j.A * j.p) / (t * t);
      return l1 * along + l2 * (j.A.trace() - along) - f_(j.r);
    }
    // sup over unit e of l1 A(e,e) + l2 (tr A - A(e,e))
    const double l1 = a_.lambda1(kSmallGradient), l2 = a_.lambda2(kSmallGradient);
    const EigenList lam = eigenvalues_sym(j.A);
    const double extreme = (l1 >= l2) ? lam(lam.size() - 1) : lam(0);
    return l2 * j.A.trace() + (l1 - l2) * extreme - f_(j.r);
  }
  Subequation dual_of(const Subequation& self) const override { return quasilinear(self.dim(), a_, f_.reflected()); }
  std::string describe() const override { return "quasilinear(" + a_.name + ", " + f_.describe() + ")"; }

private:
  AProfile a_;
  Profile f_;
};

class InfLaplacian final : public Subequation::Node {
public:
  explicit InfLaplacian(Profile f) : f_(std::move(f)) {}
  double eval(const Point&, const Jet& j) const override {
    const double t2 = j.p.squaredNorm();
    if (t2 > 0) return j.p.dot(j.A * j.p) / t2 - f_(j.r);
    return eigenvalues_sym(j.A)(j.dim() - 1) - f_(j.r);
  }
  Subequation dual_of(const Subequation& self) const override { return inf_laplacian(self.dim(), f_.reflected()); }
  std::string describe() const override { return "inf_laplacian(" + f_.describe() + ")"; }

private:
  Profile f_;
};

class Constant final : public Subequation::Node {
public:
  explicit Constant(double v) : v_(v) {}
  double eval(const Point&, const Jet&) const override { return v_; }
  Subequation dual_of(const Subequation& self) const override {
    return v_ > 0 ? empty_set(self.dim()) : full_space(self.dim());
  }
  std::string describe() const override { return v_ > 0 ? "full_space" : "empty_set"; }

private:
  double v_;
};

class GenericDual final : public Subequation::Node {
public:
  explicit GenericDual(Subequation inner) : inner_(std::move(inner)) {}
  double eval(const Point& x, const Jet& j) const override { return -inner_.value(x, -j); }
  Subequation dual_of(const Subequation&) const override { return inner_; }
  std::string describe() const override { return "dual(" + inner_.describe() + ")"; }

private:
  Subequation inner_;
};

class Custom final : public Subequation::Node {
public:
  explicit Custom(std::function<double(const Point&, const Jet&)> g) : g_(std::move(g)) {}
  double eval(const Point& x, const Jet& j) const override { return g_(x, j); }
  Subequation dual_of(const Subequation& self) const override {
    SubequationMeta meta = self.meta();
    meta.tag = "dual";
    if (meta.f) meta.f = meta.f->reflected();
    return Subequation(self.dim(), meta, std::make_shared<GenericDual>(self));
  }
  std::string describe() const override { return "custom"; }

private:
  std::function<double(const Point&, const Jet&)> g_;
};

class MinMax final : public Subequation::Node {
public:
  MinMax(Subequation a, Subequation b, bool is_min) : a_(std::move(a)), b_(std::move(b)), min_(is_min) {}
  double eval(const Point& x, const Jet& j) const override {
    const double ga = a_.value(x, j);
    if (min_ && ga == -kInf) return ga;
    if (!min_ && ga == kInf) return ga;
    const double gb = b_.value(x, j);
    return min_ ? std::min(ga, gb) : std::max(ga, gb);
  }
  Subequation dual_of(const Subequation&) const override {
    return min_ ? unite(a_.dual(), b_.dual()) : intersect(a_.dual(), b_.dual());
  }
  std::string describe() const override {
    return std::string(min_ ? "intersect(" : "union(") + a_.describe() + ", " + b_.describe() + ")";
  }

private:
  Subequation a_, b_;
  bool min_;
};

class ValueCap final : public Subequation::Node {
public:
  explicit ValueCap(PointField c) : c_(std::move(c)) {}
  double eval(const Point& x, const Jet& j) const override { return c_.eval(x) - j.r; }
  Subequation dual_of(const Subequation& self) const override {
    PointField neg{"-" + c_.name, [c = c_.eval](const Point& x) { return -c(x); }};
    return value_cap(self.dim(), neg);
  }
  std::string describe() const override { return "value_cap(" + c_.name + ")"; }

private:
  PointField c_;
};

class ObstacleNode final : public Subequation::Node {
public:
  ObstacleNode(Subequation F, PointField g) : F_(std::move(F)), g_(std::move(g)) {}
  double eval(const Point& x, const Jet& j) const override {
    const double cap = g_.eval(x) - j.r;
    if (cap == -kInf) return cap;
    return std::min(F_.value(x, j), cap);
  }
  Subequation dual_of(const Subequation& self) const override {
    PointField neg{"-" + g_.name, [g = g_.eval](const Point& x) { return -g(x); }};
    return unite(F_.dual(), value_cap(self.dim(), neg));
  }
  std::string describe() const override { return "obstacle(" + F_.describe() + ", " + g_.name + ")"; }

private:
  Subequation F_;
  PointField g_;
};

class Transported final : public Subequation::Node {
public:
  Transported(JetEquivalence psi, Subequation F) : psi_(std::move(psi)), F_(std::move(F)) {}
  double eval(const Point& x, const Jet& j) const override { return F_.value(x, psi_.apply(x, j)); }
  Subequation dual_of(const Subequation&) const override {
    return apply_jet_equivalence(psi_.dual_induced(), F_.dual(), {Point::origin(F_.dim())});
  }
  std::string describe() const override { return "jet_equivalent(" + F_.describe() + ")"; }

private:
  JetEquivalence psi_;
  Subequation F_;
};

SubequationMeta merged(const Subequation& a, const Subequation& b, std::string tag) {
  SubequationMeta meta;
  meta.tag = std::move(tag);
  meta.is_reduced = a.meta().is_reduced && b.meta().is_reduced;
  meta.is_universal = a.meta().is_universal && b.meta().is_universal;
  meta.depends_on_gradient = a.meta().depends_on_gradient || b.meta().depends_on_gradient;
  meta.f = a.meta().f ? a.meta().f : b.meta().f;
  meta.xi = a.meta().xi ? a.meta().xi : b.meta().xi;
  return meta;
}

void require_same_dim(const Subequation& a, const Subequation& b) {
  if (a.dim() != b.dim()) throw InputError("subequations of different dimension cannot be combined");
}

}  // namespace

const char* to_string(Membership m) {
  switch (m) {
    case Membership::Interior: return "interior";
    case Membership::Boundary: return "boundary";
    case Membership::Exterior: return "exterior";
  }
  return "?";
}

PointField PointField::constant(double c) {
  std::ostringstream os;
  os << c;
  return {os.str(), [c](const Point&) { return c; }};
}

Subequation::Subequation(int m, SubequationMeta meta, std::shared_ptr<const Node> node)
    : dim_(m), meta_(std::move(meta)), node_(std::move(node)) {
  check_dim(m);
  if (!node_) throw InputError("subequation needs a defining function");
}

double Subequation::value(const Point& x, const Jet& j) const {
  if (j.dim() != dim_)
    throw InputError("jet of dimension " + std::to_string(j.dim()) + " passed to a subequation of dimension " +
                     std::to_string(dim_));
  return node_->eval(x, j);
}

Subequation Subequation::dual() const { return node_->dual_of(*this); }

Membership contains(const Subequation& F, const Point& x, const Jet& j, double tol) {
  const double g = F.value(x, j);
  if (g > tol) return Membership::Interior;
  if (g < -tol) return Membership::Exterior;
  return Membership::Boundary;
}

Subequation eikonal(int m, const Profile& xi) {
  require_xi(xi);
  SubequationMeta meta;
  meta.tag = "eikonal";
  meta.is_reduced = xi.kind() == Profile::Kind::Constant;
  meta.depends_on_gradient = true;
  meta.xi = xi;
  return Subequation(m, meta, std::make_shared<Eikonal>(xi, false));
}

Subequation eikonal_dual(int m, const Profile& xi) {
  require_xi(xi);
  SubequationMeta meta;
  meta.tag = "eikonal_dual";
  meta.is_reduced = xi.kind() == Profile::Kind::Constant;
  meta.depends_on_gradient = true;
  meta.xi = xi.reflected();
  return Subequation(m, meta, std::make_shared<Eikonal>(xi, true));
}

Subequation laplace(int m, const Profile& f) {
  require_non_decreasing(f, "laplace");
  return Subequation(m, catalog_meta("laplace", f, false), std::make_shared<Laplace>(f));
}

Subequation hessian_branch(int m, int k, const Profile& f) {
  check_dim(m);
  if (k < 1 || k > m) throw InputError("hessian_branch needs 1 <= k <= m");
  require_non_decreasing(f, "hessian_branch");
  return Subequation(m, catalog_meta("hessian_branch", f, false), std::make_shared<HessianBranch>(k, f));
}

Subequation sigma_branch(int m, int j, int k, const Profile& f) {
  check_dim(m);
  if (k < 1 || k > m || j < 1 || j > k) throw InputError("sigma_branch needs 1 <= j <= k <= m");
  require_non_decreasing(f, "sigma_branch");
  return Subequation(m, catalog_meta("sigma_branch", f, false), std::make_shared<SigmaBranch>(j, k, f));
}

Subequation plurisub_trace(int m, int k, const Profile& f, bool upper) {
  check_dim(m);
  if (k < 1 || k > m) throw InputError("plurisub_trace needs 1 <= k <= m");
  require_non_decreasing(f, "plurisub_trace");
  return Subequation(m, catalog_meta(upper ? "plurisub_upper" : "plurisub", f, false),
                     std::make_shared<PlurisubTrace>(k, f, upper));
}

Subequation quasilinear(int m, const AProfile& a, const Profile& f) {
  check_dim(m);
  require_non_decreasing(f, "quasilinear");
  if (!a.a || !a.da) throw InputError("quasilinear profile needs a and a'");
  for (double t = 1e-6; t <= 1e3; t *= 1.5) {
    const double l1 = a.lambda1(t), l2 = a.lambda2(t);
    if (!(l1 >= 0) || !(l2 > 0))
      throw InputError("quasilinear profile '" + a.name + "' violates lambda1 >= 0, lambda2 > 0 at t=" +
                       std::to_string(t));
  }
  return Subequation(m, catalog_meta("quasilinear", f, true), std::make_shared<Quasilinear>(a, f));
}

Subequation inf_laplacian(int m, const Profile& f) {
  require_non_decreasing(f, "inf_laplacian");
  return Subequation(m, catalog_meta("inf_laplacian", f, true), std::make_shared<InfLaplacian>(f));
}

Subequation full_space(int m) {
  SubequationMeta meta;
  meta.tag = "full_space";
  return Subequation(m, meta, std::make_shared<Constant>(kInf));
}

Subequation empty_set(int m) {
  SubequationMeta meta;
  meta.tag = "empty_set";
  return Subequation(m, meta, std::make_shared<Constant>(-kInf));
}

Subequation custom(int m, std::function<double(const Point&, const Jet&)> g, SubequationMeta meta) {
  if (!g) throw InputError("custom subequation needs a defining function");
  if (meta.tag.empty()) meta.tag = "custom";
  return Subequation(m, std::move(meta), std::make_shared<Custom>(std::move(g)));
}

Subequation intersect(const Subequation& a, const Subequation& b) {
  require_same_dim(a, b);
  return Subequation(a.dim(), merged(a, b, "intersect"), std::make_shared<MinMax>(a, b, true));
}

Subequation unite(const Subequation& a, const Subequation& b) {
  require_same_dim(a, b);
  return Subequation(a.dim(), merged(a, b, "union"), std::make_shared<MinMax>(a, b, false));
}

Subequation value_cap(int m, const PointField& c) {
  if (!c.eval) throw InputError("value cap needs a field");
  SubequationMeta meta;
  meta.tag = "value_cap";
  meta.is_reduced = false;
  meta.is_universal = false;
  return Subequation(m, meta, std::make_shared<ValueCap>(c));
}

Subequation obstacle(const Subequation& F, const PointField& g) {
  if (!g.eval) throw InputError("obstacle needs a field");
  SubequationMeta meta = F.meta();
  meta.tag = "obstacle";
  meta.is_reduced = false;
  meta.is_universal = false;
  return Subequation(F.dim(), meta, std::make_shared<ObstacleNode>(F, g));
}

// ---- jet equivalence ----------------------------------------------------------------------

Jet JetEquivalence::apply(const Point& x, const Jet& j) const {
  const Matrix gx = g(x), hx = h(x);
  Jet out(j.r, gx * j.p, hx * j.A * hx.transpose());
  if (L) out.A += L(x, j.p);
  out.A = (out.A + out.A.transpose()) / 2;
  if (affine) out = out + affine(x);
  return out;
}

Jet JetEquivalence::inverse(const Point& x, const Jet& j) const {
  Jet base = affine ? j - affine(x) : j;
  const Matrix gx = g(x), hx = h(x);
  const Vector p = gx.partialPivLu().solve(base.p);
  SymMatrix rest = base.A;
  if (L) rest -= L(x, p);
  const auto hlu = hx.partialPivLu();
  const Matrix left = hlu.solve(rest);
  SymMatrix a = hlu.solve(left.transpose()).transpose();
  a = (a + a.transpose()) / 2;
  return Jet(base.r, p, a);
}

JetEquivalence JetEquivalence::dual_induced() const {
  JetEquivalence out = *this;
  if (affine) out.affine = [a = affine](const Point& x) { return -a(x); };
  return out;
}

void JetEquivalence::validate(const std::vector<Point>& samples, std::uint64_t seed) const {
  if (!g || !h) throw InputError("jet equivalence needs g and h fields");
  std::mt19937_64 rng(seed);
  const JetSampler sampler = gaussian_jet_sampler(dim, 1.0);
  for (const Point& x : samples) {
    for (const Matrix& mtx : {g(x), h(x)}) {
      if (mtx.rows() != dim || mtx.cols() != dim || !mtx.allFinite())
        throw InputError("jet equivalence field has the wrong shape or a non-finite entry");
      const Eigen::MatrixXd dense = mtx;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense);
      const auto& s = svd.singularValues();
      if (!(s(s.size() - 1) > 1e-12 * std::max(1.0, s(0))))
        throw InputError("jet equivalence field is not invertible at a sampled point");
    }
    for (int trial = 0; trial < 8; ++trial) {
      const Jet j = sampler(rng);
      const Jet back = inverse(x, apply(x, j));
      if (fiber_norm(Jet(back - j)) > 1e-10 * (1 + fiber_norm(j)))
        throw InputError("jet equivalence inverse does not recover sampled jets");
    }
  }
}

JetEquivalence JetEquivalence::identity(int m) {
  check_dim(m);
  JetEquivalence psi;
  psi.dim = m;
  psi.g = [m](const Point&) { return Matrix(Matrix::Identity(m, m)); };
  psi.h = psi.g;
  return psi;
}

JetEquivalence JetEquivalence::linear_operator(int m, std::function<SymMatrix(const Point&)> T,
                                               std::function<Vector(const Point&)> W,
                                               std::function<double(const Point&)> B,
                                               std::function<double(const Point&)> b) {
  check_dim(m);
  if (!T || !b) throw InputError("linear operator needs T and b");
  JetEquivalence psi;
  psi.dim = m;
  psi.g = [m](const Point&) { return Matrix(Matrix::Identity(m, m)); };
  psi.h = [T, b](const Point& x) {
    const double bx = b(x);
    if (!(bx > 0)) throw DomainError("linear operator needs b > 0");
    const SymEigenDecomposition<double> eig = eigen_decomposition_sym(T(x));
    if (!(eig.values(0) > 0)) throw DomainError("linear operator needs T positive definite");
    const Vector root = eig.values.cwiseSqrt();
    return Matrix(eig.vectors * root.asDiagonal() * eig.vectors.transpose() / std::sqrt(bx));
  };
  if (W)
    psi.L = [m, W, b](const Point& x, const Vector& p) {
      return SymMatrix(SymMatrix::Identity(m, m) * (W(x).dot(p) / (m * b(x))));
    };
  if (B)
    psi.affine = [m, B, b](const Point& x) {
      Jet j = Jet::zero(m);
      j.A = SymMatrix::Identity(m, m) * (B(x) / (m * b(x)));
      return j;
    };
  return psi;
}

Subequation apply_jet_equivalence(const JetEquivalence& psi, const Subequation& F, const std::vector<Point>& samples) {
  if (psi.dim != F.dim()) throw InputError("jet equivalence and subequation dimensions differ");
  psi.validate(samples.empty() ? std::vector<Point>{Point::origin(F.dim())} : samples);
  SubequationMeta meta = F.meta();
  meta.tag = "linear_jetequiv";
  meta.is_universal = false;
  meta.depends_on_gradient = meta.depends_on_gradient || static_cast<bool>(psi.L);
  return Subequation(F.dim(), meta, std::make_shared<Transported>(psi, F));
}

// ---- distance and audits --------------------------------------------------------------

BoundaryDistance distance_to_boundary(const Subequation& F, const Point& x, const Jet& j, double max_radius,
                                      double tol) {
  if (!j.finite()) throw InputError("distance_to_boundary needs a finite jet");
  const int m = j.dim();
  const double g0 = F.value(x, j);
  BoundaryDistance out;
  out.boundary_jet = j;
  if (std::abs(g0) <= tol) {
    out.found = true;
    return out;
  }
  const Eigen::VectorXd c0 = to_fiber_coordinates(j);
  const int n = static_cast<int>(c0.size());
  Eigen::VectorXd grad(n);
  for (int i = 0; i < n; ++i) {
    const double step = 1e-6 * (1 + std::abs(c0(i)));
    Eigen::VectorXd cp = c0, cm = c0;
    cp(i) += step;
    cm(i) -= step;
    const double gp = F.value(x, from_fiber_coordinates(m, cp)), gm = F.value(x, from_fiber_coordinates(m, cm));
    grad(i) = (std::isfinite(gp) && std::isfinite(gm)) ? (gp - gm) / (2 * step) : 0.0;
  }
  if (!std::isfinite(g0) || grad.norm() == 0) {
    out.distance = std::numeric_limits<double>::infinity();
    return out;
  }
  const Eigen::VectorXd dir = (g0 > 0 ? -1.0 : 1.0) * grad / grad.norm();
  auto g_at = [&](double t) { return F.value(x, from_fiber_coordinates(m, Eigen::VectorXd(c0 + t * dir))); };
  const bool positive = g0 > 0;
  double lo = 0, hi = std::abs(g0) / grad.norm();
  if (!(hi > 0)) hi = 1e-6;
  while ((g_at(hi) > 0) == positive) {
    lo = hi;
    hi *= 2;
    if (hi > max_radius) {
      out.distance = std::numeric_limits<double>::infinity();
      return out;
    }
  }
  for (int iter = 0; iter < 200 && hi - lo > tol * (1 + hi); ++iter) {
    const double mid = (lo + hi) / 2;
    if ((g_at(mid) > 0) == positive) lo = mid;
    else hi = mid;
  }
  out.distance = (lo + hi) / 2;
  out.found = true;
  out.boundary_jet = from_fiber_coordinates(m, Eigen::VectorXd(c0 + out.distance * dir));
  return out;
}

JetSampler gaussian_jet_sampler(int m, double scale) {
  check_dim(m);
  return [m, scale](std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, scale);
    std::uniform_real_distribution<double> uniform(-scale, scale);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    Jet j = Jet::zero(m);
    j.r = uniform(rng);
    const bool zero_gradient = coin(rng) < 0.05;
    for (int i = 0; i < m; ++i) j.p(i) = zero_gradient ? 0.0 : normal(rng);
    for (int i = 0; i < m; ++i)
      for (int k = i; k < m; ++k) {
        const double v = normal(rng);
        j.A(i, k) = v;
        j.A(k, i) = v;
      }
    return j;
  };
}

namespace {

// a - b with the infinities of full/empty sets treated as equal
double excess(double a, double b) {
  if (a == b) return 0.0;
  return a - b;
}

}  // namespace

Certificate audit_PNT(const Subequation& F, const JetSampler& sampler, std::size_t n, std::uint64_t seed,
                      const Point& x_in, double tol) {
  Certificate cert("audit_PNT(" + F.describe() + ")", 0.0);
  const int m = F.dim();
  const Point x = x_in.coords.size() == 0 ? Point::origin(m) : x_in;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t vp = 0, vn = 0, vt = 0;
  for (std::size_t s = 0; s < n; ++s) {
    const Jet j = sampler(rng);
    const double g = F.value(x, j);
    const double slack = tol * (1 + (std::isfinite(g) ? std::abs(g) : 0.0));

    Eigen::MatrixXd b(m, m);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k) b(i, k) = normal(rng);
    Jet jp = j;
    jp.A += SymMatrix(b * b.transpose() * unit(rng));
    const double dp = excess(g, F.value(x, jp));
    if (dp > slack) {
      ++vp;
      cert.check(dp, "(P) violated at sample " + std::to_string(s));
    }

    Jet jn = j;
    jn.r -= 0.5 + unit(rng);
    const double dn = excess(g, F.value(x, jn));
    if (dn > slack) {
      ++vn;
      cert.check(dn, "(N) violated at sample " + std::to_string(s));
    }

    if (s % 10 == 0 && std::isfinite(g)) {
      const BoundaryDistance bd = distance_to_boundary(F, x, j, 1e3);
      if (bd.found) {
        const Jet& jb = bd.boundary_jet;
        const double delta = 1e-3 * (1 + fiber_norm(jb));
        const Eigen::VectorXd cb = to_fiber_coordinates(jb);
        double best = -std::numeric_limits<double>::infinity();
        for (int trial = 0; trial < 64 && !(best > 0); ++trial) {
          Eigen::VectorXd d(cb.size());
          if (trial == 0) {
            d = to_fiber_coordinates(j) - cb;  // toward the sample
            if (g < 0) d = -d;
          } else if (trial == 1) {
            d.setZero();
            d(0) = -1;  // lower r
            if (m > 0) {
              Jet e = Jet::zero(m);
              e.A = SymMatrix::Identity(m, m);
              d += to_fiber_coordinates(e);
            }
          } else {
            for (int i = 0; i < d.size(); ++i) d(i) = normal(rng);
          }
          if (d.norm() == 0) continue;
          d *= delta / d.norm();
          best = std::max(best, F.value(x, from_fiber_coordinates(m, Eigen::VectorXd(cb + d))));
        }
        if (!(best > 0)) {
          ++vt;
          cert.check(-best + 1e-300, "(T) no interior jet near boundary jet from sample " + std::to_string(s));
        }
      }
    }
  }
  if (cert.checks == 0) cert.check(0.0, "");
  cert.checks = n;
  cert.metrics["violations_P"] = static_cast<double>(vp);
  cert.metrics["violations_N"] = static_cast<double>(vn);
  cert.metrics["violations_T"] = static_cast<double>(vt);
  cert.metrics["samples"] = static_cast<double>(n);
  return cert;
}

}  // namespace subeq
