#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "subeq/certificate.hpp"
#include "subeq/jet.hpp"
#include "subeq/numeric_policy.hpp"
#include "subeq/profile.hpp"
#include "subeq/spectral.hpp"

namespace subeq {

/// Base point of a fiber: ambient coordinates and, on a grid, the node index.
struct Point {
  Eigen::VectorXd coords;
  std::optional<std::size_t> node;

  static Point origin(int m) { return {Eigen::VectorXd::Zero(m), std::nullopt}; }
  static Point at_node(Eigen::VectorXd x, std::size_t i) { return {std::move(x), i}; }
};

enum class Membership { Interior, Boundary, Exterior };

const char* to_string(Membership m);

struct SubequationMeta {
  std::string tag;
  bool is_reduced = true;     // G independent of r
  bool is_universal = true;   // G independent of the base point
  bool depends_on_gradient = false;
  std::optional<Profile> f;
  std::optional<Profile> xi;
};

/// A real function of the base point (obstacles, value caps). +inf means "no constraint".
struct PointField {
  std::string name;
  std::function<double(const Point&)> eval;

  static PointField constant(double c);
};

/// Fiberwise subequation F_x = closure{G(x, .) > 0} given by its defining function G.
/// Immutable; copies share the expression tree.
class Subequation {
public:
  struct Node {
    virtual ~Node() = default;
    virtual double eval(const Point& x, const Jet& j) const = 0;
    virtual Subequation dual_of(const Subequation& self) const = 0;
    virtual std::string describe() const = 0;
  };

  Subequation(int m, SubequationMeta meta, std::shared_ptr<const Node> node);

  int dim() const { return dim_; }
  const SubequationMeta& meta() const { return meta_; }
  const std::string& tag() const { return meta_.tag; }

  /// The defining function G(x, r, p, A).
  double value(const Point& x, const Jet& j) const;
  double operator()(const Point& x, const Jet& j) const { return value(x, j); }

  /// Dirichlet dual, defining function -G(x, -J) with catalog tags remapped.
  Subequation dual() const;

  std::string describe() const { return node_->describe(); }
  const std::shared_ptr<const Node>& node() const { return node_; }

private:
  int dim_;
  SubequationMeta meta_;
  std::shared_ptr<const Node> node_;
};

Membership contains(const Subequation& F, const Point& x, const Jet& j, double tol);

inline Subequation dual(const Subequation& F) { return F.dual(); }

// ---- catalog ----------------------------------------------------------------------------

/// closure{|p| < xi(r)}
Subequation eikonal(int m, const Profile& xi);
/// closure{|p| > xi(-r)}, the dual of the eikonal.
Subequation eikonal_dual(int m, const Profile& xi);
/// tr A >= f(r)
Subequation laplace(int m, const Profile& f);
/// lambda_k(A) >= f(r)
Subequation hessian_branch(int m, int k, const Profile& f);
/// mu_j^{(k)}(A) >= f(r)
Subequation sigma_branch(int m, int j, int k, const Profile& f);
/// lambda_1 + ... + lambda_k >= f(r), or with `upper` the k largest eigenvalues.
Subequation plurisub_trace(int m, int k, const Profile& f, bool upper = false);
/// tr(T(p) A) >= f(r), closed up at p = 0 by the limsup.
Subequation quasilinear(int m, const AProfile& a, const Profile& f);
/// A(p, p) / |p|^2 >= f(r), closed up at p = 0 by the limsup (largest eigenvalue).
Subequation inf_laplacian(int m, const Profile& f);

/// All of J^2 (G = +inf) and the empty set (G = -inf).
Subequation full_space(int m);
Subequation empty_set(int m);

/// A user-supplied defining function; its dual is taken generically.
Subequation custom(int m, std::function<double(const Point&, const Jet&)> g, SubequationMeta meta);

// ---- set algebra ------------------------------------------------------------------------

Subequation intersect(const Subequation& a, const Subequation& b);
Subequation unite(const Subequation& a, const Subequation& b);

/// {r <= c(x)}
Subequation value_cap(int m, const PointField& c);

/// F^g = F intersected with {r <= g(x)}.
Subequation obstacle(const Subequation& F, const PointField& g);

// ---- jet equivalence --------------------------------------------------------------------

/// J = (r, p, A) -> (r, g p, h A h^t + L(p)) + J0, pointwise in the base point.
struct JetEquivalence {
  int dim = 0;
  std::function<Matrix(const Point&)> g;
  std::function<Matrix(const Point&)> h;
  std::function<SymMatrix(const Point&, const Vector&)> L;  // linear in p
  std::function<Jet(const Point&)> affine;                   // empty when absent

  Jet apply(const Point& x, const Jet& j) const;
  Jet inverse(const Point& x, const Jet& j) const;

  /// The equivalence that transports the dual: same linear part, affine jet negated.
  JetEquivalence dual_induced() const;

  /// Throws InputError when g or h is singular at a sample point, or the inverse fails to
  /// recover sampled jets to 1e-10.
  void validate(const std::vector<Point>& samples, std::uint64_t seed = 0) const;

  static JetEquivalence identity(int m);

  /// The equivalence carrying {L u >= b f(u)}, L u = tr(T D^2u) + <W, Du> + B, to {tr A >= f(r)}.
  /// T must be positive definite and b > 0.
  static JetEquivalence linear_operator(int m, std::function<SymMatrix(const Point&)> T,
                                        std::function<Vector(const Point&)> W, std::function<double(const Point&)> B,
                                        std::function<double(const Point&)> b);
};

/// G o Psi. The equivalence is validated at `samples` (the origin when empty).
Subequation apply_jet_equivalence(const JetEquivalence& psi, const Subequation& F,
                                  const std::vector<Point>& samples = {});

// ---- fiber geometry and audits -----------------------------------------------------------

struct BoundaryDistance {
  double distance = 0.0;
  bool found = false;
  Jet boundary_jet;
};

/// Flat-fiber distance from J to the boundary of F_x along the ray of steepest change of G.
/// `found` is false (distance +inf) when no sign change occurs within `max_radius`.
BoundaryDistance distance_to_boundary(const Subequation& F, const Point& x, const Jet& j,
                                      double max_radius = 1e6, double tol = 1e-12);

using JetSampler = std::function<Jet(std::mt19937_64&)>;

/// r ~ U(-scale, scale), p and A with N(0, scale^2) entries; a small fraction of samples has p = 0.
JetSampler gaussian_jet_sampler(int m, double scale = 2.0);

/// Sampled audit of positivity (P), negativity (N) and interior approximability (T).
/// metrics: "violations_P", "violations_N", "violations_T".
Certificate audit_PNT(const Subequation& F, const JetSampler& sampler, std::size_t n, std::uint64_t seed = 0,
                      const Point& x = Point{}, double tol = 1e-9);

}  // namespace subeq
