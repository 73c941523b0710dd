#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "subeq/jet.hpp"
#include "subeq/profile.hpp"
#include "subeq/subequation.hpp"

namespace subeq {

/// Warping function of a model metric dr^2 + g(r)^2 dtheta^2.
struct Warp {
  std::string name;
  std::function<double(double)> g;
  std::function<double(double)> dg;
  std::function<double(double)> log_g;  // overflow-safe log g, for volume growth
  bool pole = false;                    // g(0) = 0, g'(0) = 1: the model closes up at r = 0
  std::function<double(double)> dlog_g;  // g'/g when g itself overflows; optional

  double log_derivative(double r) const { return dlog_g ? dlog_g(r) : dg(r) / g(r); }

  static Warp euclidean();   // g = r
  static Warp hyperbolic();  // g = sinh r
  static Warp exp_cube();    // g = exp(r^3)
  static Warp table(std::vector<double> rs, std::vector<double> gs);
  static Warp by_name(const std::string& name);
};

/// Ascending Hessian eigenvalues of a radial function phi(r) on a model: phi'' and phi' g'/g (m-1 times).
EigenList radial_hessian_eigs(double phi1, double phi2, double r, const Warp& warp, int m);

enum class ManifoldKind { FlatBox, Radial, Punctured };
enum class BoundaryTag : std::uint8_t { Interior, Inner, Outer, Side };

const char* to_string(ManifoldKind k);
const char* to_string(BoundaryTag t);

enum class JetScheme { Centered, MonotoneWide };

struct SchemeParams {
  JetScheme kind = JetScheme::Centered;
  int radius = 1;       // wide stencil radius (lattice units)
  int directions = 0;   // 0: every primitive lattice direction within the radius
};

/// Discretized model geometry. Immutable after construction; shared by grid functions.
class ModelManifold {
public:
  /// Axis-aligned box with inclusive bounds and spacing h; (hi - lo)/h must be an integer.
  static std::shared_ptr<const ModelManifold> flat_box(int m, std::vector<std::pair<double, double>> bounds, double h);
  /// Radial model on [r_min, r_max] with n intervals. r_min = 0 requires a warp with a pole.
  static std::shared_ptr<const ModelManifold> radial(int m, Warp warp, double r_min, double r_max, std::size_t intervals);
  /// R^m minus the origin, meshed on [r_min, r_max]; logarithmic spacing by default.
  static std::shared_ptr<const ModelManifold> punctured(int m, double r_min, double r_max, std::size_t intervals,
                                                        bool log_spaced = true);

  ManifoldKind kind() const { return kind_; }
  int dim() const { return m_; }
  std::size_t size() const { return tags_.size(); }
  BoundaryTag tag(std::size_t i) const { return tags_[i]; }
  bool is_boundary(std::size_t i) const { return tags_[i] != BoundaryTag::Interior; }
  Point point(std::size_t i) const;
  /// Distance coordinate: r for radial kinds, |x| for boxes.
  double radius(std::size_t i) const;
  std::vector<std::size_t> interior_nodes() const;
  std::vector<std::size_t> boundary_nodes() const;

  // radial kinds
  const std::vector<double>& radii() const { return r_; }
  const Warp& warp() const { return warp_; }
  bool has_pole() const { return pole_; }

  // boxes
  double spacing() const { return h_; }
  const std::vector<std::pair<double, double>>& bounds() const { return bounds_; }
  const std::vector<int>& shape() const { return shape_; }
  std::vector<int> multi_index(std::size_t i) const;
  std::size_t flat_index(const std::vector<int>& idx) const;
  /// Number of node layers between i and the box boundary (0 on the boundary).
  int depth(std::size_t i) const;

  /// Neighbors with the edge length to each (axis neighbors on boxes, i +- 1 on radial kinds).
  std::vector<std::pair<std::size_t, double>> neighbors(std::size_t i) const;

  std::string describe() const;

private:
  ModelManifold() = default;

  ManifoldKind kind_ = ManifoldKind::FlatBox;
  int m_ = 1;
  std::vector<BoundaryTag> tags_;
  // radial
  std::vector<double> r_;
  Warp warp_;
  bool pole_ = false;
  // box
  double h_ = 0;
  std::vector<std::pair<double, double>> bounds_;
  std::vector<int> shape_;
  std::vector<std::size_t> strides_;
};

using ManifoldPtr = std::shared_ptr<const ModelManifold>;

/// Node values on a manifold. -inf is allowed only at nodes flagged as such.
class GridFunction {
public:
  GridFunction() = default;
  GridFunction(ManifoldPtr M, std::vector<double> values);

  static GridFunction constant(ManifoldPtr M, double c);
  static GridFunction from(ManifoldPtr M, const std::function<double(const Point&)>& f);
  /// f evaluated at the distance coordinate of every node.
  static GridFunction radial(ManifoldPtr M, const std::function<double(double)>& f);

  const ManifoldPtr& manifold() const { return M_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  void flag_minus_infinity(std::size_t i);
  bool flagged(std::size_t i) const { return !minus_inf_.empty() && minus_inf_[i]; }

  double max() const;
  double min() const;

  /// Obstacle field reading this function at grid nodes; evaluation off the grid is a domain error.
  PointField as_field(const std::string& name) const;

private:
  ManifoldPtr M_;
  std::vector<double> values_;
  std::vector<bool> minus_inf_;
};

/// Discrete 2-jet of node values at an interior node.
/// Radial kinds use the exact radial/angular split of the model Hessian; boxes use centered
/// gradients and a least-squares fit of directional second differences.
Jet discrete_jet(const ModelManifold& M, std::span<const double> values, std::size_t node,
                 const SchemeParams& scheme = {});
Jet discrete_jet(const GridFunction& u, std::size_t node, const SchemeParams& scheme = {});

/// Directional second differences (unit direction, value) on a box over the primitive lattice
/// directions of the given radius.
std::vector<std::pair<Vector, double>> directional_second_differences(const ModelManifold& M,
                                                                     std::span<const double> values,
                                                                     std::size_t node, int radius,
                                                                     int max_directions = 0);

/// Monotone eigenvalue bounds from a wide stencil: (min, max) of the directional second differences.
std::pair<double, double> wide_stencil_extreme_eigs(const ModelManifold& M, std::span<const double> values,
                                                    std::size_t node, int radius, int max_directions = 0);

/// Largest edge difference quotient |u(a) - u(b)| / |a - b| over neighboring nodes in `nodes`.
double discrete_lipschitz(const GridFunction& u, const std::vector<std::size_t>& nodes);

struct Exhaustion {
  std::vector<std::vector<std::size_t>> levels;  // D_1 subset D_2 subset ...
  std::vector<int> level_of;                      // smallest j (1-based) with node in D_j; 0 if none
  std::vector<double> radii;                      // radial kinds: D_j = {r <= radii[j-1]}

  std::size_t count() const { return levels.size(); }
  bool contains(int j, std::size_t node) const { return level_of[node] != 0 && level_of[node] <= j; }
};

Exhaustion make_exhaustion(const ModelManifold& M, int j_max);
/// Radial kinds: D_j = {r <= radii[j-1]} for a strictly increasing list of radii.
Exhaustion make_radial_exhaustion(const ModelManifold& M, std::vector<double> radii);

enum class GrowthVerdict { Diverges, Converges };
const char* to_string(GrowthVerdict v);

struct VolumeGrowth {
  GrowthVerdict verdict = GrowthVerdict::Diverges;
  double tail_exponent = 0;          // q(r) ~ r^alpha over the last decade
  std::vector<double> r;              // sample radii
  std::vector<double> log_volume;     // log vol(B_r)
  std::vector<double> partial_integral;  // int_{r_start}^r s / log vol(B_s) ds
  double r_start = 0;
};

/// Tail behaviour of r / log vol(B_r): Diverges when the integrand decays no faster than 1/r.
VolumeGrowth volume_growth_test(const Warp& warp, int m, double r_max, double step);

}  // namespace subeq
