#pragma once

#include <string>
#include <vector>

namespace subeq {

/// Sign and monotonicity facts about a profile, established by sampling at construction.
struct ProfileFlags {
  bool non_decreasing = false;
  bool strictly_increasing = false;
  bool non_increasing = false;
  bool nonnegative = false;
  bool f1 = false;        // non-decreasing, f(0) = 0, f < 0 on r < 0
  bool f1_prime = false;  // non-decreasing, f = 0 on an interval (-mu, 0)
  bool xi1 = false;       // xi >= 0 non-increasing, xi(0) = 0, xi > 0 on r < 0
  bool xi0 = false;       // xi > 0 non-increasing
};

/// A real function of the value coordinate r: the f of {F(p, A) >= f(r)} or the xi of {|p| <= xi(r)}.
class Profile {
public:
  enum class Kind { Linear, Constant, Tabulated };

  /// f(r) = slope * r
  static Profile linear(double slope);
  static Profile constant(double c);
  /// Monotone piecewise-cubic Hermite interpolant through (xs, ys), flat beyond the table.
  static Profile tabulated(std::vector<double> xs, std::vector<double> ys);

  double operator()(double r) const;
  double derivative(double r) const;

  /// r -> -f(-r), the profile of the Dirichlet dual.
  Profile reflected() const;

  Kind kind() const { return kind_; }
  const ProfileFlags& flags() const { return flags_; }
  double slope() const { return a_; }
  double constant_value() const { return a_; }
  const std::vector<double>& knots() const { return xs_; }
  const std::vector<double>& values() const { return ys_; }

  std::string describe() const;

private:
  Profile() = default;
  void compute_flags();

  Kind kind_ = Kind::Constant;
  double a_ = 0.0;
  std::vector<double> xs_, ys_, slopes_;
  ProfileFlags flags_;
};

}  // namespace subeq
