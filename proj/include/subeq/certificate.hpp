#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace subeq {

/// Machine-checkable outcome of a verification. Every check contributes a violation amount
/// (<= 0 when satisfied); the certificate passes iff the worst amount is within tolerance and
/// no hard failure was recorded.
struct Certificate {
  std::string name;
  double tolerance = 0.0;
  double worst_violation = -1e300;
  std::size_t checks = 0;
  std::size_t violation_count = 0;
  std::vector<std::string> violations;  // first few, human readable
  std::vector<double> residual;         // per node, F side
  std::vector<double> dual_residual;    // per node, dual side
  std::vector<double> trace;            // iteration trace
  std::vector<std::string> notes;
  std::map<std::string, double> metrics;
  double wall_time = 0.0;
  bool hard_failure = false;

  static constexpr std::size_t kMaxListed = 50;

  Certificate() = default;
  Certificate(std::string name_, double tol) : name(std::move(name_)), tolerance(tol) {}

  void check(double amount, const std::string& label) {
    ++checks;
    worst_violation = std::max(worst_violation, amount);
    if (!(amount <= tolerance)) {
      ++violation_count;
      if (violations.size() < kMaxListed) violations.push_back(label);
    }
  }

  void fail(const std::string& reason) {
    hard_failure = true;
    ++violation_count;
    if (violations.size() < kMaxListed) violations.push_back(reason);
  }

  void merge(const Certificate& other, const std::string& prefix) {
    checks += other.checks;
    worst_violation = std::max(worst_violation, other.worst_violation);
    violation_count += other.violation_count;
    hard_failure = hard_failure || other.hard_failure;
    for (const auto& v : other.violations)
      if (violations.size() < kMaxListed) violations.push_back(prefix + ": " + v);
  }

  bool pass() const { return !hard_failure && !(worst_violation > tolerance); }
};

}  // namespace subeq
