#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace subeq {

/// Malformed arguments: wrong dimensions, non-finite data, out-of-range indices.
class InputError : public std::invalid_argument {
public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A value outside the domain where the operation is defined (p = 0 for T(p), g(r) <= 0, ...).
class DomainError : public std::domain_error {
public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Root finders, ODE integrators and iterative solvers that fail to meet their tolerance.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative solver exhausted its iteration budget. Carries the per-sweep trace.
class ConvergenceError : public NumericalError {
public:
  explicit ConvergenceError(const std::string& what, std::vector<double> trace = {})
      : NumericalError(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

private:
  std::vector<double> trace_;
};

/// A staged construction ran out of budget before meeting its stage criterion.
class ScheduleError : public NumericalError {
public:
  ScheduleError(const std::string& what, double achieved) : NumericalError(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

private:
  double achieved_;
};

/// No subsolution could be constructed for the given boundary data.
class InitializationError : public NumericalError {
public:
  explicit InitializationError(const std::string& what) : NumericalError(what) {}
};

/// A documented precondition of a construction does not hold (barrier, Hessian bound, completeness).
class PreconditionError : public std::runtime_error {
public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace subeq
