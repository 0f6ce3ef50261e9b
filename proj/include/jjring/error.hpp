#pragma once

#include <stdexcept>
#include <string>

namespace jjring {

/// Thrown when a caller breaks a documented precondition (bad grid size,
/// wrong basis, non-normalized input, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Thrown when an iterative method cannot reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double best_residual = 0.0)
      : std::runtime_error(what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace jjring
