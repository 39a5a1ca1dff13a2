#ifndef PGGM_ERRORS_HPP
#define PGGM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pggm {

// A distribution or model parameter is outside its admissible domain.
class InvalidParameter : public std::invalid_argument {
 public:
  explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

// A density was evaluated outside its support.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Shapes of matrices / datasets / group structures do not agree.
class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

// Input files could not be parsed or are inconsistent.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Something went wrong numerically (non-SPD iterate, overflow, broken invariant).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver exhausted its iteration budget.
class NoConvergence : public NumericalError {
 public:
  explicit NoConvergence(const std::string& what) : NumericalError(what) {}
};

}  // namespace pggm

#endif  // PGGM_ERRORS_HPP
