#ifndef AICAU_ERRORS_HPP
#define AICAU_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace aicau {

// Invalid inputs (bad sizes, out-of-range parameters) use std::invalid_argument
// directly. The types below cover the remaining failure classes.

/// A factorization or iterative solver could not produce a usable result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The caller asked for something the current state cannot provide, e.g.
/// fitting on an empty pool.
class InvalidStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A noiseless pool was asked to label an index it already holds.
class ConstraintViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A difference strategy was scored before two rounds of estimates exist.
class UnavailableError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// No eligible index is left to select.
class ExhaustedPoolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aicau

#endif  // AICAU_ERRORS_HPP
