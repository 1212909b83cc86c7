// Exception types used across the library.
#ifndef HHO_ERRORS_HPP
#define HHO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hho {

/// Bad user input: degenerate domain, malformed mesh file, inconsistent coefficients.
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A request outside what the implementation supports (e.g. quadrature degree too high).
class CapabilityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A local system that should never be singular turned out to be. Indicates a bug.
class InternalError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Static condensation met a singular element block (loss of local stability).
class DiscretizationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Sparse factorization or solve failed.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace hho

#endif
