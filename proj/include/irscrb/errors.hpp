#ifndef IRSCRB_ERRORS_HPP
#define IRSCRB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace irscrb {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented type invariant (non-Hermitian, bad shape, ...).
class InvariantError : public Error {
public:
  using Error::Error;
};

// FIM too close to singular for a CRB; some parameters are unobservable.
class SingularFimError : public Error {
public:
  using Error::Error;
};

// Malformed or out-of-range configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Solver breakdown, infeasible subproblem, failed randomization, etc.
class NumericalError : public Error {
public:
  using Error::Error;
};

// The CRB lift has no finite value (e.g. all channels vanish).
class UnboundedCrbError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

} // namespace irscrb

#endif
