#pragma once

#include <stdexcept>
#include <string>

namespace sched {

// Base class for all library errors so callers can catch the whole family.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model construction / validation.
class InvalidModel : public Error {
 public:
  using Error::Error;
};

// An atom, grid point or support threshold is <= 0.
class NonPositiveSupport : public InvalidModel {
 public:
  using InvalidModel::InvalidModel;
};

// E[1/g] diverges (e.g. an exponential truncated at zero); the primal
// threshold recursion is undefined for such a channel.
class DivergentInverseMoment : public InvalidModel {
 public:
  using InvalidModel::InvalidModel;
};

// Adaptive quadrature ran out of its subdivision budget. Carries the best
// estimate and the corresponding error bound so callers can inspect how far
// off the result is.
class QuadratureNotConverged : public Error {
 public:
  QuadratureNotConverged(const std::string& what, double estimate, double error_bound)
      : Error(what), estimate_(estimate), error_bound_(error_bound) {}

  double estimate() const { return estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

// Policy given a threshold table of the wrong kind, order or horizon.
class TableMismatch : public Error {
 public:
  using Error::Error;
};

// Slot index outside 1..T.
class IndexOutOfHorizon : public Error {
 public:
  using Error::Error;
};

// Non-causal allocation asked for zero slots.
class EmptyHorizon : public Error {
 public:
  using Error::Error;
};

// A channel gain must be strictly positive.
class NonPositiveGain : public Error {
 public:
  using Error::Error;
};

// The DP value table came out non-monotone in the state variable.
class GridTooCoarse : public Error {
 public:
  using Error::Error;
};

}  // namespace sched
