#ifndef LIFT_ERRORS_HPP_
#define LIFT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace lift {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Problems with user-supplied inputs (files, configs, argument shapes).
struct ValidationError : Error {
  using Error::Error;
};

// Numerical or internal failures at runtime.
struct ComputeError : Error {
  using Error::Error;
};

struct MalformedRow : ValidationError {
  using ValidationError::ValidationError;
};
struct RangeViolation : ValidationError {
  using ValidationError::ValidationError;
};
struct MissingProfile : ValidationError {
  using ValidationError::ValidationError;
};
struct TooFewPersons : ValidationError {
  using ValidationError::ValidationError;
};
struct BadConfig : ValidationError {
  using ValidationError::ValidationError;
};
struct ShapeMismatch : ValidationError {
  using ValidationError::ValidationError;
};
struct EmptyTrainingSet : ValidationError {
  using ValidationError::ValidationError;
};
struct EmptyDataset : ValidationError {
  using ValidationError::ValidationError;
};
struct EmptySequence : ValidationError {
  using ValidationError::ValidationError;
};
struct DimensionMismatch : ValidationError {
  using ValidationError::ValidationError;
};
struct LengthMismatch : ValidationError {
  using ValidationError::ValidationError;
};
struct TooFewTargets : ValidationError {
  using ValidationError::ValidationError;
};
struct MissingAU : ValidationError {
  using ValidationError::ValidationError;
};
struct ConfigConflict : ValidationError {
  using ValidationError::ValidationError;
};
struct IncompatibleConfig : ValidationError {
  using ValidationError::ValidationError;
};

struct UnsupportedLayer : ComputeError {
  using ComputeError::ComputeError;
};
struct NotPositiveDefinite : ComputeError {
  using ComputeError::ComputeError;
};
struct NonFiniteObjective : ComputeError {
  using ComputeError::ComputeError;
};

}  // namespace lift

#endif  // LIFT_ERRORS_HPP_
