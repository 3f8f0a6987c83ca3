#pragma once

#include <stdexcept>
#include <string>

namespace tylercov {

// Base class for every error the library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input or violated precondition. The CLI maps these to exit code 2.
struct ValidationError : Error {
  using Error::Error;
};

// Failure discovered while computing. The CLI maps these to exit code 3.
struct NumericalError : Error {
  using Error::Error;
};

struct InvalidInput : ValidationError {
  using ValidationError::ValidationError;
};

struct NotSymmetric : ValidationError {
  using ValidationError::ValidationError;
};

struct NotPositiveDefinite : ValidationError {
  using ValidationError::ValidationError;
};

struct DimensionMismatch : ValidationError {
  using ValidationError::ValidationError;
};

struct ZeroSample : ValidationError {
  ZeroSample(long row_index, const std::string& msg)
      : ValidationError(msg), row(row_index) {}
  long row;
};

struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

struct NotEnoughSamples : ValidationError {
  using ValidationError::ValidationError;
};

struct UnsupportedOrder : ValidationError {
  using ValidationError::ValidationError;
};

struct OddOrder : ValidationError {
  using ValidationError::ValidationError;
};

struct NonPositiveTexture : NumericalError {
  using NumericalError::NumericalError;
};

struct QuadFormUnderflow : NumericalError {
  using NumericalError::NumericalError;
};

struct SingularScm : NumericalError {
  using NumericalError::NumericalError;
};

struct BelowValidityThreshold : NumericalError {
  BelowValidityThreshold(double threshold_value, const std::string& msg)
      : NumericalError(msg), threshold(threshold_value) {}
  double threshold;
};

struct TauOutOfWindow : NumericalError {
  using NumericalError::NumericalError;
};

struct EpsilonTooLarge : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace tylercov
