#pragma once

#include <stdexcept>
#include <string>

namespace rmab {

/// Value iteration failed to reach the residual tolerance within the
/// iteration budget.
class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The subsidy gap has the same sign at both search bounds, so no
/// indifference point can be bracketed.
class BracketingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tabular estimation requested without smoothing on a state/action pair
/// that was never visited.
class UndefinedEstimate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trajectory step has vanishing likelihood under the current predictor.
class DegenerateLikelihood : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All importance weights at some step underflowed to zero.
class DegenerateWeights : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingPredictor : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfig : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A data file violates its schema; the message names the row and column.
class SchemaViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rmab
