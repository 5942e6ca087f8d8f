#pragma once

#include <stdexcept>
#include <string>

namespace helios {

/// Base class for all domain errors thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A closed-form expression left the representable range (exponent cap hit,
/// denominator underflow).
class NumericOverflow : public Error {
public:
  using Error::Error;
};

/// Iterative solve failed to reach its residual tolerance within the
/// iteration cap. Carries the last residual seen.
class NoConvergence : public Error {
public:
  NoConvergence(const std::string& msg, double last_residual)
      : Error(msg), last_residual(last_residual) {}
  double last_residual;
};

/// The curve has no positive-power region (e.g. zero irradiance).
class DegenerateCurve : public Error {
public:
  using Error::Error;
};

class EmptyDataset : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

/// File structure is wrong (bad header, missing field, unsupported version).
class SchemaError : public Error {
public:
  using Error::Error;
};

/// A row or value failed to parse; the message names the line number.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, std::size_t line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
  std::size_t line;
};

/// Training stalled: no LM step accepted for the configured number of
/// consecutive epochs.
class NoProgress : public Error {
public:
  using Error::Error;
};

/// LM normal equations unsolvable with damping at its cap.
class SingularHessian : public Error {
public:
  using Error::Error;
};

/// Pearson r undefined because all targets are equal.
class DegenerateVariance : public Error {
public:
  using Error::Error;
};

/// A controller needing a model was run without one, or an unknown
/// controller id was requested.
class InvalidController : public Error {
public:
  using Error::Error;
};

/// Precondition violation on an argument value.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

}  // namespace helios
