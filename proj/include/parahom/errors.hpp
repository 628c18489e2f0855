#pragma once

#include <stdexcept>
#include <string>

namespace parahom {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-domain argument, or a spec violating its invariants.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// The space-time grid is too coarse for the requested oscillation period.
class ResolutionError : public Error {
 public:
  ResolutionError(const std::string& what, double max_spacing)
      : Error(what), max_spacing_(max_spacing) {}

  /// Largest spatial spacing that would have been accepted.
  double max_spacing() const { return max_spacing_; }

 private:
  double max_spacing_;
};

/// A density table was queried outside the range it covers.
class ExtrapolationError : public Error {
 public:
  using Error::Error;
};

/// Least-squares fit with too few (or degenerate) sample nodes.
class UnderdeterminedFit : public Error {
 public:
  using Error::Error;
};

/// Probe input does not contain enough collinear samples.
class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

}  // namespace parahom
