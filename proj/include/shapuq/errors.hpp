#pragma once

#include <stdexcept>
#include <string>

namespace shapuq {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// An argument is outside its documented domain (bad player index,
/// player already in the coalition, invalid noise parameter, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The request would exceed a hard size limit (too many players for
/// exact enumeration, table too large to materialize).
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A game description is structurally invalid: missing coalition values,
/// non-finite entries, inconsistent player count.
class MalformedGameError : public Error {
 public:
  using Error::Error;
};

/// The requested analytic quantity is not available for this noise model
/// (e.g. moments beyond the declared order, densities for table noise).
class UnsupportedAnalyticsError : public Error {
 public:
  using Error::Error;
};

/// A numeric procedure failed (rank-deficient least squares, non-finite
/// intermediate).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace shapuq
