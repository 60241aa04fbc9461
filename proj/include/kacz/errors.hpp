#pragma once

#include <stdexcept>
#include <string>

namespace kacz {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed arguments outside an operation's domain (bad n, bad sizes).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Enumeration would visit more subsets than the configured cap.
class CapExceeded : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Problems with input data: unreadable files, malformed numbers,
/// mismatched dimensions or an inconsistent system.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Floating point trouble: rank deficiency, degenerate geometry, solver failure.
class NumericError : public Error {
 public:
  using Error::Error;
};

class DependentSubset : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegenerateAngle : public NumericError {
 public:
  using NumericError::NumericError;
};

class RankDeficient : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace kacz
