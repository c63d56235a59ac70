#pragma once

#include <stdexcept>
#include <string>

namespace ccstat {

/// Base of all errors raised by the library for bad data or degenerate
/// results. Precondition violations on API arguments throw
/// std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input: files, manifests, masks, fold tables.
class DataError : public Error {
 public:
  using Error::Error;
};

/// The pooled illuminant vector is all-zero, e.g. Gray-edge on a flat image.
class ZeroSignalError : public Error {
 public:
  ZeroSignalError() : Error("estimate pooled to an all-zero vector") {}
  using Error::Error;
};

/// A computation that has no meaningful result on its inputs (zero variance,
/// every grid tuple skipped, fewer than two difference pairs, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace ccstat
