#pragma once

#include <stdexcept>
#include <string>

namespace indl {

/// Input that violates a documented contract (bad parameters, inconsistent
/// manifests, malformed prediction files). Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Recall is undefined when the evaluated split holds no positive samples.
class UndefinedRecallError : public ValidationError {
 public:
  UndefinedRecallError() : ValidationError("recall undefined: tp + fn == 0") {}
};

/// Filesystem failures. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file that exists but cannot be decoded (truncated, bad magic, ...).
class MalformedFileError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace indl
