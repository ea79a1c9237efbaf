#pragma once

#include <stdexcept>
#include <string>

namespace lipstab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural problem with a system, partition or perturbation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed system document. `path()` names the offending field.
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// The anchor point does not satisfy the nominal system.
class InfeasibleAnchor : public Error {
 public:
  using Error::Error;
};

/// The strong Slater condition fails where an operation requires it.
class SSCViolated : public Error {
 public:
  using Error::Error;
};

/// The feasible set an operation needs is empty.
class InfeasibleSystem : public Error {
 public:
  using Error::Error;
};

/// An iterative method hit its iteration cap.
class NonConvergent : public Error {
 public:
  using Error::Error;
};

/// Two independent routes that must agree did not.
class InternalError : public Error {
 public:
  using Error::Error;
};

class RetryExhausted : public Error {
 public:
  using Error::Error;
};

/// Partition estimates broke the min <= J <= max ordering. `samples()` holds
/// the offending samples as JSON.
class OrderingViolation : public Error {
 public:
  OrderingViolation(const std::string& message, std::string samples)
      : Error(message), samples_(std::move(samples)) {}
  const std::string& samples() const { return samples_; }

 private:
  std::string samples_;
};

}  // namespace lipstab
