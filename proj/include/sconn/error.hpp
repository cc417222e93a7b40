#pragma once

#include <stdexcept>
#include <string>

namespace sconn {

/// Base of every error raised by the library. `exit_code()` is the CLI code
/// the driver maps the error to (1 verification failure, 2 input error,
/// 3 truncation overflow).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual int exit_code() const { return 2; }
};

class RingMismatch : public Error {
 public:
  explicit RingMismatch(const std::string& what) : Error("ring mismatch: " + what) {}
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& what) : Error("shape mismatch: " + what) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error("precondition violated: " + what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("parse error: " + what) {}
};

/// An asserted identity did not hold exactly.
class VerificationFailure : public Error {
 public:
  explicit VerificationFailure(const std::string& what) : Error("verification failed: " + what) {}
  int exit_code() const override { return 1; }
};

/// A linear solve failed at the requested monomial bound but succeeded with
/// more room.
class TruncationOverflow : public Error {
 public:
  explicit TruncationOverflow(const std::string& what) : Error("truncation overflow: " + what) {}
  int exit_code() const override { return 3; }
};

}  // namespace sconn
