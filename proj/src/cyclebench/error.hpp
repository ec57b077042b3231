#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cyclebench {

enum class ErrorKind {
  validation,
  range,
  shape,
  numeric,
  inconsistent,
  duplicate,
  domain,
  unsupported,
  format,
  io,
  no_overlap,
  kind_mismatch,
  empty_input,
  degenerate,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the core carries a kind so the C boundary can map
/// it onto a status code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Validation failure holding every violated invariant, not only the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues);

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

}  // namespace cyclebench
