#include "cyclebench/error.hpp"

namespace cyclebench {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::range: return "range";
    case ErrorKind::shape: return "shape";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::inconsistent: return "inconsistent";
    case ErrorKind::duplicate: return "duplicate";
    case ErrorKind::domain: return "domain";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::format: return "format";
    case ErrorKind::io: return "io";
    case ErrorKind::no_overlap: return "no-overlap";
    case ErrorKind::kind_mismatch: return "kind-mismatch";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::degenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "; ";
    out += issue;
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : Error(ErrorKind::validation, join_issues(issues)), issues_(std::move(issues)) {}

}  // namespace cyclebench
