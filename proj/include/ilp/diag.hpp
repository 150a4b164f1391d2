#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ilp {

/// Byte range inside one source document. Lines are 1-based.
struct SourceSpan {
  std::string document_path;
  std::size_t byte_start = 0;
  std::size_t byte_end = 0;
  std::size_t line_start = 1;

  bool operator==(const SourceSpan&) const = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  SourceSpan span;
  std::string message;

  std::string format() const {
    return span.document_path + ":" + std::to_string(span.line_start) + ": " +
           (severity == Severity::Error ? "error" : "warning") + ": " + message;
  }
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::Error) return true;
  return false;
}

/// Hard failure while reading a document (unterminated fence, bad info string...).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, SourceSpan span)
      : std::runtime_error(span.document_path + ":" + std::to_string(span.line_start) +
                           ": " + message),
        span_(std::move(span)) {}
  const SourceSpan& span() const { return span_; }

 private:
  SourceSpan span_;
};

/// Raised when a restricted edge set that must be acyclic contains a cycle.
class CycleError : public std::runtime_error {
 public:
  explicit CycleError(std::vector<std::string> cycle)
      : std::runtime_error(describe(cycle)), cycle_(std::move(cycle)) {}
  const std::vector<std::string>& cycle() const { return cycle_; }

 private:
  static std::string describe(const std::vector<std::string>& cycle) {
    std::string out = "dependency cycle:";
    for (const auto& n : cycle) out += " " + n;
    return out;
  }
  std::vector<std::string> cycle_;
};

}  // namespace ilp
