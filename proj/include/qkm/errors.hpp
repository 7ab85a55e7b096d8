#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qkm {

/// Malformed input text. line() is 1-based, or 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Graph does not satisfy a structural requirement (e.g. strong connectivity).
class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A protocol invariant or step bound was violated at runtime.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qkm
