#pragma once

#include <stdexcept>
#include <string>

namespace gd {

/// Syntax error in DSL text, with 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, int line, int col)
      : std::runtime_error(std::move(msg) + " at line " + std::to_string(line) +
                           ", column " + std::to_string(col)),
        line_(line),
        col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

/// Runtime evaluation failure (division by zero at a parameter point, etc.).
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometric degeneracy: rank drops, singular parameter points, frames that
/// cannot be completed, genericity preconditions that fail.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gd
