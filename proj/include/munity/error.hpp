#pragma once

#include <stdexcept>
#include <string>

namespace munity {

struct SourcePos {
  int line = 0;
  int col = 0;

  // Positions are diagnostics only; they never participate in structural
  // equality of syntax trees.
  bool operator==(const SourcePos&) const { return true; }

  std::string str() const {
    return std::to_string(line) + ":" + std::to_string(col);
  }
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(SourcePos pos, const std::string& msg)
      : Error(pos.str() + ": " + msg), pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

/// Name resolution failure while compiling a system into a runnable model.
class ResolveError : public Error {
 public:
  using Error::Error;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

class ReactionDivergence : public Error {
 public:
  ReactionDivergence(const std::string& statement, int iterations)
      : Error("reaction divergence: no fixed point after " +
              std::to_string(iterations) + " sweeps (last change by " +
              statement + ")"),
        statement_(statement) {}
  const std::string& statement() const { return statement_; }

 private:
  std::string statement_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or unwritable file.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace munity
