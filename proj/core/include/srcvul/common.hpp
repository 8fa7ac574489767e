#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <vector>

namespace srcvul {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Source text that cannot be tokenized at all (binary data, a block comment
/// running off the end of the file).
class ParseError : public Error {
 public:
  ParseError(const std::string& path, int line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class DiffError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class MetricsError : public Error {
 public:
  using Error::Error;
};

class LshError : public Error {
 public:
  using Error::Error;
};

/// Database load/store failure. `line()` is the 1-based line of the
/// offending record, or 0 when the failure is not tied to a line.
class DbError : public Error {
 public:
  DbError(const std::string& what, int line = 0) : Error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// A non-fatal finding reported alongside a result.
struct Diagnostic {
  std::string location;  // usually a file path
  int line = 0;          // 0 when not line-specific
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

std::string to_string(const Diagnostic& d);

using Diagnostics = std::vector<Diagnostic>;

/// (file, function, variable) naming one slicing criterion.
struct Criterion {
  std::string file;
  std::string function;
  std::string variable;

  friend auto operator<=>(const Criterion&, const Criterion&) = default;
  friend bool operator==(const Criterion&, const Criterion&) = default;
};

std::string to_string(const Criterion& c);

/// (file, function) naming one function definition.
struct FunctionKey {
  std::string file;
  std::string function;

  friend auto operator<=>(const FunctionKey&, const FunctionKey&) = default;
  friend bool operator==(const FunctionKey&, const FunctionKey&) = default;
};

}  // namespace srcvul
