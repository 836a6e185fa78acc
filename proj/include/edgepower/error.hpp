#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edgepower {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// The chain has more than one closed class, so the balance system is singular.
class NonUniqueStationary : public Error {
 public:
  using Error::Error;
};

class InfeasiblePerturbation : public Error {
 public:
  using Error::Error;
};

class UnknownState : public Error {
 public:
  using Error::Error;
};

class IllegalAction : public Error {
 public:
  using Error::Error;
};

class MissingBaseline : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Text input that failed to parse; `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NegativeDemand : public ParseError {
 public:
  explicit NegativeDemand(std::size_t line)
      : ParseError(line, "negative demand") {}
};

}  // namespace edgepower
