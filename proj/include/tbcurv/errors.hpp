#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tbcurv {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset()` is the byte offset of the offending token.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifier : public SyntaxError {
 public:
  UnknownIdentifier(const std::string& name, std::size_t offset)
      : SyntaxError("unknown identifier '" + name + "'", offset), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Evaluation outside the domain of a partial node (division by zero, ln of a nonpositive value, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A metric family fails its positivity conditions, or a point lies outside the validated range.
class ValidityError : public Error {
 public:
  using Error::Error;
};

class SingularMetric : public Error {
 public:
  using Error::Error;
};

class StencilOutOfDomain : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class MissingNablaR : public Error {
 public:
  using Error::Error;
};

/// Bad run configuration (CLI flags or config file).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tbcurv
