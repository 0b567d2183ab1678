#pragma once

#include <stdexcept>
#include <string>

namespace histree {

// Every library failure derives from Error so callers can catch broadly.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : Error { using Error::Error; };
struct ParameterError : Error { using Error::Error; };
struct RangeError : Error { using Error::Error; };
struct ContractViolation : Error { using Error::Error; };
struct ModelError : Error { using Error::Error; };
struct StructureError : Error { using Error::Error; };
struct InconsistencyError : Error { using Error::Error; };
struct NotStabilizedError : Error { using Error::Error; };
struct CapExceededError : Error { using Error::Error; };
struct ConfigurationError : Error { using Error::Error; };

// Malformed input text; line and column are 1-based, 0 when unknown.
struct ParseError : ValidationError {
  ParseError(const std::string& what, std::size_t l, std::size_t c) : ValidationError(what), line(l), column(c) {}
  std::size_t line;
  std::size_t column;
};

struct PartialAssignmentError : Error {
  PartialAssignmentError(const std::string& what, std::size_t unreached)
      : Error(what), unreached_count(unreached) {}
  std::size_t unreached_count;
};

}  // namespace histree
