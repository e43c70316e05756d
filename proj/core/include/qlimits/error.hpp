#pragma once

#include <stdexcept>
#include <string>

namespace qlimits {

enum class ErrorKind {
  invalid_argument,  // caller violated a precondition
  numeric,           // computation could not produce a trustworthy value
};

/// Single exception type thrown by the library. The message is a short,
/// stable phrase (e.g. "incompatible grids") that callers may match on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
  throw Error(ErrorKind::invalid_argument, what);
}

[[noreturn]] inline void throw_numeric(const std::string& what) {
  throw Error(ErrorKind::numeric, what);
}

}  // namespace qlimits
