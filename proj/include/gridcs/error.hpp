#pragma once

#include <stdexcept>
#include <string>

namespace gridcs {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  invalid_argument,  // precondition violated by the caller
  data,              // malformed or inconsistent input data
  numerical,         // estimation could not proceed (flat fit, degenerate nuisance)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what) {
  throw Error(kind, what);
}

}  // namespace gridcs
