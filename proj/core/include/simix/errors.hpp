#pragma once

#include <stdexcept>
#include <string>

namespace simix {

enum class ErrorKind {
  invalid_argument,   // bad inputs: shapes, non-finite values, broken invariants
  numerical_rank,     // singular covariance / rank-deficient normal equations
  degenerate_window,  // kernel window with no mass; caller must widen bandwidth
  config,             // inconsistent run configuration
  io                  // file I/O and parsing
};

// All library errors carry a kind (drives CLI exit codes) and the module
// that raised them.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::numerical_rank: return "numerical-rank";
    case ErrorKind::degenerate_window: return "degenerate-window";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

[[noreturn]] inline void throw_invalid(const std::string& module, const std::string& msg) {
  throw Error(ErrorKind::invalid_argument, module, msg);
}
[[noreturn]] inline void throw_rank(const std::string& module, const std::string& msg) {
  throw Error(ErrorKind::numerical_rank, module, msg);
}
[[noreturn]] inline void throw_degenerate(const std::string& module, const std::string& msg) {
  throw Error(ErrorKind::degenerate_window, module, msg);
}
[[noreturn]] inline void throw_config(const std::string& module, const std::string& msg) {
  throw Error(ErrorKind::config, module, msg);
}
[[noreturn]] inline void throw_io(const std::string& module, const std::string& msg) {
  throw Error(ErrorKind::io, module, msg);
}

}  // namespace simix
