#pragma once

#include <stdexcept>
#include <string>

namespace mitlgame {

// Error categories map one-to-one onto CLI exit codes (see exit_code()).
enum class ErrorKind {
  Validation,   // malformed model, kernel or policy input
  Unsupported,  // specification outside the supported MITL fragment
  Runtime,      // everything else, including internal solver failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const { return kind_; }
  // Short machine-readable tag such as "StochasticityViolation".
  const std::string& code() const { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

inline Error validation_error(std::string code, const std::string& message) {
  return Error(ErrorKind::Validation, std::move(code), message);
}
inline Error unsupported_error(std::string code, const std::string& message) {
  return Error(ErrorKind::Unsupported, std::move(code), message);
}
inline Error runtime_error(std::string code, const std::string& message) {
  return Error(ErrorKind::Runtime, std::move(code), message);
}

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return 2;
    case ErrorKind::Unsupported: return 3;
    case ErrorKind::Runtime: return 4;
  }
  return 4;
}

}  // namespace mitlgame
