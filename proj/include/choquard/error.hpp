#pragma once

#include <stdexcept>
#include <string>

namespace choquard {

enum class ErrorCode {
  invalid_argument = 1,
  grid_mismatch,
  not_converged,
  unsupported,
  io,
  numerical,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::invalid_argument, what);
}

}  // namespace choquard
