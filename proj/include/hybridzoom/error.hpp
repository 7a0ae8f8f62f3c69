#pragma once

#include <stdexcept>
#include <string>

namespace hz {

enum class ErrorKind {
  InvalidInput,
  DimensionMismatch,
  Io,
  Config,
  Metadata,
};

// Single exception type for the library. The CLI maps kind() onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const char* msg) {
  if (!cond) throw Error(kind, msg);
}

}  // namespace hz
