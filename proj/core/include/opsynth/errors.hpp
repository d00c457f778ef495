#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opsynth {

/// Machine-readable failure classes. The CLI maps these onto exit codes.
enum class ErrorKind {
  kValidation,           // bad input or configuration
  kCutoff,               // requested level does not fit in the truncated space
  kUnmeasurableElement,  // normalisation constant below the floor
  kConditioning,         // inversion or estimate blew up numerically
  kNumerical,            // invariant violated beyond tolerance
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace opsynth
