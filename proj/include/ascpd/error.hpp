#pragma once

#include <stdexcept>
#include <string>

namespace ascpd {

enum class Errc {
  InvalidArgument,
  Shape,
  OutOfRange,
  Io,
  Format,
  Numeric,
};

/// Exception type thrown by every module of the library. The code maps
/// one-to-one onto the status values of the C API.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace ascpd
