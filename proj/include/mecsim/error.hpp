#pragma once

#include <stdexcept>
#include <string>

namespace mecsim {

enum class Errc {
    InvalidArgument,
    Io,
    Config,
    Validation,
    Runtime,
};

/// Library-wide exception. The C API maps Errc to status codes at the
/// boundary; inside the core we throw.
class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace mecsim
