#pragma once

#include <stdexcept>
#include <string>

namespace ucplab {

/// Failure categories, mapped one-to-one onto CLI exit codes.
enum class ErrorKind {
  config,    ///< bad parameters, malformed config, schema violation (exit 2)
  solver,    ///< iteration failed to converge / numerical breakdown (exit 3)
  resource,  ///< grid or memory budget exceeded (exit 4)
  io,        ///< file read/write problems (exit 5)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& msg) { throw Error(ErrorKind::config, msg); }
[[noreturn]] inline void throw_solver(const std::string& msg) { throw Error(ErrorKind::solver, msg); }
[[noreturn]] inline void throw_resource(const std::string& msg) { throw Error(ErrorKind::resource, msg); }
[[noreturn]] inline void throw_io(const std::string& msg) { throw Error(ErrorKind::io, msg); }

}  // namespace ucplab
