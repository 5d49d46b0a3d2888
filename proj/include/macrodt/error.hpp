#pragma once

#include <stdexcept>
#include <string>

namespace macrodt {

enum class ErrorKind {
  structural,  // malformed tree, ranking or decoder state
  capability,  // scorer asked for a signal it does not provide
  config,      // bad options, unreadable inputs, unknown scorer spec
  data,        // corpus/prediction content violates an invariant
  scorer,      // backend failure: missing document, protocol violation
  io,          // output could not be written
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace macrodt
