#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dcsim {

/// Error with a stable machine-readable code next to the human message.
/// Codes are short kebab-case tags ("empty-state", "wrong-space", ...);
/// tests and the CLI dispatch on code() rather than parsing what().
class SimError : public std::runtime_error {
public:
  SimError(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& what) {
  throw SimError(code, what);
}

}  // namespace dcsim
