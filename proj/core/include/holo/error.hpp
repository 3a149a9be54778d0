#pragma once

#include <stdexcept>
#include <string>

namespace holo {

/// Error raised by every core module. `code()` is module-qualified,
/// e.g. "cgh.non_power_of_two", and stable enough to match on.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message);

  const std::string& code() const noexcept { return code_; }
  /// The text without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string code_;
  std::string message_;
};

}  // namespace holo
