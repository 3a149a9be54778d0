#include "holo/error.hpp"

namespace holo {

Error::Error(std::string code, const std::string& message)
    : std::runtime_error(code + ": " + message), code_(std::move(code)), message_(message) {}

}  // namespace holo
