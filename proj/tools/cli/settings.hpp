#pragma once

// Key/value scenario settings: built-in defaults, then a config file, then
// HOLO_* environment variables, then command-line flags.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace holo::cli {

enum class KeyType { UInt, Real, Bool, Text, List };

struct KeySpec {
  std::string name;
  KeyType type = KeyType::Text;
  std::string default_value;
  std::string help;
  bool optional = false;  // an empty value means "not set"
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the real process environment.
std::optional<std::string> process_env(const std::string& name);

/// "learning_rate" -> "HOLO_LEARNING_RATE".
std::string env_name(std::string_view key);

/// "learning_rate" -> "--learning-rate".
std::string flag_name(std::string_view key);

/// `key = value` lines; blank lines and `#` comments are skipped. Throws
/// cli.config_syntax with the offending line number.
std::map<std::string, std::string> parse_config(std::string_view text);

class Settings {
 public:
  Settings() = default;

  bool has(std::string_view key) const;
  const std::string& text(std::string_view key) const;
  std::uint64_t uint(std::string_view key) const;
  double real(std::string_view key) const;
  std::optional<double> optional_real(std::string_view key) const;
  bool flag(std::string_view key) const;
  std::vector<std::string> list(std::string_view key) const;
  std::vector<std::uint64_t> uint_list(std::string_view key) const;

  void set(const KeySpec& spec, const std::string& value);

  /// Sorted `key = value` lines, one per known key.
  std::string resolved_text() const;

 private:
  const std::string& raw(std::string_view key) const;

  std::map<std::string, std::string, std::less<>> values_;
};

struct Overrides {
  std::optional<std::string> config_path;
  bool defaults_only = false;  // ignore config file and environment
  std::map<std::string, std::string> flags;
};

/// Applies the layers in order and type-checks every value. Unknown keys in
/// the config file raise cli.unknown_key; malformed values cli.invalid_value.
Settings resolve(const std::vector<KeySpec>& keys, const Overrides& overrides,
                 const EnvLookup& env);

}  // namespace holo::cli
