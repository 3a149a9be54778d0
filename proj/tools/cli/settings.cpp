#include "settings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "holo/error.hpp"

namespace holo::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(std::string_view s) {
  if (s.empty()) return std::nullopt;
  const std::string copy(s);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (end != copy.c_str() + copy.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  return std::nullopt;
}

[[noreturn]] void invalid(const std::string& key, const std::string& value,
                          const char* expected) {
  throw Error("cli.invalid_value",
              key + " = '" + value + "' is not " + expected);
}

std::string normalize(const KeySpec& spec, const std::string& value) {
  const std::string v = trim(value);
  if (spec.optional && v.empty()) return v;
  switch (spec.type) {
    case KeyType::UInt:
      if (!parse_uint(v)) invalid(spec.name, v, "a non-negative integer");
      return v;
    case KeyType::Real:
      if (!parse_real(v)) invalid(spec.name, v, "a finite number");
      return v;
    case KeyType::Bool: {
      const auto b = parse_bool(v);
      if (!b) invalid(spec.name, v, "true or false");
      return *b ? "true" : "false";
    }
    case KeyType::List: {
      std::string joined;
      for (const auto& item : split(v, ',')) {
        if (item.empty()) invalid(spec.name, v, "a comma-separated list");
        if (!joined.empty()) joined += ',';
        joined += item;
      }
      return joined;
    }
    case KeyType::Text:
      return v;
  }
  return v;
}

}  // namespace

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

std::string env_name(std::string_view key) {
  std::string out = "HOLO_";
  for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string flag_name(std::string_view key) {
  std::string out = "--";
  for (char c : key) out += c == '_' ? '-' : c;
  return out;
}

std::map<std::string, std::string> parse_config(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error("cli.config_syntax", "line " + std::to_string(n) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) {
      throw Error("cli.config_syntax", "line " + std::to_string(n) + ": empty key");
    }
    if (out.contains(key)) {
      throw Error("cli.config_syntax", "line " + std::to_string(n) + ": duplicate key " + key);
    }
    out[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

bool Settings::has(std::string_view key) const {
  const auto it = values_.find(key);
  return it != values_.end() && !it->second.empty();
}

const std::string& Settings::raw(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw Error("cli.unknown_key", "setting " + std::string(key) + " is not defined here");
  }
  return it->second;
}

const std::string& Settings::text(std::string_view key) const { return raw(key); }

std::uint64_t Settings::uint(std::string_view key) const { return *parse_uint(raw(key)); }

double Settings::real(std::string_view key) const { return *parse_real(raw(key)); }

std::optional<double> Settings::optional_real(std::string_view key) const {
  if (!has(key)) return std::nullopt;
  return real(key);
}

bool Settings::flag(std::string_view key) const { return raw(key) == "true"; }

std::vector<std::string> Settings::list(std::string_view key) const {
  return split(raw(key), ',');
}

std::vector<std::uint64_t> Settings::uint_list(std::string_view key) const {
  std::vector<std::uint64_t> out;
  for (const auto& item : list(key)) {
    const auto v = parse_uint(item);
    if (!v) invalid(std::string(key), item, "a non-negative integer");
    out.push_back(*v);
  }
  return out;
}

void Settings::set(const KeySpec& spec, const std::string& value) {
  values_[spec.name] = normalize(spec, value);
}

std::string Settings::resolved_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

Settings resolve(const std::vector<KeySpec>& keys, const Overrides& overrides,
                 const EnvLookup& env) {
  Settings s;
  for (const auto& k : keys) s.set(k, k.default_value);

  const auto find = [&](const std::string& name) -> const KeySpec* {
    for (const auto& k : keys) {
      if (k.name == name) return &k;
    }
    return nullptr;
  };

  if (!overrides.defaults_only) {
    if (overrides.config_path) {
      std::ifstream in(*overrides.config_path);
      if (!in) throw Error("cli.config_missing", "cannot read " + *overrides.config_path);
      std::stringstream text;
      text << in.rdbuf();
      for (const auto& [key, value] : parse_config(text.str())) {
        const KeySpec* spec = find(key);
        if (!spec) throw Error("cli.unknown_key", "unknown config key " + key);
        s.set(*spec, value);
      }
    }
    for (const auto& k : keys) {
      if (auto v = env(env_name(k.name))) s.set(k, *v);
    }
  }
  for (const auto& [key, value] : overrides.flags) {
    const KeySpec* spec = find(key);
    if (!spec) throw Error("cli.unknown_key", "unknown setting " + key);
    s.set(*spec, value);
  }
  return s;
}

}  // namespace holo::cli
