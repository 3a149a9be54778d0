#include "run.hpp"

#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "holo/error.hpp"

namespace holo::cli {

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

int fail(std::ostream& err, std::string_view code, std::string_view message, int status) {
  err << "error code=" << code << " message=\"" << escape(message) << "\"" << std::endl;
  return status;
}

bool is_usage_code(const std::string& code) { return code.rfind("cli.", 0) == 0; }

}  // namespace

int run_scenario(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                 const EnvLookup& env) {
  CLI::App app{"Holographic telepresence simulator: holograms, federated learning, "
               "network model and scene composition",
               "holo"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show every subcommand option");

  struct Parsed {
    CLI::App* app = nullptr;
    std::vector<KeySpec> keys;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string config;
    bool defaults = false;
  };
  std::map<std::string, Parsed> commands;
  for (const auto& name : command_names()) {
    Parsed& p = commands[name];
    p.app = app.add_subcommand(name, std::string(command_help(name)));
    p.app->add_option("--config", p.config, "key = value settings file");
    p.app->add_flag("--defaults", p.defaults, "Ignore config file and HOLO_* variables");
    p.keys = keys_for(name);
    for (const auto& k : p.keys) {
      std::string help = k.help;
      if (!k.default_value.empty()) help += " [" + k.default_value + "]";
      p.options[k.name] = p.app->add_option(flag_name(k.name), p.values[k.name], help);
    }
  }

  std::vector<const char*> argv{"holo"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    return fail(err, "cli.usage", e.what(), 2);
  }

  for (auto& [name, p] : commands) {
    if (!p.app->parsed()) continue;
    try {
      Overrides ov;
      if (!p.config.empty()) ov.config_path = p.config;
      ov.defaults_only = p.defaults;
      for (const auto& [key, opt] : p.options) {
        if (opt->count() > 0) ov.flags[key] = p.values[key];
      }
      const Settings settings = resolve(p.keys, ov, env);
      run_command(name, settings, out);
      return 0;
    } catch (const Error& e) {
      return fail(err, e.code(), e.message(), is_usage_code(e.code()) ? 2 : 1);
    } catch (const std::exception& e) {
      return fail(err, "internal", e.what(), 1);
    }
  }
  return fail(err, "cli.usage", "no subcommand given", 2);
}

}  // namespace holo::cli
