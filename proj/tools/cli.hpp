#pragma once
// Command-line front end. Pipeline settings resolve per field, highest
// precedence first: command-line flag, SGVQA_* environment variable, config
// file (TOML), built-in default.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sgvqa/model.hpp"

namespace sgvqa::cli {

struct ConfigField {
  std::string key;         // config-file key, e.g. "backend.model"
  std::string flag;        // e.g. "--model"; empty when config/env only
  bool is_switch = false;  // flag takes no value and applies `switch_value`
  std::string switch_value;
  std::string help;
  std::function<void(PipelineConfig&, const std::string&)> apply;

  /// SGVQA_ followed by the key upper-cased with '.' as '_'.
  std::string env_name() const;
};

const std::vector<ConfigField>& config_fields();

/// key -> value pairs from a TOML config file. Tables map to dotted keys.
/// Throws ValidationError for unknown keys or non-scalar values.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

enum class Source { default_value, config_file, env, flag };

struct ResolvedConfig {
  PipelineConfig config;
  std::map<std::string, Source> sources;  // per field key
};

/// Layers default < config file < environment < flags. Values that fail to
/// parse raise ValidationError naming the field and its source.
ResolvedConfig resolve_config(const std::map<std::string, std::string>& file_values,
                              const EnvLookup& env,
                              const std::map<std::string, std::string>& flag_values);

/// Entry point behind main(); returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_env);

}  // namespace sgvqa::cli
