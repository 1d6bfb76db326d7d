#pragma once

// Flat "key = value" configuration with '#' comments. Every key can be
// overridden from the environment as GASR_<KEY> (upper case), and command-line
// flags override both.

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gesture_asr/asr_eval.hpp"
#include "gesture_asr/fusion.hpp"
#include "gesture_asr/http_clients.hpp"
#include "gesture_asr/prompts.hpp"

namespace gesture_asr {

struct BackendConfig {
  std::string base_url;
  std::string api_key;
  std::string model;
};

struct CliConfig {
  double threshold = asr::kDefaultThreshold;
  bool inclusive_threshold = false;
  bool filter = true;
  int parallel = 1;

  eval::NormalizationConfig normalization;
  eval::EmptyReferencePolicy empty_reference = eval::EmptyReferencePolicy::undefined;

  fusion::GestureMode gesture_source = fusion::GestureMode::automatic;
  std::vector<GestureLabel> candidates{default_gesture_labels().begin(), default_gesture_labels().end()};
  std::size_t frames_per_segment = 4;
  std::int64_t slack_ms = 500;
  std::string task = clients::RewriteContext{}.task;
  bool unparseable_as_other = false;

  BackendConfig asr;
  BackendConfig gesture;
  BackendConfig rewriter;
  int connect_timeout_ms = 5000;
  int timeout_ms = 60000;
  int retries = 2;
  int max_in_flight = 4;

  // empty means the built-in template
  std::string gesture_system_template;
  std::string gesture_user_template;
  std::string rewrite_system_template;
  std::string rewrite_user_template;

  bool mock = false;
  std::string mock_asr_fixture;
  std::string mock_gesture_fixture;

  /// Throws ConfigError naming the key for an unknown key or invalid value.
  void set(std::string_view key, std::string_view value);

  /// Throws ConfigError unless the numeric settings are in range.
  void validate() const;

  clients::HttpSettings http_settings(const BackendConfig& backend) const;
  clients::PromptTemplates templates() const;
  fusion::PipelineConfig pipeline_config() const;

  static const std::vector<std::string>& keys();
};

/// Parses "key = value" lines into `config`. Relative fixture and template paths
/// resolve against `base_dir`. Throws ConfigError with the line number.
void apply_config_text(CliConfig& config, std::string_view text, const std::filesystem::path& base_dir = {});

/// Applies GASR_<KEY> variables found through `getenv` (std::getenv by default).
void apply_environment(CliConfig& config,
                       const std::function<const char*(const char*)>& getenv = nullptr);

/// File (optional), then environment. The caller applies flags and validates.
CliConfig load_config(const std::optional<std::filesystem::path>& path);

}  // namespace gesture_asr
