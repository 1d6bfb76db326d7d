#include "gesture_asr/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "gesture_asr/errors.hpp"

namespace gesture_asr {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

ConfigError bad(std::string_view key, std::string_view value, std::string_view expected) {
  return ConfigError(fmt::format("config key '{}': invalid value '{}' ({})", key, value, expected));
}

double parse_double(std::string_view key, std::string_view v) {
  std::string s(v);
  char* end = nullptr;
  double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw bad(key, v, "expected a number");
  return d;
}

long long parse_int(std::string_view key, std::string_view v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) throw bad(key, v, "expected an integer");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  std::string s(v);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw bad(key, v, "expected true/false");
}

std::vector<GestureLabel> parse_labels(std::string_view key, std::string_view v) {
  std::vector<GestureLabel> out;
  std::stringstream ss{std::string(v)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(GestureLabel::from_string(item));
  }
  if (out.empty()) throw bad(key, v, "expected a comma-separated label list");
  return out;
}

using Setter = void (*)(CliConfig&, std::string_view key, std::string_view value);

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table{
      {"threshold", [](CliConfig& c, auto k, auto v) { c.threshold = parse_double(k, v); }},
      {"inclusive_threshold", [](CliConfig& c, auto k, auto v) { c.inclusive_threshold = parse_bool(k, v); }},
      {"filter", [](CliConfig& c, auto k, auto v) { c.filter = parse_bool(k, v); }},
      {"parallel", [](CliConfig& c, auto k, auto v) { c.parallel = static_cast<int>(parse_int(k, v)); }},
      {"keep_fillers", [](CliConfig& c, auto k, auto v) { c.normalization.keep_fillers = parse_bool(k, v); }},
      {"keep_fragments", [](CliConfig& c, auto k, auto v) { c.normalization.keep_fragments = parse_bool(k, v); }},
      {"empty_reference",
       [](CliConfig& c, auto k, auto v) {
         if (v == "undefined")
           c.empty_reference = eval::EmptyReferencePolicy::undefined;
         else if (v == "hyp_length")
           c.empty_reference = eval::EmptyReferencePolicy::hyp_length;
         else if (v == "strict")
           c.empty_reference = eval::EmptyReferencePolicy::strict;
         else
           throw bad(k, v, "expected undefined, hyp_length or strict");
       }},
      {"gesture_source",
       [](CliConfig& c, auto k, auto v) {
         try {
           c.gesture_source = fusion::gesture_mode_from_string(v);
         } catch (const ConfigError&) {
           throw bad(k, v, "expected auto, annotations, model or none");
         }
       }},
      {"candidates", [](CliConfig& c, auto k, auto v) { c.candidates = parse_labels(k, v); }},
      {"frames_per_segment",
       [](CliConfig& c, auto k, auto v) { c.frames_per_segment = static_cast<std::size_t>(parse_int(k, v)); }},
      {"slack_ms", [](CliConfig& c, auto k, auto v) { c.slack_ms = parse_int(k, v); }},
      {"task", [](CliConfig& c, auto, auto v) { c.task = std::string(v); }},
      {"unparseable_as_other", [](CliConfig& c, auto k, auto v) { c.unparseable_as_other = parse_bool(k, v); }},
      {"asr_url", [](CliConfig& c, auto, auto v) { c.asr.base_url = std::string(v); }},
      {"asr_api_key", [](CliConfig& c, auto, auto v) { c.asr.api_key = std::string(v); }},
      {"asr_model", [](CliConfig& c, auto, auto v) { c.asr.model = std::string(v); }},
      {"gesture_url", [](CliConfig& c, auto, auto v) { c.gesture.base_url = std::string(v); }},
      {"gesture_api_key", [](CliConfig& c, auto, auto v) { c.gesture.api_key = std::string(v); }},
      {"gesture_model", [](CliConfig& c, auto, auto v) { c.gesture.model = std::string(v); }},
      {"rewriter_url", [](CliConfig& c, auto, auto v) { c.rewriter.base_url = std::string(v); }},
      {"rewriter_api_key", [](CliConfig& c, auto, auto v) { c.rewriter.api_key = std::string(v); }},
      {"rewriter_model", [](CliConfig& c, auto, auto v) { c.rewriter.model = std::string(v); }},
      {"connect_timeout_ms",
       [](CliConfig& c, auto k, auto v) { c.connect_timeout_ms = static_cast<int>(parse_int(k, v)); }},
      {"timeout_ms", [](CliConfig& c, auto k, auto v) { c.timeout_ms = static_cast<int>(parse_int(k, v)); }},
      {"retries", [](CliConfig& c, auto k, auto v) { c.retries = static_cast<int>(parse_int(k, v)); }},
      {"max_in_flight", [](CliConfig& c, auto k, auto v) { c.max_in_flight = static_cast<int>(parse_int(k, v)); }},
      {"gesture_system_template", [](CliConfig& c, auto, auto v) { c.gesture_system_template = std::string(v); }},
      {"gesture_user_template", [](CliConfig& c, auto, auto v) { c.gesture_user_template = std::string(v); }},
      {"rewrite_system_template", [](CliConfig& c, auto, auto v) { c.rewrite_system_template = std::string(v); }},
      {"rewrite_user_template", [](CliConfig& c, auto, auto v) { c.rewrite_user_template = std::string(v); }},
      {"mock", [](CliConfig& c, auto k, auto v) { c.mock = parse_bool(k, v); }},
      {"mock_asr_fixture", [](CliConfig& c, auto, auto v) { c.mock_asr_fixture = std::string(v); }},
      {"mock_gesture_fixture", [](CliConfig& c, auto, auto v) { c.mock_gesture_fixture = std::string(v); }},
  };
  return table;
}

}  // namespace

void CliConfig::set(std::string_view key, std::string_view value) {
  auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
  it->second(*this, key, trim(value));
}

void CliConfig::validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw ConfigError(fmt::format("threshold must lie in [0, 1], got {}", threshold));
  if (parallel < 1) throw ConfigError(fmt::format("parallel must be >= 1, got {}", parallel));
  if (frames_per_segment < 1) throw ConfigError("frames_per_segment must be >= 1");
  if (slack_ms < 0) throw ConfigError("slack_ms must be >= 0");
  if (connect_timeout_ms < 1 || timeout_ms < 1) throw ConfigError("timeouts must be positive");
  if (retries < 0) throw ConfigError("retries must be >= 0");
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
}

clients::HttpSettings CliConfig::http_settings(const BackendConfig& backend) const {
  clients::HttpSettings s;
  s.base_url = backend.base_url;
  s.api_key = backend.api_key;
  s.model = backend.model;
  s.connect_timeout_ms = connect_timeout_ms;
  s.timeout_ms = timeout_ms;
  s.retries = retries;
  s.max_in_flight = max_in_flight;
  return s;
}

clients::PromptTemplates CliConfig::templates() const {
  auto t = clients::PromptTemplates::defaults();
  if (!gesture_system_template.empty()) t.gesture_system = clients::load_template(gesture_system_template);
  if (!gesture_user_template.empty()) t.gesture_user = clients::load_template(gesture_user_template);
  if (!rewrite_system_template.empty()) t.rewrite_system = clients::load_template(rewrite_system_template);
  if (!rewrite_user_template.empty()) t.rewrite_user = clients::load_template(rewrite_user_template);
  clients::check_templates(t);
  return t;
}

fusion::PipelineConfig CliConfig::pipeline_config() const {
  fusion::PipelineConfig p;
  p.filter_enabled = filter;
  p.threshold = threshold;
  p.inclusive_threshold = inclusive_threshold;
  p.gesture_mode = gesture_source;
  p.candidates = candidates;
  p.frames_per_segment = frames_per_segment;
  p.overlap.slack_ms = slack_ms;
  p.parallel = parallel;
  p.task = task;
  return p;
}

const std::vector<std::string>& CliConfig::keys() {
  static const std::vector<std::string> out = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return out;
}

void apply_config_text(CliConfig& config, std::string_view text, const std::filesystem::path& base_dir) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    auto s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("config line {}: expected key = value", line_no));
    try {
      auto key = trim(s.substr(0, eq));
      auto value = trim(s.substr(eq + 1));
      const bool is_path = key.starts_with("mock_") || key.ends_with("_template");
      if (is_path && !value.empty() && !base_dir.empty() && std::filesystem::path(value).is_relative())
        value = (base_dir / value).string();
      config.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("config line {}: {}", line_no, e.what()));
    }
  }
}

void apply_environment(CliConfig& config, const std::function<const char*(const char*)>& getenv) {
  for (const auto& key : CliConfig::keys()) {
    std::string var = "GASR_" + key;
    std::transform(var.begin(), var.end(), var.begin(), [](unsigned char c) { return std::toupper(c); });
    const char* value = getenv ? getenv(var.c_str()) : std::getenv(var.c_str());
    if (!value) continue;
    try {
      config.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("environment {}: {}", var, e.what()));
    }
  }
}

CliConfig load_config(const std::optional<std::filesystem::path>& path) {
  CliConfig config;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("cannot read config file " + path->string());
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config_text(config, ss.str(), path->parent_path());
  }
  apply_environment(config);
  return config;
}

}  // namespace gesture_asr
