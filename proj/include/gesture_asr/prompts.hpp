#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "gesture_asr/clients.hpp"

namespace gesture_asr::clients {

/// Templates use {{name}} placeholders.
struct PromptTemplates {
  std::string gesture_system;
  std::string gesture_user;    // needs {{candidates}}
  std::string rewrite_system;
  std::string rewrite_user;    // needs {{asr_text}} and {{gestures}}

  static PromptTemplates defaults();
};

/// Replaces every {{name}}. Throws TemplateError on an unknown or unterminated placeholder.
std::string render_template(std::string_view text, const std::map<std::string, std::string>& values);

/// Throws TemplateError when a required placeholder is absent from the templates.
void check_templates(const PromptTemplates& templates);

/// Reads a template file; IoError when unreadable.
std::string load_template(const std::filesystem::path& path);

PromptBundle build_gesture_prompt(const FrameSet& frames, std::span<const GestureLabel> candidates,
                                  const PromptTemplates& templates = PromptTemplates::defaults());

PromptBundle build_rewrite_prompt(const WordSequence& asr_words, std::span<const GestureEvent> gestures,
                                  const RewriteContext& context,
                                  const PromptTemplates& templates = PromptTemplates::defaults());

struct LabelParseOptions {
  /// Map an unparseable reply to Other(reply) instead of throwing UnparseableLabel.
  bool unparseable_as_other = false;
};

/// Reads a gesture label out of free model text. Exact answers win, then a
/// unique candidate name as a whole word, then a unique base verb ("cut").
/// Returns nullopt when the model reports no gesture.
std::optional<GestureLabel> parse_gesture_response(std::string_view response, std::span<const GestureLabel> candidates,
                                                   const LabelParseOptions& options = {});

}  // namespace gesture_asr::clients
