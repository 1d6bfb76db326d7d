#include "gesture_asr/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "gesture_asr/errors.hpp"
#include "gesture_asr/lexicon.hpp"

namespace gesture_asr::clients {

namespace {

constexpr std::string_view kGestureSystem =
    "You are an expert in co-speech gesture analysis for speech-language pathology. "
    "You recognize iconic hand gestures that depict concrete actions.";

constexpr std::string_view kGestureUser =
    "The images are {{frame_count}} frames sampled between {{segment_start_ms}} ms and {{segment_end_ms}} ms "
    "of a video in which a person with a language disorder is {{task}}.\n"
    "Classify the iconic hand gesture shown, if any, as exactly one of: {{candidates}}.\n"
    "Different people may depict the same action differently, for example by holding an imaginary tool "
    "or by enacting the motion with a flat hand; map both to the same label.\n"
    "Answer with the label only, or \"none\" if no iconic gesture is visible.";

constexpr std::string_view kRewriteSystem =
    "You rewrite speech recognition transcripts of people with language disorders. "
    "You integrate the meaning of the speaker's iconic gestures into the transcript.";

constexpr std::string_view kRewriteUser =
    "Speech recognition transcript: \"{{asr_text}}\"\n"
    "Gestures observed while the person was speaking (one per line):\n"
    "{{gestures}}\n"
    "The person is {{task}}.{{previous}}\n"
    "Rewrite the transcript so that it states what the speaker meant, combining the spoken words with the "
    "actions conveyed by the gestures. Keep the speaker's own words where possible and drop fillers. "
    "Answer with the rewritten transcript only.";

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::string clean_reply(std::string_view response) {
  auto lower = lexicon::to_lower_ascii(response);
  auto not_edge = [](unsigned char c) { return std::isalnum(c) || c == ':' || c == '[' || c == ']'; };
  auto b = std::find_if(lower.begin(), lower.end(), not_edge);
  auto e = std::find_if(lower.rbegin(), lower.rend(), not_edge).base();
  std::string out = b < e ? std::string(b, e) : std::string();
  if (out.starts_with("[gesture:") && out.ends_with("]")) out = out.substr(9, out.size() - 10);
  if (out.starts_with(":")) out.erase(0, 1);
  return out;
}

}  // namespace

PromptTemplates PromptTemplates::defaults() {
  return PromptTemplates{std::string(kGestureSystem), std::string(kGestureUser), std::string(kRewriteSystem),
                         std::string(kRewriteUser)};
}

std::string render_template(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    const auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) throw TemplateError("unterminated placeholder in template");
    const std::string name(text.substr(open + 2, close - open - 2));
    const auto it = values.find(name);
    if (it == values.end()) throw TemplateError(fmt::format("template placeholder '{{{{{}}}}}' has no value", name));
    out += it->second;
    pos = close + 2;
  }
  return out;
}

void check_templates(const PromptTemplates& templates) {
  auto require = [](const std::string& text, std::string_view name, std::string_view which) {
    if (text.find(fmt::format("{{{{{}}}}}", name)) == std::string::npos) {
      throw TemplateError(fmt::format("{} template is missing the '{{{{{}}}}}' placeholder", which, name));
    }
  };
  require(templates.gesture_user, "candidates", "gesture");
  require(templates.rewrite_user, "asr_text", "rewrite");
  require(templates.rewrite_user, "gestures", "rewrite");
}

std::string load_template(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read prompt template " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

PromptBundle build_gesture_prompt(const FrameSet& frames, std::span<const GestureLabel> candidates,
                                  const PromptTemplates& templates) {
  check_templates(templates);
  std::vector<std::string> names;
  for (const auto& c : candidates) names.push_back(c.name());
  const std::map<std::string, std::string> values = {
      {"frame_count", std::to_string(frames.frames.size())},
      {"segment_start_ms", std::to_string(frames.segment.start_ms)},
      {"segment_end_ms", std::to_string(frames.segment.end_ms)},
      {"candidates", fmt::format("{}", fmt::join(names, ", "))},
      {"task", RewriteContext{}.task},
      {"segment_id", frames.id},
  };
  PromptBundle bundle;
  bundle.system = render_template(templates.gesture_system, values);
  bundle.user = render_template(templates.gesture_user, values);
  for (const auto& frame : frames.frames) bundle.images.push_back(frame.path);
  return bundle;
}

PromptBundle build_rewrite_prompt(const WordSequence& asr_words, std::span<const GestureEvent> gestures,
                                  const RewriteContext& context, const PromptTemplates& templates) {
  check_templates(templates);
  std::string gesture_lines;
  for (const auto& g : gestures) {
    if (!gesture_lines.empty()) gesture_lines.push_back('\n');
    gesture_lines += "- [gesture:" + g.label.name() + "]";
    if (g.span) gesture_lines += fmt::format(" {}-{} ms", g.span->start_ms, g.span->end_ms);
  }
  if (gesture_lines.empty()) gesture_lines = "- (none)";
  const std::map<std::string, std::string> values = {
      {"asr_text", asr_words.joined()},
      {"gestures", gesture_lines},
      {"task", context.task},
      {"speaker", context.speaker},
      {"utterance_id", context.utterance_id},
      {"previous", context.previous_text.empty() ? std::string()
                                                 : " Previously the person said: \"" + context.previous_text + "\""},
  };
  return PromptBundle{render_template(templates.rewrite_system, values),
                      render_template(templates.rewrite_user, values), {}};
}

std::optional<GestureLabel> parse_gesture_response(std::string_view response, std::span<const GestureLabel> candidates,
                                                   const LabelParseOptions& options) {
  const auto cleaned = clean_reply(response);
  if (cleaned == "none" || cleaned.starts_with("none ") || cleaned == "no gesture") return std::nullopt;
  for (const auto& c : candidates) {
    if (cleaned == c.name()) return c;
  }

  const auto words = words_of(response);
  auto unique_match = [&](auto&& form) -> std::optional<GestureLabel> {
    std::set<GestureLabel> found;
    for (const auto& c : candidates) {
      if (std::find(words.begin(), words.end(), form(c)) != words.end()) found.insert(c);
    }
    if (found.size() == 1) return *found.begin();
    if (found.size() > 1) throw UnparseableLabel(std::string(response));
    return std::nullopt;
  };

  try {
    if (auto label = unique_match([](const GestureLabel& c) { return c.name(); })) return label;
    if (auto label = unique_match([](const GestureLabel& c) { return lexicon::base_verb(c); })) return label;
  } catch (const UnparseableLabel&) {
    if (!options.unparseable_as_other) throw;
    return GestureLabel::other(cleaned.empty() ? std::string(response) : cleaned);
  }

  const bool says_none = std::find(words.begin(), words.end(), "none") != words.end() ||
                         response.find("no gesture") != std::string_view::npos ||
                         response.find("no iconic gesture") != std::string_view::npos;
  if (says_none) return std::nullopt;
  if (options.unparseable_as_other && !cleaned.empty()) return GestureLabel::other(cleaned);
  throw UnparseableLabel(std::string(response));
}

}  // namespace gesture_asr::clients
