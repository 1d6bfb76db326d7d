#include "gesture_asr/mock_clients.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

#include "gesture_asr/errors.hpp"
#include "gesture_asr/json_io.hpp"
#include "gesture_asr/lexicon.hpp"

namespace gesture_asr::clients {

namespace {

using nlohmann::json;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read mock fixture " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DecodeError("invalid mock fixture " + path.string() + ": " + e.what());
  }
}

bool is_subject_pronoun(std::string_view word) {
  return word == "I" || word == "i" || word == "you" || word == "we" || word == "they";
}

}  // namespace

MockSpeechRecognizer::MockSpeechRecognizer(std::map<std::string, asr::ScoredTranscript> fixtures)
    : fixtures_(std::move(fixtures)) {}

MockSpeechRecognizer MockSpeechRecognizer::from_file(const std::filesystem::path& path) {
  const auto j = read_json(path);
  std::map<std::string, asr::ScoredTranscript> fixtures;
  for (const auto& [audio_id, body] : j.items()) {
    auto entry = body;
    entry["audio_id"] = audio_id;
    fixtures.emplace(audio_id, json_io::transcript_from(entry));
  }
  return MockSpeechRecognizer(std::move(fixtures));
}

asr::ScoredTranscript MockSpeechRecognizer::recognize(const AudioRef& audio) {
  const auto it = fixtures_.find(audio.id());
  if (it == fixtures_.end()) throw BackendError(404, "mock ASR has no fixture for audio '" + audio.id() + "'");
  auto transcript = it->second;
  transcript.audio_id = audio.id();
  transcript.source = id();
  return transcript;
}

MockGestureRecognizer::MockGestureRecognizer(std::map<std::string, std::vector<std::string>> labels,
                                             std::set<std::string> fail_ids)
    : labels_(std::move(labels)), fail_ids_(std::move(fail_ids)) {}

MockGestureRecognizer MockGestureRecognizer::from_file(const std::filesystem::path& path) {
  const auto j = read_json(path);
  std::map<std::string, std::vector<std::string>> labels;
  std::set<std::string> fail;
  try {
    if (j.contains("labels")) labels = j.at("labels").get<std::map<std::string, std::vector<std::string>>>();
    if (j.contains("fail")) fail = j.at("fail").get<std::set<std::string>>();
  } catch (const json::exception& e) {
    throw DecodeError("invalid gesture fixture " + path.string() + ": " + e.what());
  }
  return MockGestureRecognizer(std::move(labels), std::move(fail));
}

std::vector<GestureEvent> MockGestureRecognizer::recognize(const FrameSet& frames,
                                                           std::span<const GestureLabel> candidates) {
  if (fail_ids_.contains(frames.id)) throw BackendError(503, "injected failure for frame set '" + frames.id + "'");
  const auto it = labels_.find(frames.id);
  if (it == labels_.end()) throw BackendError(404, "mock gesture backend has no fixture for '" + frames.id + "'");

  std::vector<GestureEvent> events;
  for (const auto& name : it->second) {
    auto label = GestureLabel::from_string(name);
    if (std::find(candidates.begin(), candidates.end(), label) == candidates.end()) {
      label = GestureLabel::other(name);
    }
    GestureEvent event;
    event.label = std::move(label);
    event.span = frames.segment;
    event.confidence = 1.0;
    event.source = GestureSource::model;
    events.push_back(std::move(event));
  }
  return events;
}

RewriteResult MockRewriter::rewrite(const WordSequence& asr_words, std::span<const GestureEvent> gestures,
                                    const RewriteContext&) {
  RewriteResult result;
  for (const auto& g : gestures) result.used_gestures.push_back(g.label);

  if (gestures.empty()) {
    result.final_text = asr_words.joined();
  } else {
    std::vector<GestureLabel> pending;
    for (const auto& g : gestures) {
      if (pending.empty() || pending.back() != g.label) pending.push_back(g.label);
    }
    std::size_t next = 0;
    std::vector<std::string> out;
    for (const auto& word : asr_words.words) {
      if (lexicon::is_filler(word)) {
        if (next < pending.size()) {
          const auto& label = pending[next++];
          const bool after_subject = !out.empty() && is_subject_pronoun(out.back());
          out.push_back(after_subject ? lexicon::base_verb(label) : label.name());
        }
        continue;
      }
      out.push_back(word == "i" ? "I" : word);
    }
    for (; next < pending.size(); ++next) out.push_back(pending[next].name());
    result.final_text = WordSequence{out}.joined();
  }

  if (result.final_text.empty()) throw EmptyResponse();
  result.model_raw = result.final_text;
  return result;
}

}  // namespace gesture_asr::clients
