#pragma once

// HTTP backends.
//
// Transcription: POST {base}/v1/audio/transcriptions, multipart upload of the
// audio file (or JSON {"model", "url"} for remote audio). The response is
// verbose JSON with word entries carrying a confidence:
//   {"text": "...", "words": [{"word": "I", "start": 0.0, "end": 0.3, "probability": 0.9}]}
// Words may also be nested under "segments"; "confidence" or "score" are
// accepted in place of "probability". Times are seconds.
//
// Chat: POST {base}/v1/chat/completions with a system message and a user
// message made of a text part plus base64 data-URL image parts. The reply text
// is read from choices[0].message.content.

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>

#include "json.hpp"

#include "gesture_asr/clients.hpp"
#include "gesture_asr/prompts.hpp"

namespace gesture_asr::clients {

struct HttpSettings {
  std::string base_url;  // scheme://host[:port][/prefix]
  std::string api_key;
  std::string model;
  std::string endpoint;  // empty selects the client's default path
  int connect_timeout_ms = 5000;
  int timeout_ms = 60000;
  int retries = 2;  // extra attempts after the first one
  int retry_backoff_ms = 250;
  int max_in_flight = 4;
};

/// Cancels in-flight requests of every client sharing it (Ctrl-C).
class CancelSource {
 public:
  using Callback = std::function<void()>;

  void cancel();
  bool cancelled() const noexcept { return cancelled_.load(); }

  /// Returns a handle for `unregister`. Runs `callback` immediately when already cancelled.
  std::uint64_t on_cancel(Callback callback);
  void unregister(std::uint64_t handle);

 private:
  std::atomic<bool> cancelled_{false};
  std::mutex mutex_;
  std::uint64_t next_ = 0;
  std::map<std::uint64_t, Callback> callbacks_;
};

/// POST with timeouts, a bounded number of concurrent requests, retries on
/// transport errors, 429 and 5xx, and cancellation.
class HttpTransport {
 public:
  HttpTransport(HttpSettings settings, std::shared_ptr<CancelSource> cancel);

  struct FilePart {
    std::string name;
    std::string content;
    std::string filename;
    std::string content_type;
  };

  std::string post_json(const std::string& default_endpoint, const nlohmann::json& body);
  std::string post_multipart(const std::string& default_endpoint, const std::vector<FilePart>& parts);

  const HttpSettings& settings() const noexcept { return settings_; }

 private:
  template <typename Send>
  std::string with_retries(const std::string& path, Send&& send);
  std::string path_for(const std::string& default_endpoint) const;

  HttpSettings settings_;
  std::shared_ptr<CancelSource> cancel_;
  std::string origin_;  // scheme://host[:port]
  std::string prefix_;  // path below the origin, no trailing slash
  std::unique_ptr<std::counting_semaphore<1024>> in_flight_;
};

/// Decodes a verbose transcription response. Throws DecodeError.
asr::ScoredTranscript decode_transcription(std::string_view body, const std::string& audio_id,
                                           const std::string& source);

/// Extracts choices[0].message.content. Throws DecodeError.
std::string decode_chat_content(std::string_view body);

/// Chat-completion request body for a prompt, images inlined as data URLs.
nlohmann::json chat_request(const PromptBundle& prompt, const std::string& model);

std::string base64_encode(std::string_view data);

class HttpSpeechRecognizer : public SpeechRecognizer {
 public:
  HttpSpeechRecognizer(HttpSettings settings, std::shared_ptr<CancelSource> cancel);
  std::string id() const override;
  asr::ScoredTranscript recognize(const AudioRef& audio) override;

 private:
  HttpTransport transport_;
};

class HttpGestureRecognizer : public GestureRecognizer {
 public:
  HttpGestureRecognizer(HttpSettings settings, PromptTemplates templates, LabelParseOptions label_options,
                        std::shared_ptr<CancelSource> cancel);
  std::string id() const override;
  std::vector<GestureEvent> recognize(const FrameSet& frames, std::span<const GestureLabel> candidates) override;

 private:
  HttpTransport transport_;
  PromptTemplates templates_;
  LabelParseOptions label_options_;
};

class HttpRewriter : public Rewriter {
 public:
  HttpRewriter(HttpSettings settings, PromptTemplates templates, std::shared_ptr<CancelSource> cancel);
  std::string id() const override;
  RewriteResult rewrite(const WordSequence& asr_words, std::span<const GestureEvent> gestures,
                        const RewriteContext& context) override;
  PromptBundle prompt(const WordSequence& asr_words, std::span<const GestureEvent> gestures,
                      const RewriteContext& context) const override;

 private:
  HttpTransport transport_;
  PromptTemplates templates_;
};

}  // namespace gesture_asr::clients
