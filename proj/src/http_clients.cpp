#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "gesture_asr/http_clients.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "gesture_asr/errors.hpp"
#include "gesture_asr/lexicon.hpp"

namespace gesture_asr::clients {

namespace {

using nlohmann::json;

constexpr const char* kTranscriptionPath = "/v1/audio/transcriptions";
constexpr const char* kChatPath = "/v1/chat/completions";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string image_mime(const std::filesystem::path& path) {
  const auto ext = lexicon::to_lower_ascii(path.extension().string());
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".png") return "image/png";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

std::string audio_mime(const std::string& format) {
  if (format == "wav") return "audio/wav";
  if (format == "mp3") return "audio/mpeg";
  if (format == "flac") return "audio/flac";
  return "application/octet-stream";
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

httplib::Headers auth_headers(const HttpSettings& settings) {
  httplib::Headers headers;
  if (!settings.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings.api_key);
  return headers;
}

bool retryable(int status) { return status == 429 || status >= 500; }

void decode_words(const json& words, const std::string& context, asr::ScoredTranscript& out) {
  if (!words.is_array()) throw DecodeError(context + ": 'words' must be an array");
  for (const auto& w : words) {
    if (!w.is_object()) throw DecodeError(context + ": word entry is not an object");
    const auto text_key = w.contains("word") ? "word" : "text";
    if (!w.contains(text_key) || !w[text_key].is_string()) throw DecodeError(context + ": word entry without text");
    auto text = trim(w[text_key].get<std::string>());
    if (text.empty()) continue;

    const json* conf = nullptr;
    for (const char* key : {"confidence", "probability", "score"}) {
      if (w.contains(key)) {
        conf = &w[key];
        break;
      }
    }
    if (conf == nullptr || !conf->is_number()) {
      throw DecodeError(fmt::format("{}: word '{}' has no numeric confidence", context, text));
    }
    const double c = conf->get<double>();
    if (!(c >= 0.0 && c <= 1.0)) throw DecodeError(fmt::format("{}: confidence {} outside [0, 1]", context, c));

    asr::ScoredToken token{std::move(text), c, std::nullopt};
    if (w.contains("start") && w.contains("end") && w["start"].is_number() && w["end"].is_number()) {
      const auto start = std::llround(w["start"].get<double>() * 1000.0);
      const auto end = std::llround(w["end"].get<double>() * 1000.0);
      if (start >= 0 && end > start) token.span = TimeSpan{start, end};
    }
    out.tokens.push_back(std::move(token));
  }
}

}  // namespace

// --- cancellation ------------------------------------------------------------

void CancelSource::cancel() {
  std::map<std::uint64_t, Callback> callbacks;
  {
    std::lock_guard lock(mutex_);
    cancelled_ = true;
    callbacks = callbacks_;
  }
  for (auto& [_, cb] : callbacks) cb();
}

std::uint64_t CancelSource::on_cancel(Callback callback) {
  std::unique_lock lock(mutex_);
  if (cancelled_) {
    lock.unlock();
    callback();
    return 0;
  }
  const auto handle = ++next_;
  callbacks_.emplace(handle, std::move(callback));
  return handle;
}

void CancelSource::unregister(std::uint64_t handle) {
  std::lock_guard lock(mutex_);
  callbacks_.erase(handle);
}

// --- transport -----------------------------------------------------------------

HttpTransport::HttpTransport(HttpSettings settings, std::shared_ptr<CancelSource> cancel)
    : settings_(std::move(settings)), cancel_(std::move(cancel)) {
  if (settings_.base_url.empty()) throw ConfigError("backend base URL is not configured");
  if (settings_.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
  if (settings_.retries < 0) throw ConfigError("retries must be >= 0");
  if (!cancel_) cancel_ = std::make_shared<CancelSource>();

  const auto scheme_end = settings_.base_url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base URL needs a scheme: " + settings_.base_url);
  const auto path_start = settings_.base_url.find('/', scheme_end + 3);
  origin_ = settings_.base_url.substr(0, path_start);
  if (path_start != std::string::npos) prefix_ = settings_.base_url.substr(path_start);
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  in_flight_ = std::make_unique<std::counting_semaphore<1024>>(std::min(settings_.max_in_flight, 1024));
}

std::string HttpTransport::path_for(const std::string& default_endpoint) const {
  return prefix_ + (settings_.endpoint.empty() ? default_endpoint : settings_.endpoint);
}

template <typename Send>
std::string HttpTransport::with_retries(const std::string& path, Send&& send) {
  const int attempts = settings_.retries + 1;
  std::string last_error;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (cancel_->cancelled()) throw TransportError("request cancelled: " + origin_ + path);

    httplib::Client client(origin_);
    client.set_connection_timeout(std::chrono::milliseconds(settings_.connect_timeout_ms));
    client.set_read_timeout(std::chrono::milliseconds(settings_.timeout_ms));
    client.set_write_timeout(std::chrono::milliseconds(settings_.timeout_ms));

    httplib::Result result;
    {
      in_flight_->acquire();
      const auto handle = cancel_->on_cancel([&client] { client.stop(); });
      struct Release {
        HttpTransport* self;
        CancelSource* cancel;
        std::uint64_t handle;
        ~Release() {
          cancel->unregister(handle);
          self->in_flight_->release();
        }
      } release{this, cancel_.get(), handle};
      result = send(client, path);
    }

    if (cancel_->cancelled()) throw TransportError("request cancelled: " + origin_ + path);
    if (result) {
      if (result->status >= 200 && result->status < 300) return result->body;
      if (!retryable(result->status) || attempt == attempts) throw BackendError(result->status, result->body);
      last_error = fmt::format("status {}", result->status);
    } else {
      last_error = httplib::to_string(result.error());
      if (attempt == attempts) {
        throw TransportError(fmt::format("{}{}: {} after {} attempt(s)", origin_, path, last_error, attempts));
      }
    }
    spdlog::warn("POST {}{} failed ({}); retry attempt {}/{}", origin_, path, last_error, attempt + 1, attempts);
    std::this_thread::sleep_for(std::chrono::milliseconds(settings_.retry_backoff_ms * attempt));
  }
  throw TransportError(last_error);  // unreachable
}

std::string HttpTransport::post_json(const std::string& default_endpoint, const json& body) {
  const auto payload = body.dump();
  const auto headers = auth_headers(settings_);
  return with_retries(path_for(default_endpoint), [&](httplib::Client& client, const std::string& path) {
    return client.Post(path, headers, payload, "application/json");
  });
}

std::string HttpTransport::post_multipart(const std::string& default_endpoint, const std::vector<FilePart>& parts) {
  httplib::MultipartFormDataItems items;
  for (const auto& p : parts) items.push_back({p.name, p.content, p.filename, p.content_type});
  const auto headers = auth_headers(settings_);
  return with_retries(path_for(default_endpoint), [&](httplib::Client& client, const std::string& path) {
    return client.Post(path, headers, items);
  });
}

// --- wire formats ------------------------------------------------------------

std::string base64_encode(std::string_view data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(data.data()), static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

asr::ScoredTranscript decode_transcription(std::string_view body, const std::string& audio_id,
                                           const std::string& source) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw DecodeError(std::string("transcription response is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw DecodeError("transcription response must be a JSON object");

  asr::ScoredTranscript out;
  out.audio_id = audio_id;
  out.source = source;
  if (j.contains("words")) {
    decode_words(j["words"], "transcription", out);
  } else if (j.contains("segments") && j["segments"].is_array()) {
    for (const auto& segment : j["segments"]) {
      if (segment.contains("words")) decode_words(segment["words"], "transcription segment", out);
    }
  } else {
    throw DecodeError("transcription response has neither 'words' nor 'segments'");
  }
  try {
    asr::validate(out);
  } catch (const std::invalid_argument& e) {
    throw DecodeError(e.what());
  }
  return out;
}

std::string decode_chat_content(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw DecodeError(std::string("chat response is not JSON: ") + e.what());
  }
  if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw DecodeError("chat response has no choices");
  }
  const auto& message = j["choices"][0].value("message", json::object());
  if (!message.contains("content")) throw DecodeError("chat response choice has no message content");
  const auto& content = message["content"];
  if (content.is_null()) return {};
  if (content.is_string()) return content.get<std::string>();
  if (content.is_array()) {
    std::string text;
    for (const auto& part : content) {
      if (part.contains("text") && part["text"].is_string()) text += part["text"].get<std::string>();
    }
    return text;
  }
  throw DecodeError("chat message content has an unsupported type");
}

json chat_request(const PromptBundle& prompt, const std::string& model) {
  json user_content = json::array();
  user_content.push_back({{"type", "text"}, {"text", prompt.user}});
  for (const auto& image : prompt.images) {
    const auto url = "data:" + image_mime(image) + ";base64," + base64_encode(read_file(image));
    user_content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
  }
  json messages = json::array();
  if (!prompt.system.empty()) messages.push_back({{"role", "system"}, {"content", prompt.system}});
  messages.push_back({{"role", "user"}, {"content", std::move(user_content)}});
  return json{{"model", model}, {"temperature", 0}, {"messages", std::move(messages)}};
}

// --- clients -----------------------------------------------------------------

HttpSpeechRecognizer::HttpSpeechRecognizer(HttpSettings settings, std::shared_ptr<CancelSource> cancel)
    : transport_(std::move(settings), std::move(cancel)) {}

std::string HttpSpeechRecognizer::id() const { return "http-asr:" + transport_.settings().model; }

asr::ScoredTranscript HttpSpeechRecognizer::recognize(const AudioRef& audio) {
  const auto& model = transport_.settings().model;
  std::string body;
  if (audio.path()) {
    std::string content;
    try {
      content = read_file(*audio.path());
    } catch (const IoError& e) {
      throw BackendError(400, e.what());
    }
    body = transport_.post_multipart(
        kTranscriptionPath,
        {{"file", std::move(content), audio.path()->filename().string(), audio_mime(audio.format())},
         {"model", model, "", ""},
         {"response_format", "verbose_json", "", ""},
         {"timestamp_granularities[]", "word", "", ""}});
  } else {
    body = transport_.post_json(kTranscriptionPath,
                                json{{"model", model}, {"url", *audio.url()}, {"response_format", "verbose_json"}});
  }
  return decode_transcription(body, audio.id(), id());
}

HttpGestureRecognizer::HttpGestureRecognizer(HttpSettings settings, PromptTemplates templates,
                                             LabelParseOptions label_options, std::shared_ptr<CancelSource> cancel)
    : transport_(std::move(settings), std::move(cancel)),
      templates_(std::move(templates)),
      label_options_(label_options) {
  check_templates(templates_);
}

std::string HttpGestureRecognizer::id() const { return "http-gesture:" + transport_.settings().model; }

std::vector<GestureEvent> HttpGestureRecognizer::recognize(const FrameSet& frames,
                                                           std::span<const GestureLabel> candidates) {
  if (frames.frames.empty()) throw std::invalid_argument("frame set '" + frames.id + "' has no frames");
  const auto prompt = build_gesture_prompt(frames, candidates, templates_);
  const auto reply = decode_chat_content(transport_.post_json(kChatPath, chat_request(prompt, transport_.settings().model)));
  const auto label = parse_gesture_response(reply, candidates, label_options_);
  if (!label) return {};
  GestureEvent event;
  event.label = *label;
  event.span = frames.segment;
  event.source = GestureSource::model;
  return {event};
}

HttpRewriter::HttpRewriter(HttpSettings settings, PromptTemplates templates, std::shared_ptr<CancelSource> cancel)
    : transport_(std::move(settings), std::move(cancel)), templates_(std::move(templates)) {
  check_templates(templates_);
}

std::string HttpRewriter::id() const { return "http-rewriter:" + transport_.settings().model; }

PromptBundle HttpRewriter::prompt(const WordSequence& asr_words, std::span<const GestureEvent> gestures,
                                  const RewriteContext& context) const {
  return build_rewrite_prompt(asr_words, gestures, context, templates_);
}

RewriteResult HttpRewriter::rewrite(const WordSequence& asr_words, std::span<const GestureEvent> gestures,
                                    const RewriteContext& context) {
  const auto bundle = prompt(asr_words, gestures, context);
  RewriteResult result;
  result.model_raw = decode_chat_content(transport_.post_json(kChatPath, chat_request(bundle, transport_.settings().model)));
  result.final_text = trim(result.model_raw);
  if (result.final_text.size() >= 2 && result.final_text.front() == '"' && result.final_text.back() == '"') {
    result.final_text = trim(std::string_view(result.final_text).substr(1, result.final_text.size() - 2));
  }
  if (result.final_text.empty()) throw EmptyResponse();
  for (const auto& g : gestures) result.used_gestures.push_back(g.label);
  return result;
}

}  // namespace gesture_asr::clients
