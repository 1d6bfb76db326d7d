#include "gesture_asr/clients.hpp"

#include <stdexcept>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "gesture_asr/lexicon.hpp"
#include "gesture_asr/prompts.hpp"

namespace gesture_asr::clients {

namespace {

std::string format_of(std::string_view name) {
  const auto dot = name.rfind('.');
  if (dot == std::string_view::npos) return {};
  auto ext = lexicon::to_lower_ascii(name.substr(dot + 1));
  if (auto q = ext.find_first_of("?#"); q != std::string::npos) ext.resize(q);
  return ext;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace

AudioRef AudioRef::from_path(std::filesystem::path path, std::optional<std::int64_t> duration_ms) {
  if (path.empty()) throw std::invalid_argument("audio path is empty");
  AudioRef ref;
  ref.format_ = format_of(path.filename().string());
  ref.path_ = std::move(path);
  ref.duration_ms_ = duration_ms;
  return ref;
}

AudioRef AudioRef::from_url(std::string url, std::optional<std::int64_t> duration_ms) {
  if (url.empty()) throw std::invalid_argument("audio url is empty");
  AudioRef ref;
  ref.format_ = format_of(url);
  ref.url_ = std::move(url);
  ref.duration_ms_ = duration_ms;
  return ref;
}

std::string AudioRef::id() const {
  if (path_) return path_->stem().string();
  std::string_view u = *url_;
  if (auto q = u.find_first_of("?#"); q != std::string_view::npos) u = u.substr(0, q);
  if (auto slash = u.rfind('/'); slash != std::string_view::npos) u = u.substr(slash + 1);
  if (auto dot = u.rfind('.'); dot != std::string_view::npos && dot > 0) u = u.substr(0, dot);
  return std::string(u);
}

void FrameSet::validate() const {
  std::optional<std::int64_t> previous;
  for (const auto& frame : frames) {
    if (!segment.contains(frame.timestamp_ms)) {
      throw std::invalid_argument(fmt::format("frame {} at {} ms lies outside segment {}_{}", frame.path.string(),
                                              frame.timestamp_ms, segment.start_ms, segment.end_ms));
    }
    if (previous && frame.timestamp_ms <= *previous) {
      throw std::invalid_argument("frame timestamps must be strictly increasing");
    }
    previous = frame.timestamp_ms;
  }
}

std::string PromptBundle::hash() const {
  std::string data = system;
  data.push_back('\0');
  data += user;
  for (const auto& image : images) {
    data.push_back('\0');
    data += image.generic_string();
  }
  return sha256_hex(data);
}

PromptBundle Rewriter::prompt(const WordSequence& asr_words, std::span<const GestureEvent> gestures,
                              const RewriteContext& context) const {
  return build_rewrite_prompt(asr_words, gestures, context);
}

}  // namespace gesture_asr::clients
