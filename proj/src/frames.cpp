#include "gesture_asr/frames.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <stdexcept>

#include <fmt/format.h>

#include "gesture_asr/errors.hpp"
#include "gesture_asr/lexicon.hpp"

namespace gesture_asr::clients {

namespace {

bool is_image(const std::filesystem::path& path) {
  const auto ext = lexicon::to_lower_ascii(path.extension().string());
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".webp";
}

std::optional<std::int64_t> timestamp_of(const std::filesystem::path& path) {
  const auto stem = path.stem().string();
  auto end = stem.size();
  while (end > 0 && !std::isdigit(static_cast<unsigned char>(stem[end - 1]))) --end;
  auto begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  if (begin == end) return std::nullopt;
  return std::stoll(stem.substr(begin, end - begin));
}

void replace_all(std::string& text, std::string_view key, const std::string& value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out.push_back(c);
  }
  return out + "'";
}

}  // namespace

std::vector<Frame> list_frames(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("frame directory not found: " + dir.string());
  std::vector<Frame> frames;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_image(entry.path())) continue;
    if (const auto ts = timestamp_of(entry.path())) frames.push_back({entry.path(), *ts});
  }
  std::sort(frames.begin(), frames.end(), [](const Frame& a, const Frame& b) {
    return a.timestamp_ms != b.timestamp_ms ? a.timestamp_ms < b.timestamp_ms : a.path < b.path;
  });
  frames.erase(std::unique(frames.begin(), frames.end(),
                           [](const Frame& a, const Frame& b) { return a.timestamp_ms == b.timestamp_ms; }),
               frames.end());
  return frames;
}

FrameSet sample_frames(const std::filesystem::path& dir, const std::optional<TimeSpan>& segment, std::size_t count) {
  if (count == 0) throw std::invalid_argument("frame sample count must be >= 1");
  auto frames = list_frames(dir);

  FrameSet set;
  set.id = dir.filename().string();
  if (set.id.empty()) set.id = dir.parent_path().filename().string();

  if (segment) {
    std::erase_if(frames, [&](const Frame& f) { return !segment->contains(f.timestamp_ms); });
    set.segment = *segment;
  } else if (!frames.empty()) {
    set.segment = TimeSpan{frames.front().timestamp_ms, frames.back().timestamp_ms + 1};
  }
  if (frames.empty()) throw std::invalid_argument("no frames inside the segment in " + dir.string());

  if (frames.size() <= count) {
    set.frames = std::move(frames);
  } else {
    // Evenly spaced indices including both ends.
    for (std::size_t k = 0; k < count; ++k) {
      const auto idx = count == 1 ? frames.size() / 2 : k * (frames.size() - 1) / (count - 1);
      set.frames.push_back(frames[idx]);
    }
  }
  set.validate();
  return set;
}

void extract_frames_with_command(const std::string& command_template, const std::filesystem::path& video,
                                 const std::filesystem::path& out_dir, const TimeSpan& segment) {
  std::filesystem::create_directories(out_dir);
  std::string command = command_template;
  replace_all(command, "{video}", shell_quote(video.string()));
  replace_all(command, "{out_dir}", shell_quote(out_dir.string()));
  replace_all(command, "{start_ms}", std::to_string(segment.start_ms));
  replace_all(command, "{end_ms}", std::to_string(segment.end_ms));
  replace_all(command, "{start_s}", fmt::format("{:.3f}", segment.start_ms / 1000.0));
  replace_all(command, "{end_s}", fmt::format("{:.3f}", segment.end_ms / 1000.0));
  if (const int status = std::system(command.c_str()); status != 0) {
    throw std::runtime_error(fmt::format("frame extraction command failed with status {}: {}", status, command));
  }
}

}  // namespace gesture_asr::clients
