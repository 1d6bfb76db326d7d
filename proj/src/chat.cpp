#include "gesture_asr/chat.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "gesture_asr/errors.hpp"
#include "gesture_asr/lexicon.hpp"

namespace gesture_asr::chat {

namespace {

constexpr char kBullet = '\x15';

bool is_space(char c) { return c == ' ' || c == '\t'; }

bool is_speaker_code(std::string_view code) {
  return !code.empty() && std::all_of(code.begin(), code.end(), [](char c) {
    return c >= 'A' && c <= 'Z';
  });
}

bool is_label_text(std::string_view label) {
  return !label.empty() &&
         std::all_of(label.begin(), label.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string format_bullet(const TimeSpan& span) {
  return fmt::format("{}{}_{}{}", kBullet, span.start_ms, span.end_ms, kBullet);
}

// A logical line: physical line plus any tab-prefixed continuation lines. Each
// character remembers where it came from so errors point at the source.
struct LogicalLine {
  std::string text;
  std::vector<std::pair<std::size_t, std::size_t>> origin;  // (line, column), 1-based

  std::size_t line_at(std::size_t offset) const {
    return origin.empty() ? 0 : origin[std::min(offset, origin.size() - 1)].first;
  }
  std::size_t column_at(std::size_t offset) const {
    if (origin.empty()) return 1;
    if (offset >= origin.size()) return origin.back().second + 1;
    return origin[offset].second;
  }
  [[noreturn]] void fail(std::size_t offset, const std::string& message) const {
    throw SyntaxError(line_at(offset), column_at(offset), message);
  }
};

std::vector<LogicalLine> split_lines(std::string_view text) {
  std::vector<LogicalLine> lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto raw = text.substr(pos, end - pos);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    ++line_no;
    const bool continuation = !raw.empty() && raw.front() == '\t' && !lines.empty();
    if (continuation) {
      auto& prev = lines.back();
      std::size_t skip = 0;
      while (skip < raw.size() && is_space(raw[skip])) ++skip;
      prev.text.push_back(' ');
      prev.origin.emplace_back(line_no, 1);
      for (std::size_t i = skip; i < raw.size(); ++i) {
        prev.text.push_back(raw[i]);
        prev.origin.emplace_back(line_no, i + 1);
      }
    } else {
      LogicalLine line;
      line.text = std::string(raw);
      line.origin.reserve(raw.size());
      for (std::size_t i = 0; i < raw.size(); ++i) line.origin.emplace_back(line_no, i + 1);
      if (line.origin.empty()) line.origin.emplace_back(line_no, 1);
      lines.push_back(std::move(line));
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

TimeSpan parse_bullet(const LogicalLine& line, std::size_t open, std::string_view content) {
  const auto underscore = content.find('_');
  if (underscore == std::string_view::npos) line.fail(open, "time bullet must be <start>_<end>");
  auto number = [&](std::string_view digits) -> std::int64_t {
    std::int64_t value = 0;
    const auto* first = digits.data();
    const auto* last = digits.data() + digits.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (digits.empty() || ec != std::errc() || ptr != last || digits.front() == '-' ||
        digits.front() == '+') {
      line.fail(open, fmt::format("invalid time bullet value '{}'", digits));
    }
    return value;
  };
  const auto start = number(content.substr(0, underscore));
  const auto end = number(content.substr(underscore + 1));
  if (start >= end) {
    line.fail(open, fmt::format("time bullet start {} is not before end {}", start, end));
  }
  return TimeSpan{start, end};
}

Token classify_word(std::string_view raw) {
  if (lexicon::is_filler(raw)) return Filler{std::string(raw)};
  if (auto parts = lexicon::split_fragment(raw)) {
    return Fragment{std::string(raw), std::move(parts->marker)};
  }
  return Word{std::string(raw)};
}

struct ParsedBody {
  std::vector<Token> tokens;
  std::optional<TimeSpan> span;
};

ParsedBody parse_body(const LogicalLine& line, std::size_t body_start) {
  ParsedBody out;
  const auto& s = line.text;
  std::size_t pos = body_start;
  bool last_was_gesture_close = false;  // previous char closed a gesture group

  while (pos < s.size()) {
    if (is_space(s[pos])) {
      ++pos;
      last_was_gesture_close = false;
      continue;
    }
    const std::size_t begin = pos;

    if (s[pos] == kBullet) {
      const auto close = s.find(kBullet, pos + 1);
      if (close == std::string::npos) line.fail(pos, "unterminated time bullet");
      const auto span = parse_bullet(line, pos, std::string_view(s).substr(pos + 1, close - pos - 1));
      pos = close + 1;
      if (last_was_gesture_close) {
        auto& gesture = std::get<GestureAnnotation>(out.tokens.back());
        gesture.span = span;
        last_was_gesture_close = false;
        continue;
      }
      const bool at_end = std::all_of(s.begin() + static_cast<std::ptrdiff_t>(pos), s.end(), is_space);
      if (!at_end) line.fail(begin, "utterance time bullet must end the line");
      out.span = span;
      continue;
    }
    last_was_gesture_close = false;

    if (s[pos] == '[') {
      const auto close = s.find(']', pos + 1);
      if (close == std::string::npos) line.fail(pos, "unterminated '[' group");
      const std::string_view content = std::string_view(s).substr(pos + 1, close - pos - 1);
      if (content.find('[') != std::string_view::npos) line.fail(pos, "nested '[' group");
      pos = close + 1;
      if (content.starts_with("gesture:")) {
        auto label = content.substr(8);
        if (label.starts_with(":")) label.remove_prefix(1);
        if (!is_label_text(label)) {
          line.fail(begin, fmt::format("gesture label '{}' must match [a-z]+", label));
        }
        out.tokens.emplace_back(GestureAnnotation{GestureLabel::from_string(label), std::nullopt});
        last_was_gesture_close = true;
      } else {
        out.tokens.emplace_back(OpaqueCode{std::string(s.substr(begin, pos - begin))});
      }
      continue;
    }

    while (pos < s.size() && !is_space(s[pos]) && s[pos] != '[' && s[pos] != kBullet) ++pos;
    std::string_view raw = std::string_view(s).substr(begin, pos - begin);
    if (const auto bad = raw.find_first_of("]<>"); bad != std::string_view::npos) {
      line.fail(begin + bad, fmt::format("unsupported character '{}' in token", raw[bad]));
    }
    if (lexicon::is_punctuation(raw)) {
      out.tokens.emplace_back(Punct{std::string(raw)});
      continue;
    }
    std::size_t cut = raw.size();
    while (cut > 0 && std::string_view(".?!,;").find(raw[cut - 1]) != std::string_view::npos) --cut;
    out.tokens.push_back(classify_word(raw.substr(0, cut)));
    if (cut < raw.size()) out.tokens.emplace_back(Punct{std::string(raw.substr(cut))});
  }

  if (out.tokens.empty()) line.fail(body_start, "utterance has no tokens");
  return out;
}

void parse_participants(const Header& header, const LogicalLine& line, TranscriptFile& file) {
  for (const auto& entry : split(header.value, ',')) {
    std::istringstream words(entry);
    std::vector<std::string> parts;
    for (std::string w; words >> w;) parts.push_back(w);
    if (parts.empty()) continue;
    if (!is_speaker_code(parts.front())) {
      line.fail(0, fmt::format("participant code '{}' must be uppercase ASCII letters", parts.front()));
    }
    ParticipantInfo info;
    info.code = parts.front();
    if (parts.size() > 1) info.role = parts.back();
    file.participants.push_back(std::move(info));
  }
}

void parse_id(const Header& header, const LogicalLine& line, TranscriptFile& file) {
  static constexpr std::array<std::string_view, 10> kFields = {
      "language", "corpus", "code", "age", "sex", "group", "ses", "role", "education", "custom"};
  const auto fields = split(header.value, '|');
  if (fields.size() < 3) line.fail(0, "@ID needs at least language|corpus|code");
  const auto code = trim(fields[2]);
  auto it = std::find_if(file.participants.begin(), file.participants.end(),
                         [&](const ParticipantInfo& p) { return p.code == code; });
  if (it == file.participants.end()) {
    line.fail(0, fmt::format("@ID refers to undeclared participant '{}'", code));
  }
  for (std::size_t i = 0; i < fields.size() && i < kFields.size(); ++i) {
    if (i == 2) continue;
    auto value = trim(fields[i]);
    if (!value.empty()) it->demographics[std::string(kFields[i])] = std::move(value);
  }
}

}  // namespace

std::string token_text(const Token& token) {
  return std::visit(
      [](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, GestureAnnotation>) {
          auto text = "[gesture:" + t.label.name() + "]";
          if (t.span) text += format_bullet(*t.span);
          return text;
        } else {
          return t.text;
        }
      },
      token);
}

std::string Utterance::body_text() const {
  std::string out;
  for (const auto& token : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += token_text(token);
  }
  return out;
}

const ParticipantInfo* TranscriptFile::participant(std::string_view code) const {
  for (const auto& p : participants) {
    if (p.code == code) return &p;
  }
  return nullptr;
}

void validate_utf8(std::string_view text) {
  std::size_t i = 0;
  const auto n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      throw EncodingError(fmt::format("invalid UTF-8 lead byte at offset {}", i));
    }
    if (i + len > n) throw EncodingError(fmt::format("truncated UTF-8 sequence at offset {}", i));
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0) != 0x80) {
        throw EncodingError(fmt::format("invalid UTF-8 continuation byte at offset {}", i + k));
      }
      cp = (cp << 6) | (cc & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw EncodingError(fmt::format("invalid UTF-8 code point at offset {}", i));
    }
    i += len;
  }
}

TranscriptFile parse_file(std::string_view source_text, std::string path) {
  validate_utf8(source_text);
  if (source_text.starts_with("\xEF\xBB\xBF")) source_text.remove_prefix(3);

  TranscriptFile file;
  file.path = std::move(path);
  const auto lines = split_lines(source_text);

  std::vector<std::pair<const LogicalLine*, std::size_t>> utterance_lines;  // for speaker checks
  bool participants_declared = false;

  for (const auto& line : lines) {
    const auto& s = line.text;
    if (std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
      continue;
    }
    switch (s.front()) {
      case '@': {
        Header header;
        const auto colon = s.find(':');
        if (colon == std::string::npos) {
          header.key = trim(std::string_view(s).substr(1));
          header.has_value = false;
        } else {
          header.key = trim(std::string_view(s).substr(1, colon - 1));
          header.value = trim(std::string_view(s).substr(colon + 1));
        }
        if (header.key.empty()) line.fail(0, "header without a key");
        header.position = file.utterances.size();
        if (header.key == "Participants") {
          participants_declared = true;
          parse_participants(header, line, file);
        } else if (header.key == "ID") {
          parse_id(header, line, file);
        }
        file.headers.push_back(std::move(header));
        break;
      }
      case '*': {
        const auto colon = s.find(':');
        if (colon == std::string::npos) line.fail(0, "main tier needs '*CODE:'");
        const auto code = std::string_view(s).substr(1, colon - 1);
        if (!is_speaker_code(code)) {
          line.fail(1, fmt::format("speaker code '{}' must be uppercase ASCII letters", code));
        }
        auto body_start = colon + 1;
        if (body_start < s.size() && !is_space(s[body_start])) {
          line.fail(body_start, "expected tab after speaker code");
        }
        auto body = parse_body(line, body_start);
        Utterance utt;
        utt.index = file.utterances.size();
        utt.speaker = std::string(code);
        utt.tokens = std::move(body.tokens);
        utt.span = body.span;
        file.utterances.push_back(std::move(utt));
        utterance_lines.emplace_back(&line, colon);
        break;
      }
      case '%': {
        if (file.utterances.empty()) line.fail(0, "dependent tier before any main tier");
        const auto colon = s.find(':');
        if (colon == std::string::npos || colon == 1) line.fail(0, "dependent tier needs '%key:'");
        file.utterances.back().dependents.push_back(
            DependentTier{std::string(s.substr(1, colon - 1)), trim(std::string_view(s).substr(colon + 1))});
        break;
      }
      default:
        line.fail(0, "unrecognized line; expected '@', '*' or '%'");
    }
  }

  if (participants_declared) {
    for (std::size_t i = 0; i < file.utterances.size(); ++i) {
      const auto& utt = file.utterances[i];
      if (file.participant(utt.speaker) == nullptr) {
        utterance_lines[i].first->fail(1, fmt::format("speaker '{}' not declared in @Participants", utt.speaker));
      }
    }
  } else {
    for (const auto& utt : file.utterances) {
      if (file.participant(utt.speaker) == nullptr) file.participants.push_back({utt.speaker, "", {}});
    }
  }
  return file;
}

TranscriptFile parse_path(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_file(buffer.str(), path.generic_string());
}

Corpus parse_corpus(const std::filesystem::path& root, const CorpusOptions& options) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("corpus root is not a readable directory: " + root.string());

  std::vector<fs::path> paths;
  fs::recursive_directory_iterator it(root, fs::directory_options::follow_directory_symlink, ec);
  if (ec) throw IoError("cannot read corpus root " + root.string() + ": " + ec.message());
  for (const auto& entry : it) {
    if (entry.is_regular_file() && entry.path().extension() == options.extension) {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end(),
            [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });

  const auto n = static_cast<std::ptrdiff_t>(paths.size());
  std::vector<std::optional<TranscriptFile>> parsed(paths.size());
  std::vector<std::optional<Diagnostic>> failed(paths.size());

#pragma omp parallel for schedule(dynamic) if (options.parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& path = paths[static_cast<std::size_t>(i)];
    const auto rel = path.lexically_relative(root).generic_string();
    try {
      auto file = parse_path(path);
      file.path = rel;
      parsed[static_cast<std::size_t>(i)] = std::move(file);
    } catch (const SyntaxError& e) {
      failed[static_cast<std::size_t>(i)] = Diagnostic{rel, e.what(), e.line()};
    } catch (const std::exception& e) {
      failed[static_cast<std::size_t>(i)] = Diagnostic{rel, e.what(), 0};
    }
  }

  Corpus corpus;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (parsed[i]) corpus.files.push_back(std::move(*parsed[i]));
    if (failed[i]) corpus.diagnostics.push_back(std::move(*failed[i]));
  }
  return corpus;
}

std::string serialize(const Utterance& utterance) {
  std::string out = "*" + utterance.speaker + ":\t" + utterance.body_text();
  if (utterance.span) out += " " + format_bullet(*utterance.span);
  out.push_back('\n');
  for (const auto& dep : utterance.dependents) out += "%" + dep.key + ":\t" + dep.value + "\n";
  return out;
}

std::string serialize(const TranscriptFile& file) {
  std::string out;
  std::size_t next_utterance = 0;
  auto flush_until = [&](std::size_t position) {
    for (; next_utterance < std::min(position, file.utterances.size()); ++next_utterance) {
      out += serialize(file.utterances[next_utterance]);
    }
  };
  for (const auto& header : file.headers) {
    flush_until(header.position);
    out += "@" + header.key;
    if (header.has_value) out += ":\t" + header.value;
    out.push_back('\n');
  }
  flush_until(file.utterances.size());
  return out;
}

std::vector<GestureEvent> extract_gesture_events(const TranscriptFile& file) {
  std::vector<GestureEvent> events;
  for (const auto& utt : file.utterances) {
    for (const auto& token : utt.tokens) {
      if (const auto* gesture = std::get_if<GestureAnnotation>(&token)) {
        GestureEvent event;
        event.label = gesture->label;
        event.span = gesture->span ? gesture->span : utt.span;
        event.source = GestureSource::annotation;
        event.utterance_index = utt.index;
        events.push_back(std::move(event));
      }
    }
  }
  return events;
}

}  // namespace gesture_asr::chat
