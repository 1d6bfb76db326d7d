#include "gesture_asr/asr_eval.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include "json.hpp"

#include "gesture_asr/errors.hpp"
#include "gesture_asr/lexicon.hpp"

namespace gesture_asr::eval {

namespace {

using nlohmann::json;

bool is_ascii_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

// Returns the normalized form of one surface token, or nothing when dropped.
std::optional<std::string> normalize_token(std::string_view token, const NormalizationConfig& config) {
  if (token.starts_with("&-")) token.remove_prefix(2);  // CHAT filler notation
  while (!token.empty() && is_ascii_punct(token.back())) token.remove_suffix(1);
  while (!token.empty() && is_ascii_punct(token.front()) && token.front() != '&') token.remove_prefix(1);
  if (token.empty() || token == "&") return std::nullopt;

  if (lexicon::is_filler(token)) {
    if (!config.keep_fillers) return std::nullopt;
    return lexicon::to_lower_ascii(token);
  }
  if (const auto fragment = lexicon::split_fragment(token)) {
    if (!config.keep_fragments) return std::nullopt;
    return lexicon::to_lower_ascii(fragment->stem);
  }
  if (token.front() == '&') token.remove_prefix(1);
  if (token.empty()) return std::nullopt;
  return lexicon::to_lower_ascii(token);
}

json score_to_json(const ItemScore& item) {
  const auto& s = item.score;
  return json{{"id", item.id},
              {"substitutions", s.substitutions},
              {"deletions", s.deletions},
              {"insertions", s.insertions},
              {"hits", s.hits},
              {"ref_len", s.ref_len},
              {"hyp_len", s.hyp_len},
              {"wer", s.wer ? json(*s.wer) : json(nullptr)}};
}

ItemScore score_from_json(const json& j) {
  ItemScore item;
  item.id = j.at("id").get<std::string>();
  auto& s = item.score;
  s.substitutions = j.at("substitutions").get<std::size_t>();
  s.deletions = j.at("deletions").get<std::size_t>();
  s.insertions = j.at("insertions").get<std::size_t>();
  s.hits = j.at("hits").get<std::size_t>();
  s.ref_len = j.at("ref_len").get<std::size_t>();
  s.hyp_len = j.at("hyp_len").get<std::size_t>();
  if (!j.at("wer").is_null()) s.wer = j.at("wer").get<double>();
  return item;
}

void check_unique_ids(const std::vector<WerItem>& items) {
  std::set<std::string_view> seen;
  for (const auto& item : items) {
    if (!seen.insert(item.id).second) throw DuplicateId(item.id);
  }
}

std::optional<ItemScore> score_item(const WerItem& item, const NormalizationConfig& normalization) {
  const auto ref = normalize(item.ref, normalization);
  if (ref.empty()) return std::nullopt;
  const auto hyp = normalize(item.hyp, normalization);
  return ItemScore{item.id, wer(ref, hyp, EmptyReferencePolicy::strict)};
}

WerReport assemble(const std::vector<WerItem>& items, std::vector<std::optional<ItemScore>>& scores,
                   const NormalizationConfig& normalization) {
  WerReport report;
  report.normalization = normalization;
  std::size_t total_errors = 0;
  std::size_t total_ref = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!scores[i]) {
      report.skipped.push_back(items[i].id);
      continue;
    }
    total_errors += scores[i]->score.errors();
    total_ref += scores[i]->score.ref_len;
    sum += *scores[i]->score.wer;
    report.per_item.push_back(std::move(*scores[i]));
  }
  if (!report.per_item.empty()) {
    report.average_wer = sum / static_cast<double>(report.per_item.size());
    report.micro_wer = static_cast<double>(total_errors) / static_cast<double>(total_ref);
  }
  return report;
}

}  // namespace

WordSequence normalize(std::string_view raw, const NormalizationConfig& config) {
  WordSequence out;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    const char c = raw[pos];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
      continue;
    }
    if (c == '[') {
      const auto close = raw.find(']', pos);
      pos = close == std::string_view::npos ? raw.size() : close + 1;
      continue;
    }
    if (c == '\x15') {
      const auto close = raw.find('\x15', pos + 1);
      pos = close == std::string_view::npos ? raw.size() : close + 1;
      continue;
    }
    const auto begin = pos;
    while (pos < raw.size() && !std::isspace(static_cast<unsigned char>(raw[pos])) && raw[pos] != '[' &&
           raw[pos] != '\x15') {
      ++pos;
    }
    if (auto word = normalize_token(raw.substr(begin, pos - begin), config)) {
      out.words.push_back(std::move(*word));
    }
  }
  return out;
}

std::size_t Alignment::cost() const {
  return static_cast<std::size_t>(
      std::count_if(ops.begin(), ops.end(), [](const EditOp& op) { return !std::holds_alternative<Match>(op); }));
}

std::vector<std::string> Alignment::apply(const WordSequence& ref, const WordSequence& hyp) const {
  std::vector<std::string> out;
  for (const auto& op : ops) {
    if (const auto* m = std::get_if<Match>(&op)) {
      out.push_back(ref.words.at(m->ref));
    } else if (const auto* s = std::get_if<Substitute>(&op)) {
      out.push_back(hyp.words.at(s->hyp));
    } else if (const auto* ins = std::get_if<Insert>(&op)) {
      out.push_back(hyp.words.at(ins->hyp));
    }
  }
  return out;
}

Alignment align(const WordSequence& ref, const WordSequence& hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t width = m + 1;
  std::vector<std::size_t> cost((n + 1) * width);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return cost[i * width + j]; };

  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref.words[i - 1] == hyp.words[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  Alignment alignment;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref.words[i - 1] == hyp.words[j - 1];
      if (same && at(i, j) == at(i - 1, j - 1)) {
        alignment.ops.emplace_back(Match{i - 1, j - 1});
        --i, --j;
        continue;
      }
      if (!same && at(i, j) == at(i - 1, j - 1) + 1) {
        alignment.ops.emplace_back(Substitute{i - 1, j - 1});
        --i, --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      alignment.ops.emplace_back(Delete{i - 1});
      --i;
      continue;
    }
    alignment.ops.emplace_back(Insert{j - 1});
    --j;
  }
  std::reverse(alignment.ops.begin(), alignment.ops.end());
  return alignment;
}

std::size_t edit_distance(const WordSequence& ref, const WordSequence& hyp) {
  std::vector<std::size_t> prev(hyp.size() + 1);
  std::vector<std::size_t> cur(hyp.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (ref.words[i - 1] == hyp.words[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

WerScore wer(const WordSequence& ref, const WordSequence& hyp, EmptyReferencePolicy policy) {
  if (ref.empty() && policy == EmptyReferencePolicy::strict) throw EmptyReference();

  WerScore score;
  score.ref_len = ref.size();
  score.hyp_len = hyp.size();
  for (const auto& op : align(ref, hyp).ops) {
    if (std::holds_alternative<Match>(op)) ++score.hits;
    else if (std::holds_alternative<Substitute>(op)) ++score.substitutions;
    else if (std::holds_alternative<Delete>(op)) ++score.deletions;
    else ++score.insertions;
  }

  if (!ref.empty()) {
    score.wer = static_cast<double>(score.errors()) / static_cast<double>(score.ref_len);
  } else if (hyp.empty()) {
    score.wer = 0.0;
  } else if (policy == EmptyReferencePolicy::hyp_length) {
    score.wer = static_cast<double>(hyp.size());
  }
  return score;
}

WerReport corpus_wer(const std::vector<WerItem>& items, const WerConfig& config) {
  check_unique_ids(items);
  std::vector<std::optional<ItemScore>> scores(items.size());
  const auto n = static_cast<std::ptrdiff_t>(items.size());
#pragma omp parallel for schedule(dynamic) if (config.parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    scores[static_cast<std::size_t>(i)] = score_item(items[static_cast<std::size_t>(i)], config.normalization);
  }
  return assemble(items, scores, config.normalization);
}

WerReport corpus_wer_serial(const std::vector<WerItem>& items, const WerConfig& config) {
  check_unique_ids(items);
  std::vector<std::optional<ItemScore>> scores;
  scores.reserve(items.size());
  for (const auto& item : items) scores.push_back(score_item(item, config.normalization));
  return assemble(items, scores, config.normalization);
}

std::string report_to_json(const WerReport& report) {
  json items = json::array();
  for (const auto& item : report.per_item) items.push_back(score_to_json(item));
  json j{{"items", items},
         {"item_count", report.per_item.size()},
         {"skipped", report.skipped},
         {"average_wer", report.average_wer ? json(*report.average_wer) : json(nullptr)},
         {"micro_wer", report.micro_wer ? json(*report.micro_wer) : json(nullptr)},
         {"normalization",
          {{"keep_fillers", report.normalization.keep_fillers},
           {"keep_fragments", report.normalization.keep_fragments}}}};
  return j.dump(2) + "\n";
}

WerReport report_from_json(std::string_view json_text) {
  const auto j = json::parse(json_text);
  WerReport report;
  for (const auto& item : j.at("items")) report.per_item.push_back(score_from_json(item));
  report.skipped = j.at("skipped").get<std::vector<std::string>>();
  if (!j.at("average_wer").is_null()) report.average_wer = j.at("average_wer").get<double>();
  if (!j.at("micro_wer").is_null()) report.micro_wer = j.at("micro_wer").get<double>();
  report.normalization.keep_fillers = j.at("normalization").at("keep_fillers").get<bool>();
  report.normalization.keep_fragments = j.at("normalization").at("keep_fragments").get<bool>();
  return report;
}

std::string render_report_table(const WerReport& report) {
  std::size_t id_width = 4;
  for (const auto& item : report.per_item) id_width = std::max(id_width, item.id.size());
  std::string out = fmt::format("{:<{}}  {:>4} {:>4} {:>4} {:>5}  {:>7}\n", "id", id_width, "S", "D", "I", "N", "WER");
  for (const auto& item : report.per_item) {
    const auto& s = item.score;
    out += fmt::format("{:<{}}  {:>4} {:>4} {:>4} {:>5}  {:>7.3f}\n", item.id, id_width, s.substitutions,
                       s.deletions, s.insertions, s.ref_len, s.wer.value_or(0.0));
  }
  if (report.average_wer) {
    out += fmt::format("average WER (macro): {:.3f} over {} item(s)\n", *report.average_wer, report.per_item.size());
    out += fmt::format("micro WER:           {:.3f}\n", *report.micro_wer);
  } else {
    out += "average WER: n/a (no scored items)\n";
  }
  if (!report.skipped.empty()) {
    out += fmt::format("skipped (empty reference): {}\n", fmt::join(report.skipped, ", "));
  }
  out += fmt::format("normalization: fillers={} fragments={}\n", report.normalization.keep_fillers ? "kept" : "dropped",
                     report.normalization.keep_fragments ? "kept" : "dropped");
  return out;
}

}  // namespace gesture_asr::eval
