#include "gesture_asr/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "gesture_asr/asr_eval.hpp"
#include "gesture_asr/chat.hpp"
#include "gesture_asr/config.hpp"
#include "gesture_asr/confidence_filter.hpp"
#include "gesture_asr/errors.hpp"
#include "gesture_asr/frames.hpp"
#include "gesture_asr/fusion.hpp"
#include "gesture_asr/gesture_stats.hpp"
#include "gesture_asr/json_io.hpp"
#include "gesture_asr/mock_clients.hpp"

namespace gesture_asr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

// Log to stderr so stdout stays machine-readable.
void init_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("gesture-asr");
    spdlog::set_default_logger(logger);
  });
}

struct Backends {
  fusion::Clients clients;
};

Backends make_backends(const CliConfig& cfg, const std::shared_ptr<clients::CancelSource>& cancel) {
  Backends b;
  if (cfg.mock) {
    b.clients.asr = std::make_shared<clients::MockSpeechRecognizer>(
        cfg.mock_asr_fixture.empty() ? clients::MockSpeechRecognizer({})
                                     : clients::MockSpeechRecognizer::from_file(cfg.mock_asr_fixture));
    b.clients.gesture = std::make_shared<clients::MockGestureRecognizer>(
        cfg.mock_gesture_fixture.empty() ? clients::MockGestureRecognizer({})
                                         : clients::MockGestureRecognizer::from_file(cfg.mock_gesture_fixture));
    b.clients.rewriter = std::make_shared<clients::MockRewriter>();
    return b;
  }
  if (!cfg.asr.base_url.empty())
    b.clients.asr = std::make_shared<clients::HttpSpeechRecognizer>(cfg.http_settings(cfg.asr), cancel);
  if (!cfg.gesture.base_url.empty())
    b.clients.gesture = std::make_shared<clients::HttpGestureRecognizer>(
        cfg.http_settings(cfg.gesture), cfg.templates(),
        clients::LabelParseOptions{.unparseable_as_other = cfg.unparseable_as_other}, cancel);
  if (!cfg.rewriter.base_url.empty())
    b.clients.rewriter =
        std::make_shared<clients::HttpRewriter>(cfg.http_settings(cfg.rewriter), cfg.templates(), cancel);
  return b;
}

std::string parse_table(const chat::Corpus& corpus) {
  std::string out = fmt::format("{:<40} {:>10} {:>9}\n", "file", "utterances", "gestures");
  for (const auto& f : corpus.files)
    out += fmt::format("{:<40} {:>10} {:>9}\n", f.path, f.utterances.size(), chat::extract_gesture_events(f).size());
  return out;
}

std::vector<eval::WerItem> wer_items_from_manifest(const fs::path& path) {
  std::vector<eval::WerItem> items;
  std::istringstream in(read_text(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      items.push_back({j.at("id").get<std::string>(), j.at("ref").get<std::string>(), j.at("hyp").get<std::string>()});
    } catch (const json::exception& e) {
      throw ManifestError(fmt::format("{} line {}: {}", path.string(), line_no, e.what()));
    }
  }
  return items;
}

// Pairs ref_dir/<stem>.txt with hyp_dir/<stem>.txt.
std::vector<eval::WerItem> wer_items_from_dirs(const fs::path& ref_dir, const fs::path& hyp_dir) {
  std::vector<eval::WerItem> items;
  std::vector<fs::path> refs;
  for (const auto& e : fs::directory_iterator(ref_dir))
    if (e.is_regular_file() && e.path().extension() == ".txt") refs.push_back(e.path());
  std::sort(refs.begin(), refs.end());
  for (const auto& r : refs) {
    auto h = hyp_dir / r.filename();
    if (!fs::exists(h)) throw IoError("no hypothesis file for " + r.filename().string());
    items.push_back({r.stem().string(), read_text(r), read_text(h)});
  }
  return items;
}

std::string transcript_table(const asr::ScoredTranscript& t) {
  std::string out = fmt::format("{:<20} {:>10}\n", "token", "confidence");
  for (const auto& tok : t.tokens) out += fmt::format("{:<20} {:>10.3f}\n", tok.text, tok.confidence);
  for (const auto& f : t.filters)
    out += fmt::format("filter: threshold {} ({}), removed {}\n", f.threshold, f.inclusive ? ">=" : ">", f.removed);
  return out;
}

std::string events_table(const std::vector<GestureEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += fmt::format("[gesture:{}]", e.label.name());
    if (e.span) out += fmt::format(" {}-{} ms", e.span->start_ms, e.span->end_ms);
    out += "\n";
  }
  if (events.empty()) out = "(no gesture)\n";
  return out;
}

std::string pipeline_summary(const fusion::PipelineReport& r) {
  std::string out;
  for (const auto& u : r.utterances)
    out += fmt::format("{}: {}\n", u.id, u.skipped ? std::string("(skipped: no words, no gestures)") : u.final_text);
  for (const auto& f : r.failures) out += fmt::format("{}: FAILED at {}: {}\n", f.id, f.stage, f.error);
  out += fmt::format("{} succeeded, {} failed of {}{}\n", r.utterances.size(), r.failures.size(), r.manifest_size,
                     r.incomplete ? " (incomplete)" : "");
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            std::shared_ptr<clients::CancelSource> cancel) {
  init_logging();
  if (!cancel) cancel = std::make_shared<clients::CancelSource>();

  CLI::App app{"Gesture-aware transcription toolkit for disordered speech", "gesture-asr"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  bool as_json = false;
  std::optional<double> threshold;
  bool mock = false;
  std::optional<int> parallel;
  app.add_option("--config", config_path, "Flat key = value config file")->check(CLI::ExistingFile);
  app.add_flag("--json", as_json, "Machine-readable JSON on stdout");
  app.add_option("--threshold", threshold, "Confidence threshold in [0, 1]");
  app.add_flag("--mock", mock, "Use the offline mock backends");
  app.add_option("--parallel", parallel, "Maximum items processed concurrently");

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "Parse CHAT transcripts");
  std::string parse_root, parse_file;
  auto* root_opt = parse_cmd->add_option("--root", parse_root, "Corpus directory");
  parse_cmd->add_option("--file", parse_file, "Single .cha file")->excludes(root_opt);

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Per-gesture statistics of an annotated corpus");
  std::string stats_root, stats_format = "table", stats_out;
  stats_cmd->add_option("--root", stats_root, "Corpus directory")->required();
  stats_cmd->add_option("--format", stats_format, "table, csv or json");
  stats_cmd->add_option("--out", stats_out, "Also write the rendering to this file");

  // wer
  auto* wer_cmd = app.add_subcommand("wer", "Word error rate of hypotheses against references");
  std::string wer_manifest, wer_ref_dir, wer_hyp_dir;
  auto* man_opt = wer_cmd->add_option("--manifest", wer_manifest, "JSON lines {id, ref, hyp}");
  wer_cmd->add_option("--ref-dir", wer_ref_dir, "Directory of reference .txt files")->excludes(man_opt);
  wer_cmd->add_option("--hyp-dir", wer_hyp_dir, "Directory of hypothesis .txt files")->excludes(man_opt);

  // filter
  auto* filter_cmd = app.add_subcommand("filter", "Drop low-confidence ASR tokens");
  std::string filter_input, filter_out;
  bool filter_inclusive = false;
  filter_cmd->add_option("--input", filter_input, "ScoredTranscript JSON")->required();
  filter_cmd->add_option("--out", filter_out, "Write the filtered transcript here");
  filter_cmd->add_flag("--inclusive", filter_inclusive, "Keep tokens at exactly the threshold");

  // gestures
  auto* gestures_cmd = app.add_subcommand("gestures", "Recognize gestures in a directory of frames");
  std::string frames_dir;
  std::optional<std::int64_t> seg_start, seg_end;
  gestures_cmd->add_option("--frames", frames_dir, "Directory of extracted frames")->required();
  gestures_cmd->add_option("--start-ms", seg_start, "Segment start");
  gestures_cmd->add_option("--end-ms", seg_end, "Segment end");

  // rewrite
  auto* rewrite_cmd = app.add_subcommand("rewrite", "Rewrite ASR words with gesture context");
  std::string rewrite_text;
  std::vector<std::string> rewrite_gestures;
  rewrite_cmd->add_option("--text", rewrite_text, "ASR text")->required();
  rewrite_cmd->add_option("--gesture", rewrite_gestures, "Gesture label (repeatable)");

  // pipeline
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Run the full pipeline over a manifest");
  std::string pipeline_manifest, pipeline_out, gesture_source;
  bool no_filter = false;
  pipeline_cmd->add_option("--manifest", pipeline_manifest, "JSON lines manifest")->required();
  pipeline_cmd->add_option("--out", pipeline_out, "Write the JSON report here");
  pipeline_cmd->add_option("--gesture-source", gesture_source, "auto, annotations, model or none");
  pipeline_cmd->add_flag("--no-filter", no_filter, "Skip confidence filtering");

  // case-report
  auto* case_cmd = app.add_subcommand("case-report", "Original / ASR / Ours comparison of a pipeline report");
  std::string case_report_path;
  case_cmd->add_option("--report", case_report_path, "Pipeline report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kUsage;
  }

  CliConfig cfg;
  try {
    cfg = load_config(config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path));
    if (threshold) cfg.threshold = *threshold;
    if (mock) cfg.mock = true;
    if (parallel) cfg.parallel = *parallel;
    if (filter_inclusive) cfg.inclusive_threshold = true;
    if (no_filter) cfg.filter = false;
    if (!gesture_source.empty()) cfg.set("gesture_source", gesture_source);
    cfg.validate();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (parse_cmd->parsed()) {
      chat::Corpus corpus;
      if (!parse_file.empty()) {
        try {
          corpus.files.push_back(chat::parse_path(parse_file));
        } catch (const SyntaxError& e) {
          corpus.diagnostics.push_back({parse_file, e.what(), e.line()});
        } catch (const EncodingError& e) {
          corpus.diagnostics.push_back({parse_file, e.what(), 0});
        }
      } else if (!parse_root.empty()) {
        corpus = chat::parse_corpus(parse_root, {.parallel = cfg.parallel > 1});
      } else {
        err << "error: parse needs --root or --file\n";
        return kUsage;
      }
      for (const auto& d : corpus.diagnostics)
        err << fmt::format("{}:{}: {}\n", d.path, d.line, d.message);
      if (as_json) {
        json files = json::array();
        for (const auto& f : corpus.files) files.push_back(json_io::to_json(f));
        json diags = json::array();
        for (const auto& d : corpus.diagnostics)
          diags.push_back({{"path", d.path}, {"line", d.line}, {"message", d.message}});
        out << json{{"files", files}, {"diagnostics", diags}}.dump(2) << "\n";
      } else {
        out << parse_table(corpus);
      }
      return corpus.diagnostics.empty() ? kOk : kItemFailures;
    }

    if (stats_cmd->parsed()) {
      auto corpus = chat::parse_corpus(stats_root, {.parallel = cfg.parallel > 1});
      for (const auto& d : corpus.diagnostics)
        err << fmt::format("{}:{}: {}\n", d.path, d.line, d.message);
      auto report = stats::compute_stats(corpus);
      auto format = as_json ? stats::Format::json : stats::format_from_string(stats_format);
      auto text = stats::render_stats(report, format);
      out << text;
      if (!stats_out.empty()) write_text(stats_out, text);
      return corpus.diagnostics.empty() ? kOk : kItemFailures;
    }

    if (wer_cmd->parsed()) {
      std::vector<eval::WerItem> items;
      if (!wer_manifest.empty())
        items = wer_items_from_manifest(wer_manifest);
      else if (!wer_ref_dir.empty() && !wer_hyp_dir.empty())
        items = wer_items_from_dirs(wer_ref_dir, wer_hyp_dir);
      else {
        err << "error: wer needs --manifest or both --ref-dir and --hyp-dir\n";
        return kUsage;
      }
      auto report = eval::corpus_wer(items, {.normalization = cfg.normalization, .parallel = cfg.parallel > 1});
      out << (as_json ? eval::report_to_json(report) : eval::render_report_table(report));
      return kOk;
    }

    if (filter_cmd->parsed()) {
      auto transcript = asr::transcript_from_json(read_text(filter_input));
      auto filtered =
          asr::filter_tokens(transcript, cfg.threshold, {.inclusive_threshold = cfg.inclusive_threshold});
      auto text = asr::to_json(filtered);
      if (!filter_out.empty()) write_text(filter_out, text);
      out << (as_json ? text : transcript_table(filtered));
      return kOk;
    }

    if (gestures_cmd->parsed()) {
      auto backends = make_backends(cfg, cancel);
      if (!backends.clients.gesture) {
        err << "error: no gesture backend configured (set gesture_url or use --mock)\n";
        return kUsage;
      }
      std::optional<TimeSpan> segment;
      if (seg_start || seg_end) {
        if (!seg_start || !seg_end) {
          err << "error: --start-ms and --end-ms go together\n";
          return kUsage;
        }
        segment = TimeSpan::make(*seg_start, *seg_end);
      }
      auto frames = clients::sample_frames(frames_dir, segment, cfg.frames_per_segment);
      auto events = backends.clients.gesture->recognize(frames, cfg.candidates);
      if (as_json) {
        json arr = json::array();
        for (const auto& e : events) arr.push_back(json_io::to_json(e));
        out << json{{"frame_set", frames.id}, {"events", arr}}.dump(2) << "\n";
      } else {
        out << events_table(events);
      }
      return kOk;
    }

    if (rewrite_cmd->parsed()) {
      auto backends = make_backends(cfg, cancel);
      if (!backends.clients.rewriter) {
        err << "error: no rewriter configured (set rewriter_url or use --mock)\n";
        return kUsage;
      }
      auto words = eval::normalize(rewrite_text, {.keep_fillers = true, .keep_fragments = true});
      std::vector<GestureEvent> gestures;
      for (const auto& g : rewrite_gestures)
        gestures.push_back(GestureEvent{GestureLabel::from_string(g), std::nullopt, std::nullopt,
                                        GestureSource::annotation, std::nullopt});
      clients::RewriteContext ctx;
      ctx.task = cfg.task;
      auto enriched = fusion::fuse_utterance("cli", words, gestures, *backends.clients.rewriter, ctx);
      if (as_json) {
        out << json{{"asr_words", enriched.asr_words.words},
                    {"final_text", enriched.final_text},
                    {"model_raw", enriched.model_raw},
                    {"skipped", enriched.skipped},
                    {"prompt_hash", enriched.provenance.prompt_hash}}
                   .dump(2)
            << "\n";
      } else {
        out << (enriched.skipped ? std::string("(skipped)") : enriched.final_text) << "\n";
      }
      return kOk;
    }

    if (pipeline_cmd->parsed()) {
      auto manifest = fusion::load_manifest(pipeline_manifest);
      auto backends = make_backends(cfg, cancel);
      auto pcfg = cfg.pipeline_config();
      pcfg.cancel = cancel;
      auto report = fusion::run_pipeline(manifest, backends.clients, pcfg);
      auto text = fusion::report_to_json(report);
      if (!pipeline_out.empty()) write_text(pipeline_out, text);
      out << (as_json ? text : pipeline_summary(report));
      for (const auto& f : report.failures) spdlog::error("{} failed at {}: {}", f.id, f.stage, f.error);
      return report.failures.empty() ? kOk : kItemFailures;
    }

    if (case_cmd->parsed()) {
      auto report = fusion::report_from_json(read_text(case_report_path));
      out << (as_json ? fusion::case_report_json(report) : fusion::render_case_report(report));
      return report.failures.empty() ? kOk : kItemFailures;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ManifestError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnknownFormat& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidThreshold& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kItemFailures;
  }
  return kUsage;
}

}  // namespace gesture_asr::cli
