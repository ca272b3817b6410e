#include "cgec/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "cgec/dataset.hpp"
#include "cgec/metrics.hpp"
#include "cgec/report.hpp"
#include "cgec/stats.hpp"

namespace cgec {

namespace {

namespace fs = std::filesystem;

struct EvaluateArgs {
  std::string corpus;
  std::string corpus_format = "jsonl";
  std::vector<std::string> hyps;
  std::string hyp_format = "lines";
  std::size_t max_n = 4;
  double mp_t = 0.85;
  bool nfc = false;
  bool strip_internal_whitespace = false;
  std::vector<std::string> formats;
  std::string out_dir;
  bool per_sentence = false;
  std::size_t threads = 1;
};

struct CorrelateArgs {
  std::string table;
  std::string columns;
  std::vector<std::string> formats;
  std::string out_dir;
};

struct ValidateArgs {
  std::string corpus;
  std::string corpus_format = "jsonl";
};

struct SystemSpec {
  std::string name;
  std::string path;
};

std::vector<SystemSpec> parse_systems(const std::vector<std::string>& specs) {
  std::vector<SystemSpec> out;
  std::set<std::string> names;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    SystemSpec s;
    if (eq == std::string::npos) {
      if (specs.size() > 1) {
        throw UsageError("--hyp '" + spec + "': multi-system runs need name=path");
      }
      s.path = spec;
      s.name = fs::path(spec).stem().string();
    } else {
      s.name = spec.substr(0, eq);
      s.path = spec.substr(eq + 1);
      if (s.name.empty() || s.path.empty()) {
        throw UsageError("--hyp '" + spec + "': expected name=path");
      }
    }
    if (!names.insert(s.name).second) throw UsageError("duplicate system name '" + s.name + "'");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Writes to <out_dir>/<name> when an output directory is set, else to stdout.
class Sink {
 public:
  Sink(std::string out_dir, std::ostream& out) : dir_(std::move(out_dir)), out_(out) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }

  void emit(const std::string& name, const std::string& content) {
    if (dir_.empty()) {
      if (emitted_++) out_ << '\n';
      out_ << content;
      return;
    }
    const fs::path path = fs::path(dir_) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError(path.string() + ": cannot write");
    f << content;
    out_ << "wrote " << path.string() << '\n';
  }

 private:
  std::string dir_;
  std::ostream& out_;
  int emitted_ = 0;
};

void check_formats(const std::vector<std::string>& formats, const std::set<std::string>& allowed) {
  for (const auto& f : formats) {
    if (!allowed.contains(f)) throw UsageError("unsupported --format '" + f + "'");
  }
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  NormalizationPolicy policy;
  policy.apply_canonical_composition = a.nfc;
  policy.strip_internal_whitespace = a.strip_internal_whitespace;
  const BleuConfig bleu = BleuConfig::uniform(a.max_n);
  const MeaningPreservationConfig mp{a.mp_t};
  mp.validate();
  if (a.threads == 0) throw UsageError("--threads must be at least 1");
  auto formats = a.formats.empty() ? std::vector<std::string>{"json"} : a.formats;
  check_formats(formats, {"json", "tsv", "markdown"});
  const auto systems = parse_systems(a.hyps);
  const auto corpus_format = parse_corpus_format(a.corpus_format);
  const auto hyp_format = parse_hypothesis_format(a.hyp_format);

  const Corpus corpus = load_corpus(a.corpus, corpus_format);
  if (corpus.empty()) throw DataError(a.corpus + ": corpus has no instances");

  RunManifest manifest{tool_version(), {}, policy, bleu, mp, utc_timestamp()};
  manifest.inputs.push_back({"corpus", a.corpus, sha256_file(a.corpus)});

  std::vector<MetricReport> reports;
  for (const auto& s : systems) {
    const HypothesisSet hyps = load_hypotheses(s.path, hyp_format, corpus, s.name);
    manifest.inputs.push_back({"hypotheses:" + s.name, s.path, sha256_file(s.path)});
    reports.push_back(
        evaluate_system(hyps, corpus, bleu, mp, policy, {a.threads, a.per_sentence}));
  }

  Sink sink(a.out_dir, out);
  const MetricTable table = to_metric_table(reports);
  bool wrote_tsv = false;
  for (const auto& f : formats) {
    std::ostringstream text;
    if (f == "json") {
      auto j = evaluation_json(manifest, reports);
      if (reports.size() > 1) {
        nlohmann::json cols = nlohmann::json::object();
        for (const auto& c : table.columns) cols[c.name] = c.values;
        j["table"] = {{"systems", table.system_names}, {"columns", cols}};
      }
      text << j.dump(2) << '\n';
      sink.emit("report.json", text.str());
    } else if (f == "tsv") {
      write_metric_table_tsv(text, table, &manifest);
      sink.emit("metrics.tsv", text.str());
      wrote_tsv = true;
    } else {
      write_evaluation_markdown(text, manifest, reports);
      sink.emit("report.md", text.str());
    }
  }
  if (reports.size() > 1 && !wrote_tsv && !a.out_dir.empty()) {
    std::ostringstream text;
    write_metric_table_tsv(text, table, &manifest);
    sink.emit("metrics.tsv", text.str());
  }
  return kExitOk;
}

int cmd_correlate(const CorrelateArgs& a, std::ostream& out) {
  auto formats = a.formats.empty() ? std::vector<std::string>{"json"} : a.formats;
  check_formats(formats, {"json", "markdown"});
  MetricTable table = load_metric_table(a.table);
  if (!a.columns.empty()) table = table.select(split_commas(a.columns));
  if (table.columns.size() < 2) throw UsageError("need at least 2 metric columns");
  const CorrelationMatrix matrix = correlation_matrix(table);

  Sink sink(a.out_dir, out);
  for (const auto& f : formats) {
    std::ostringstream text;
    if (f == "json") {
      auto j = to_json(matrix);
      j["systems"] = table.rows();
      j["input"] = {{"path", a.table}, {"sha256", sha256_file(a.table)}};
      text << j.dump(2) << '\n';
      sink.emit("correlation.json", text.str());
    } else {
      write_correlation_markdown(text, matrix);
      sink.emit("correlation.md", text.str());
    }
  }
  return kExitOk;
}

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
  std::vector<Diagnostic> diags;
  const Corpus corpus = load_corpus(a.corpus, parse_corpus_format(a.corpus_format), &diags);
  for (auto& d : validate_corpus(corpus)) diags.push_back(std::move(d));
  if (corpus.empty()) diags.push_back({Severity::error, "", 0, "corpus has no instances"});
  std::size_t errors = 0;
  std::size_t warnings = 0;
  for (const auto& d : diags) {
    out << a.corpus << ": " << to_string(d) << '\n';
    (d.severity == Severity::error ? errors : warnings)++;
  }
  out << errors << " errors, " << warnings << " warnings\n";
  return errors ? kExitData : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Segmentation-free evaluation for Chinese grammatical error correction",
               "cgec-eval"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score system hypotheses against a corpus");
  evaluate->add_option("--corpus", ev.corpus, "Corpus file")->required();
  evaluate->add_option("--corpus-format", ev.corpus_format, "jsonl or tsv")
      ->check(CLI::IsMember({"jsonl", "tsv"}));
  evaluate->add_option("--hyp", ev.hyps, "name=path, repeatable")->required();
  evaluate->add_option("--hyp-format", ev.hyp_format, "lines or jsonl")
      ->check(CLI::IsMember({"lines", "jsonl"}));
  evaluate->add_option("--max-n", ev.max_n, "Maximum n-gram order")->check(CLI::PositiveNumber);
  evaluate->add_option("--mp-t", ev.mp_t, "Meaning preservation weight t in (0,1)");
  evaluate->add_flag("--nfc", ev.nfc, "Apply canonical composition (NFC)");
  evaluate->add_flag("--strip-internal-whitespace", ev.strip_internal_whitespace,
                     "Remove whitespace inside sentences");
  evaluate->add_option("--format", ev.formats, "json, tsv or markdown; repeatable");
  evaluate->add_option("--out", ev.out_dir, "Output directory (default: stdout)");
  evaluate->add_flag("--per-sentence", ev.per_sentence, "Include per-instance details");
  evaluate->add_option("--threads", ev.threads, "Worker threads per system");

  CorrelateArgs co;
  auto* correlate = app.add_subcommand("correlate", "Pearson correlations between metric columns");
  correlate->add_option("table", co.table, "Metric table (TSV with header row)")->required();
  correlate->add_option("--columns", co.columns, "Comma-separated column selection");
  correlate->add_option("--format", co.formats, "json or markdown; repeatable");
  correlate->add_option("--out", co.out_dir, "Output directory (default: stdout)");

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check a corpus for problems");
  validate->add_option("corpus,--corpus", va.corpus, "Corpus file")->required();
  validate->add_option("--corpus-format", va.corpus_format, "jsonl or tsv")
      ->check(CLI::IsMember({"jsonl", "tsv"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (evaluate->parsed()) return cmd_evaluate(ev, out);
    if (correlate->parsed()) return cmd_correlate(co, out);
    if (validate->parsed()) return cmd_validate(va, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace cgec
