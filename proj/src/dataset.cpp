#include "cgec/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace cgec {

namespace {

using nlohmann::json;

std::string where(std::string_view origin, std::size_t line) {
  return std::string(origin) + ":" + std::to_string(line);
}

// Reads one line, dropping a trailing '\r' so CRLF files behave like LF files.
bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

void require_utf8(std::string_view text, std::string_view origin, std::size_t line) {
  try {
    tokenize_chars(text);
  } catch (const DataError& e) {
    throw DataError(where(origin, line) + ": " + e.what());
  }
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  return in;
}

EvaluationInstance parse_jsonl_record(const std::string& line, std::string_view origin,
                                      std::size_t lineno) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(where(origin, lineno) + ": malformed JSON record (" + e.what() + ")");
  }
  if (!record.is_object()) throw DataError(where(origin, lineno) + ": record is not an object");
  const auto string_field = [&](const char* name) {
    const auto it = record.find(name);
    if (it == record.end() || !it->is_string()) {
      throw DataError(where(origin, lineno) + ": field '" + name + "' missing or not a string");
    }
    return it->get<std::string>();
  };
  EvaluationInstance inst;
  inst.id = string_field("id");
  inst.source = string_field("source");
  inst.line = lineno;
  const auto refs = record.find("references");
  if (refs == record.end() || !refs->is_array()) {
    throw DataError(where(origin, lineno) + ": field 'references' missing or not an array");
  }
  for (const auto& r : *refs) {
    if (!r.is_string()) {
      throw DataError(where(origin, lineno) + ": every reference must be a string");
    }
    inst.references.push_back(r.get<std::string>());
  }
  return inst;
}

EvaluationInstance parse_tsv_record(const std::string& line, std::string_view origin,
                                    std::size_t lineno) {
  require_utf8(line, origin, lineno);
  auto fields = split_tabs(line);
  if (fields.size() < 2) {
    throw DataError(where(origin, lineno) + ": expected id<TAB>source<TAB>reference...");
  }
  EvaluationInstance inst;
  inst.id = std::move(fields[0]);
  inst.source = std::move(fields[1]);
  inst.references.assign(std::make_move_iterator(fields.begin() + 2),
                         std::make_move_iterator(fields.end()));
  inst.line = lineno;
  return inst;
}

}  // namespace

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "tsv") return CorpusFormat::tsv;
  throw UsageError("unknown corpus format '" + std::string(name) + "' (expected jsonl or tsv)");
}

HypothesisFormat parse_hypothesis_format(std::string_view name) {
  if (name == "lines") return HypothesisFormat::lines;
  if (name == "jsonl") return HypothesisFormat::jsonl;
  throw UsageError("unknown hypothesis format '" + std::string(name) +
                   "' (expected lines or jsonl)");
}

Corpus::Corpus(std::vector<EvaluationInstance> instances) : instances_(std::move(instances)) {
  std::set<std::string_view> seen;
  for (const auto& inst : instances_) {
    const std::string at = inst.line ? " (line " + std::to_string(inst.line) + ")" : "";
    if (inst.references.empty()) {
      throw DataError("instance '" + inst.id + "'" + at + " has no references");
    }
    if (!seen.insert(inst.id).second) {
      throw DataError("duplicate instance id '" + inst.id + "'" + at);
    }
  }
}

const std::string& HypothesisSet::at(const std::string& id) const {
  const auto it = entries.find(id);
  if (it == entries.end()) {
    throw DataError("system '" + system_name + "' has no hypothesis for id '" + id + "'");
  }
  return it->second;
}

std::string to_string(const Diagnostic& d) {
  std::string out = d.severity == Severity::error ? "error" : "warning";
  if (d.line) out += " line " + std::to_string(d.line);
  if (!d.instance_id.empty()) out += " [" + d.instance_id + "]";
  return out + ": " + d.message;
}

std::size_t deduplicate_references(std::vector<std::string>& references) {
  std::set<std::string> seen;
  const auto before = references.size();
  std::erase_if(references, [&](const std::string& r) { return !seen.insert(r).second; });
  return before - references.size();
}

Corpus read_corpus(std::istream& in, CorpusFormat format, std::string_view origin,
                   std::vector<Diagnostic>* warnings) {
  std::vector<EvaluationInstance> instances;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    EvaluationInstance inst = format == CorpusFormat::jsonl
                                  ? parse_jsonl_record(line, origin, lineno)
                                  : parse_tsv_record(line, origin, lineno);
    if (inst.references.empty()) {
      throw DataError(where(origin, lineno) + ": instance '" + inst.id + "' has no references");
    }
    if (!ids.insert(inst.id).second) {
      throw DataError(where(origin, lineno) + ": duplicate id '" + inst.id + "'");
    }
    if (const auto removed = deduplicate_references(inst.references); removed && warnings) {
      warnings->push_back({Severity::warning, inst.id, lineno,
                           "removed " + std::to_string(removed) + " duplicate reference(s)"});
    }
    instances.push_back(std::move(inst));
  }
  return Corpus(std::move(instances));
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   std::vector<Diagnostic>* warnings) {
  auto in = open_input(path);
  return read_corpus(in, format, path.string(), warnings);
}

void write_corpus(std::ostream& out, const Corpus& corpus, CorpusFormat format) {
  for (const auto& inst : corpus.instances()) {
    if (format == CorpusFormat::jsonl) {
      const json record = {{"id", inst.id}, {"source", inst.source}, {"references", inst.references}};
      out << record.dump() << '\n';
    } else {
      const auto check = [&](const std::string& s) {
        if (s.find_first_of("\t\n\r") != std::string::npos) {
          throw DataError("instance '" + inst.id + "' contains a tab or newline; use JSONL");
        }
      };
      check(inst.id);
      check(inst.source);
      out << inst.id << '\t' << inst.source;
      for (const auto& r : inst.references) {
        check(r);
        out << '\t' << r;
      }
      out << '\n';
    }
  }
}

HypothesisSet read_hypotheses(std::istream& in, HypothesisFormat format, const Corpus& corpus,
                              std::string system_name, std::string_view origin) {
  HypothesisSet hyps{std::move(system_name), {}};
  std::string line;
  std::size_t lineno = 0;

  if (format == HypothesisFormat::lines) {
    std::vector<std::string> lines;
    while (next_line(in, line)) {
      ++lineno;
      require_utf8(line, origin, lineno);
      lines.push_back(line);
    }
    if (lines.size() != corpus.size()) {
      throw DataError(std::string(origin) + ": expected " + std::to_string(corpus.size()) +
                      " hypotheses, found " + std::to_string(lines.size()));
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      hyps.entries.emplace(corpus[i].id, std::move(lines[i]));
    }
    return hyps;
  }

  std::set<std::string> known;
  for (const auto& inst : corpus.instances()) known.insert(inst.id);
  while (next_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(where(origin, lineno) + ": malformed JSON record (" + e.what() + ")");
    }
    if (!record.is_object() || !record.contains("id") || !record["id"].is_string() ||
        !record.contains("hypothesis") || !record["hypothesis"].is_string()) {
      throw DataError(where(origin, lineno) + ": expected string fields 'id' and 'hypothesis'");
    }
    auto id = record["id"].get<std::string>();
    if (!known.contains(id)) {
      throw DataError(where(origin, lineno) + ": unknown id '" + id + "'");
    }
    if (!hyps.entries.emplace(id, record["hypothesis"].get<std::string>()).second) {
      throw DataError(where(origin, lineno) + ": duplicate id '" + id + "'");
    }
  }
  try {
    check_coverage(hyps, corpus);
  } catch (const DataError& e) {
    throw DataError(std::string(origin) + ": " + e.what());
  }
  return hyps;
}

HypothesisSet load_hypotheses(const std::filesystem::path& path, HypothesisFormat format,
                              const Corpus& corpus, std::string system_name) {
  auto in = open_input(path);
  return read_hypotheses(in, format, corpus, std::move(system_name), path.string());
}

void check_coverage(const HypothesisSet& hyps, const Corpus& corpus) {
  std::vector<std::string> missing;
  for (const auto& inst : corpus.instances()) {
    if (!hyps.entries.contains(inst.id)) missing.push_back(inst.id);
  }
  if (!missing.empty()) {
    std::string msg = "missing hypotheses for id(s):";
    for (const auto& id : missing) msg += " " + id;
    throw DataError(msg);
  }
  if (hyps.entries.size() != corpus.size()) {
    std::set<std::string_view> known;
    for (const auto& inst : corpus.instances()) known.insert(inst.id);
    std::string msg = "hypotheses for unknown id(s):";
    for (const auto& [id, _] : hyps.entries) {
      if (!known.contains(id)) msg += " " + id;
    }
    throw DataError(msg);
  }
}

std::vector<Diagnostic> validate_corpus(const Corpus& corpus) {
  std::vector<Diagnostic> out;
  std::set<std::string_view> ids;
  const auto length = [](const std::string& s) -> std::size_t {
    try {
      return tokenize_chars(s).length();
    } catch (const DataError&) {
      return 0;
    }
  };
  for (const auto& inst : corpus.instances()) {
    const auto add = [&](Severity sev, std::string msg) {
      out.push_back({sev, inst.id, inst.line, std::move(msg)});
    };
    if (!ids.insert(inst.id).second) add(Severity::error, "duplicate id");
    if (inst.source.empty()) add(Severity::error, "empty source");
    if (inst.references.empty()) add(Severity::error, "no references");
    if (length(inst.source) > kLongSentenceChars) {
      add(Severity::warning, "source longer than " + std::to_string(kLongSentenceChars) +
                                 " characters");
    }
    std::set<std::string_view> refs;
    for (std::size_t j = 0; j < inst.references.size(); ++j) {
      const auto& ref = inst.references[j];
      const std::string which = "reference " + std::to_string(j + 1);
      if (ref.empty()) add(Severity::error, which + " is empty");
      if (!refs.insert(ref).second) add(Severity::warning, which + " duplicates an earlier one");
      if (ref == inst.source) add(Severity::warning, which + ": reference equals source");
      if (length(ref) > kLongSentenceChars) {
        add(Severity::warning, which + " longer than " + std::to_string(kLongSentenceChars) +
                                   " characters");
      }
    }
  }
  return out;
}

}  // namespace cgec
