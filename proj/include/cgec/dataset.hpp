#pragma once

// Multi-reference evaluation corpora and per-system hypothesis sets.
//
// Corpus JSONL: one object per line with `id`, `source`, `references`.
// Corpus TSV:   id<TAB>source<TAB>ref1[<TAB>ref2...], no header, no escaping.
// Hypotheses:   plain lines aligned with corpus order, or JSONL `id`/`hypothesis`.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cgec/textcore.hpp"

namespace cgec {

enum class CorpusFormat { jsonl, tsv };
enum class HypothesisFormat { lines, jsonl };

CorpusFormat parse_corpus_format(std::string_view name);
HypothesisFormat parse_hypothesis_format(std::string_view name);

struct EvaluationInstance {
  std::string id;
  std::string source;
  std::vector<std::string> references;
  std::size_t line = 0;  // 1-based line in the originating file, 0 if constructed in code

  friend bool operator==(const EvaluationInstance& a, const EvaluationInstance& b) {
    return a.id == b.id && a.source == b.source && a.references == b.references;
  }
};

class Corpus {
 public:
  Corpus() = default;
  /// Throws DataError on duplicate ids or an instance with no references.
  explicit Corpus(std::vector<EvaluationInstance> instances);

  const std::vector<EvaluationInstance>& instances() const noexcept { return instances_; }
  std::size_t size() const noexcept { return instances_.size(); }
  bool empty() const noexcept { return instances_.empty(); }
  const EvaluationInstance& operator[](std::size_t i) const { return instances_[i]; }

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<EvaluationInstance> instances_;
};

struct HypothesisSet {
  std::string system_name;
  std::map<std::string, std::string> entries;  // instance id -> hypothesis

  /// Hypothesis for an instance; throws DataError if absent.
  const std::string& at(const std::string& id) const;
};

enum class Severity { warning, error };

struct Diagnostic {
  Severity severity = Severity::warning;
  std::string instance_id;
  std::size_t line = 0;
  std::string message;
};

std::string to_string(const Diagnostic& d);

/// Removes exact-string duplicate references, keeping first occurrences.
/// Returns the number removed.
std::size_t deduplicate_references(std::vector<std::string>& references);

Corpus read_corpus(std::istream& in, CorpusFormat format, std::string_view origin = "<stream>",
                   std::vector<Diagnostic>* warnings = nullptr);
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   std::vector<Diagnostic>* warnings = nullptr);

void write_corpus(std::ostream& out, const Corpus& corpus, CorpusFormat format);

HypothesisSet read_hypotheses(std::istream& in, HypothesisFormat format, const Corpus& corpus,
                              std::string system_name, std::string_view origin = "<stream>");
HypothesisSet load_hypotheses(const std::filesystem::path& path, HypothesisFormat format,
                              const Corpus& corpus, std::string system_name);

/// Throws DataError unless hyps covers exactly the corpus ids.
void check_coverage(const HypothesisSet& hyps, const Corpus& corpus);

/// Longest sentence (in characters) accepted without a warning.
inline constexpr std::size_t kLongSentenceChars = 500;

std::vector<Diagnostic> validate_corpus(const Corpus& corpus);

}  // namespace cgec
