#pragma once

// Segmentation-free metrics for grammatical error correction:
//
//   * sentence accuracy   - fraction of hypotheses equal to some reference;
//   * char-level BLEU     - corpus-level clipped character n-gram precisions,
//                           weighted log-average, closest-length brevity penalty;
//   * meaning preservation - weighted harmonic mean of character-overlap
//                           precision/recall between hypothesis and source, and
//                           its distance to the gold edits' own preservation.
//
// All corpus aggregates are summed in instance order, so results do not
// depend on the number of worker threads.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cgec/dataset.hpp"
#include "cgec/textcore.hpp"

namespace cgec {

struct BleuConfig {
  std::size_t max_order = 4;
  std::vector<double> weights;  // empty means uniform 1/max_order

  /// Uniform weights for max_order.
  static BleuConfig uniform(std::size_t max_order);
  /// Explicit weights; checks non-negativity and unit sum within 1e-12.
  static BleuConfig weighted(std::vector<double> weights);

  /// Weight of order n (1-based).
  double weight(std::size_t n) const;
  void validate() const;
};

struct MeaningPreservationConfig {
  double t = 0.85;

  void validate() const;
};

struct EvalOptions {
  std::size_t threads = 1;
  bool per_sentence = false;
};

/// Corpus-level modified precision for one order. value() is 0 when the
/// denominator is 0; defined() tells the two cases apart.
struct PrecisionCount {
  std::size_t order = 0;
  std::size_t numerator = 0;
  std::size_t denominator = 0;

  bool defined() const noexcept { return denominator > 0; }
  double value() const noexcept {
    return defined() ? static_cast<double>(numerator) / static_cast<double>(denominator) : 0.0;
  }
};

struct BrevityPenalty {
  std::size_t hypothesis_length = 0;  // c: summed hypothesis lengths
  std::size_t reference_length = 0;   // r: summed closest reference lengths
  double value = 0.0;                 // 0 sentinel when c == 0

  bool defined() const noexcept { return hypothesis_length > 0; }
};

struct BleuResult {
  double score = 0.0;
  double log_average = 0.0;  // exp(sum_n w_n log P_n), 0 if any P_n is 0
  std::vector<PrecisionCount> precisions;
  BrevityPenalty brevity;
  std::vector<std::string> diagnostics;
};

struct MeaningPreservation {
  double mp = 0.0;
  double mp_average = 0.0;
  double mp_prime = 0.0;
};

struct SentenceDetail {
  std::string id;
  int match = 0;  // y_i
  double s_cm = 0.0;
  std::size_t hypothesis_length = 0;
  std::size_t closest_reference_length = 0;
};

struct MetricReport {
  std::string system_name;
  std::size_t instances = 0;
  double acc_sen = 0.0;
  BleuResult bleu;
  double mp = 0.0;
  double mp_average = 0.0;
  double mp_prime = 0.0;
  std::vector<std::string> diagnostics;
  std::optional<std::vector<SentenceDetail>> per_sentence;
};

/// Length of the reference closest to hyp_length, ties toward the shorter.
std::size_t closest_reference_length(std::size_t hyp_length,
                                     const std::vector<std::size_t>& ref_lengths);

int sentence_match(std::string_view hypothesis, const EvaluationInstance& instance,
                   const NormalizationPolicy& policy);

double corpus_accuracy(const HypothesisSet& hyps, const Corpus& corpus,
                       const NormalizationPolicy& policy);

PrecisionCount modified_precision(const HypothesisSet& hyps, const Corpus& corpus,
                                  std::size_t order, const NormalizationPolicy& policy);

BrevityPenalty brevity_penalty(const HypothesisSet& hyps, const Corpus& corpus,
                               const NormalizationPolicy& policy);

/// BLEU = BP * exp(sum_n w_n log P_n) from aggregated counts. No smoothing:
/// any zero or undefined P_n gives 0 with a diagnostic naming the order.
BleuResult combine_bleu(std::vector<PrecisionCount> precisions, BrevityPenalty brevity,
                        const BleuConfig& cfg);

double brevity_penalty_value(std::size_t hypothesis_length, std::size_t reference_length);

BleuResult char_bleu(const HypothesisSet& hyps, const Corpus& corpus, const BleuConfig& cfg,
                     const NormalizationPolicy& policy);

/// Multiset character overlap between two sequences.
std::size_t matched_characters(const CharSequence& a, const CharSequence& b);

double mp_sentence(std::string_view corrected, std::string_view original,
                   const MeaningPreservationConfig& cfg, const NormalizationPolicy& policy);

/// Flat mean of mp_sentence(reference, source) over distinct normalized references.
double mp_average(const Corpus& corpus, const MeaningPreservationConfig& cfg,
                  const NormalizationPolicy& policy);

MeaningPreservation mp_prime(const HypothesisSet& hyps, const Corpus& corpus,
                             const MeaningPreservationConfig& cfg,
                             const NormalizationPolicy& policy);

MetricReport evaluate_system(const HypothesisSet& hyps, const Corpus& corpus,
                             const BleuConfig& bleu_cfg, const MeaningPreservationConfig& mp_cfg,
                             const NormalizationPolicy& policy, const EvalOptions& options = {});

}  // namespace cgec
