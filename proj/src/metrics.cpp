#include "cgec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <set>
#include <thread>
#include <unordered_map>

namespace cgec {

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled by exactly one worker; callers write results to slot i only.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t w = 0; w < threads; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
}

struct Prepared {
  CharSequence hypothesis;
  CharSequence source;
  std::vector<CharSequence> references;  // normalized, duplicates removed
};

std::vector<std::string> normalized_references(const EvaluationInstance& inst,
                                               const NormalizationPolicy& policy) {
  std::vector<std::string> refs;
  refs.reserve(inst.references.size());
  for (const auto& r : inst.references) refs.push_back(normalize(r, policy));
  deduplicate_references(refs);
  return refs;
}

Prepared prepare(std::string_view hypothesis, const EvaluationInstance& inst,
                 const NormalizationPolicy& policy) {
  Prepared p;
  p.hypothesis = tokenize_chars(normalize(hypothesis, policy));
  p.source = tokenize_chars(normalize(inst.source, policy));
  for (const auto& r : normalized_references(inst, policy)) {
    p.references.push_back(tokenize_chars(r));
  }
  return p;
}

struct InstanceStats {
  int match = 0;
  std::vector<std::size_t> clipped;  // per order, index n-1
  std::vector<std::size_t> totals;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;
  double s_cm = 0.0;
  std::vector<double> gold_s_cm;  // S_CM(reference_j, source) for each distinct reference
};

double s_cm(const CharSequence& corrected, const CharSequence& original,
            const MeaningPreservationConfig& cfg) {
  if (corrected.empty() || original.empty()) return 0.0;
  const std::size_t m = matched_characters(corrected, original);
  if (m == 0) return 0.0;
  const double precision = static_cast<double>(m) / static_cast<double>(corrected.length());
  const double recall = static_cast<double>(m) / static_cast<double>(original.length());
  return precision * recall / (cfg.t * precision + (1.0 - cfg.t) * recall);
}

InstanceStats analyze(const Prepared& p, std::size_t max_order,
                      const MeaningPreservationConfig& mp_cfg) {
  InstanceStats s;
  s.match = std::ranges::any_of(p.references,
                                [&](const CharSequence& r) { return r == p.hypothesis; })
                ? 1
                : 0;
  s.clipped.resize(max_order);
  s.totals.resize(max_order);
  for (std::size_t n = 1; n <= max_order; ++n) {
    const NGramMultiset cand = extract_ngrams(p.hypothesis, n);
    std::vector<NGramMultiset> refs;
    refs.reserve(p.references.size());
    for (const auto& r : p.references) refs.push_back(extract_ngrams(r, n));
    s.clipped[n - 1] = clipped_match(cand, refs);
    s.totals[n - 1] = cand.total();
  }
  std::vector<std::size_t> ref_lengths;
  for (const auto& r : p.references) ref_lengths.push_back(r.length());
  s.hyp_length = p.hypothesis.length();
  s.ref_length = closest_reference_length(s.hyp_length, ref_lengths);
  s.s_cm = s_cm(p.hypothesis, p.source, mp_cfg);
  for (const auto& r : p.references) s.gold_s_cm.push_back(s_cm(r, p.source, mp_cfg));
  return s;
}

std::vector<InstanceStats> analyze_corpus(const HypothesisSet& hyps, const Corpus& corpus,
                                          std::size_t max_order,
                                          const MeaningPreservationConfig& mp_cfg,
                                          const NormalizationPolicy& policy,
                                          std::size_t threads) {
  check_coverage(hyps, corpus);
  std::vector<InstanceStats> stats(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    const auto& inst = corpus[i];
    stats[i] = analyze(prepare(hyps.at(inst.id), inst, policy), max_order, mp_cfg);
  });
  return stats;
}

void require_nonempty(const Corpus& corpus) {
  if (corpus.empty()) throw UsageError("corpus has no instances");
}

std::vector<PrecisionCount> sum_precisions(const std::vector<InstanceStats>& stats,
                                           std::size_t max_order) {
  std::vector<PrecisionCount> out(max_order);
  for (std::size_t n = 0; n < max_order; ++n) out[n].order = n + 1;
  for (const auto& s : stats) {
    for (std::size_t n = 0; n < max_order; ++n) {
      out[n].numerator += s.clipped[n];
      out[n].denominator += s.totals[n];
    }
  }
  return out;
}

BrevityPenalty sum_brevity(const std::vector<InstanceStats>& stats) {
  BrevityPenalty bp;
  for (const auto& s : stats) {
    bp.hypothesis_length += s.hyp_length;
    bp.reference_length += s.ref_length;
  }
  bp.value = brevity_penalty_value(bp.hypothesis_length, bp.reference_length);
  return bp;
}

double mean_s_cm(const std::vector<InstanceStats>& stats) {
  double sum = 0.0;
  for (const auto& s : stats) sum += s.s_cm;
  return sum / static_cast<double>(stats.size());
}

double mean_gold_s_cm(const std::vector<InstanceStats>& stats) {
  double sum = 0.0;
  std::size_t pairs = 0;
  for (const auto& s : stats) {
    for (double v : s.gold_s_cm) {
      sum += v;
      ++pairs;
    }
  }
  return pairs ? sum / static_cast<double>(pairs) : 0.0;
}

}  // namespace

BleuConfig BleuConfig::uniform(std::size_t max_order) {
  BleuConfig cfg;
  cfg.max_order = max_order;
  cfg.validate();
  return cfg;
}

BleuConfig BleuConfig::weighted(std::vector<double> weights) {
  BleuConfig cfg;
  cfg.max_order = weights.size();
  cfg.weights = std::move(weights);
  cfg.validate();
  return cfg;
}

double BleuConfig::weight(std::size_t n) const {
  if (n == 0 || n > max_order) throw UsageError("BLEU order out of range");
  return weights.empty() ? 1.0 / static_cast<double>(max_order) : weights[n - 1];
}

void BleuConfig::validate() const {
  if (max_order == 0) throw UsageError("BLEU max order must be at least 1");
  if (weights.empty()) return;
  if (weights.size() != max_order) {
    throw UsageError("BLEU weights must have one entry per order");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw UsageError("BLEU weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw UsageError("BLEU weights must sum to 1");
}

void MeaningPreservationConfig::validate() const {
  if (!(t > 0.0 && t < 1.0)) throw UsageError("meaning preservation t must lie in (0, 1)");
}

std::size_t closest_reference_length(std::size_t hyp_length,
                                     const std::vector<std::size_t>& ref_lengths) {
  if (ref_lengths.empty()) throw UsageError("no reference lengths");
  std::size_t best = ref_lengths.front();
  const auto distance = [hyp_length](std::size_t len) {
    return len > hyp_length ? len - hyp_length : hyp_length - len;
  };
  for (std::size_t len : ref_lengths) {
    const auto d = distance(len);
    const auto best_d = distance(best);
    if (d < best_d || (d == best_d && len < best)) best = len;
  }
  return best;
}

int sentence_match(std::string_view hypothesis, const EvaluationInstance& instance,
                   const NormalizationPolicy& policy) {
  const std::string hyp = normalize(hypothesis, policy);
  for (const auto& ref : instance.references) {
    if (normalize(ref, policy) == hyp) return 1;
  }
  return 0;
}

double corpus_accuracy(const HypothesisSet& hyps, const Corpus& corpus,
                       const NormalizationPolicy& policy) {
  require_nonempty(corpus);
  check_coverage(hyps, corpus);
  std::size_t matches = 0;
  for (const auto& inst : corpus.instances()) {
    matches += static_cast<std::size_t>(sentence_match(hyps.at(inst.id), inst, policy));
  }
  return static_cast<double>(matches) / static_cast<double>(corpus.size());
}

PrecisionCount modified_precision(const HypothesisSet& hyps, const Corpus& corpus,
                                  std::size_t order, const NormalizationPolicy& policy) {
  if (order == 0) throw UsageError("n-gram order must be at least 1");
  check_coverage(hyps, corpus);
  PrecisionCount pc;
  pc.order = order;
  for (const auto& inst : corpus.instances()) {
    const Prepared p = prepare(hyps.at(inst.id), inst, policy);
    const NGramMultiset cand = extract_ngrams(p.hypothesis, order);
    std::vector<NGramMultiset> refs;
    for (const auto& r : p.references) refs.push_back(extract_ngrams(r, order));
    pc.numerator += clipped_match(cand, refs);
    pc.denominator += cand.total();
  }
  return pc;
}

double brevity_penalty_value(std::size_t hypothesis_length, std::size_t reference_length) {
  if (hypothesis_length == 0) return 0.0;
  if (hypothesis_length > reference_length) return 1.0;
  return std::exp(1.0 - static_cast<double>(reference_length) /
                            static_cast<double>(hypothesis_length));
}

BrevityPenalty brevity_penalty(const HypothesisSet& hyps, const Corpus& corpus,
                               const NormalizationPolicy& policy) {
  check_coverage(hyps, corpus);
  BrevityPenalty bp;
  for (const auto& inst : corpus.instances()) {
    const Prepared p = prepare(hyps.at(inst.id), inst, policy);
    std::vector<std::size_t> lengths;
    for (const auto& r : p.references) lengths.push_back(r.length());
    bp.hypothesis_length += p.hypothesis.length();
    bp.reference_length += closest_reference_length(p.hypothesis.length(), lengths);
  }
  bp.value = brevity_penalty_value(bp.hypothesis_length, bp.reference_length);
  return bp;
}

BleuResult combine_bleu(std::vector<PrecisionCount> precisions, BrevityPenalty brevity,
                        const BleuConfig& cfg) {
  cfg.validate();
  if (precisions.size() != cfg.max_order) {
    throw UsageError("precision count does not match BLEU max order");
  }
  BleuResult result;
  result.precisions = std::move(precisions);
  result.brevity = brevity;

  bool zero = false;
  double log_sum = 0.0;
  for (const auto& pc : result.precisions) {
    const std::string name = "P_" + std::to_string(pc.order);
    if (!pc.defined()) {
      result.diagnostics.push_back(name + " undefined (no candidate " + std::to_string(pc.order) +
                                   "-grams); treated as 0");
      zero = true;
    } else if (pc.numerator == 0) {
      result.diagnostics.push_back(name + " = 0");
      zero = true;
    } else {
      log_sum += cfg.weight(pc.order) * std::log(pc.value());
    }
  }
  if (!brevity.defined()) {
    result.diagnostics.push_back("total hypothesis length is 0; BP reported as 0");
  }
  result.log_average = zero ? 0.0 : std::exp(log_sum);
  result.score = (zero || !brevity.defined()) ? 0.0 : brevity.value * result.log_average;
  return result;
}

BleuResult char_bleu(const HypothesisSet& hyps, const Corpus& corpus, const BleuConfig& cfg,
                     const NormalizationPolicy& policy) {
  cfg.validate();
  require_nonempty(corpus);
  const auto stats = analyze_corpus(hyps, corpus, cfg.max_order, {}, policy, 1);
  return combine_bleu(sum_precisions(stats, cfg.max_order), sum_brevity(stats), cfg);
}

std::size_t matched_characters(const CharSequence& a, const CharSequence& b) {
  std::unordered_map<char32_t, std::size_t> counts;
  for (char32_t c : a.chars()) ++counts[c];
  std::size_t matched = 0;
  for (char32_t c : b.chars()) {
    auto it = counts.find(c);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++matched;
    }
  }
  return matched;
}

double mp_sentence(std::string_view corrected, std::string_view original,
                   const MeaningPreservationConfig& cfg, const NormalizationPolicy& policy) {
  cfg.validate();
  return s_cm(tokenize_chars(normalize(corrected, policy)),
              tokenize_chars(normalize(original, policy)), cfg);
}

double mp_average(const Corpus& corpus, const MeaningPreservationConfig& cfg,
                  const NormalizationPolicy& policy) {
  cfg.validate();
  require_nonempty(corpus);
  double sum = 0.0;
  std::size_t pairs = 0;
  for (const auto& inst : corpus.instances()) {
    const CharSequence source = tokenize_chars(normalize(inst.source, policy));
    for (const auto& r : normalized_references(inst, policy)) {
      sum += s_cm(tokenize_chars(r), source, cfg);
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

MeaningPreservation mp_prime(const HypothesisSet& hyps, const Corpus& corpus,
                             const MeaningPreservationConfig& cfg,
                             const NormalizationPolicy& policy) {
  cfg.validate();
  require_nonempty(corpus);
  check_coverage(hyps, corpus);
  MeaningPreservation out;
  double sum = 0.0;
  for (const auto& inst : corpus.instances()) sum += mp_sentence(hyps.at(inst.id), inst.source, cfg, policy);
  out.mp = sum / static_cast<double>(corpus.size());
  out.mp_average = mp_average(corpus, cfg, policy);
  out.mp_prime = std::abs(out.mp - out.mp_average);
  return out;
}

MetricReport evaluate_system(const HypothesisSet& hyps, const Corpus& corpus,
                             const BleuConfig& bleu_cfg, const MeaningPreservationConfig& mp_cfg,
                             const NormalizationPolicy& policy, const EvalOptions& options) {
  bleu_cfg.validate();
  mp_cfg.validate();
  require_nonempty(corpus);
  const auto stats =
      analyze_corpus(hyps, corpus, bleu_cfg.max_order, mp_cfg, policy, options.threads);

  MetricReport report;
  report.system_name = hyps.system_name;
  report.instances = corpus.size();

  std::size_t matches = 0;
  for (const auto& s : stats) matches += static_cast<std::size_t>(s.match);
  report.acc_sen = static_cast<double>(matches) / static_cast<double>(corpus.size());

  report.bleu = combine_bleu(sum_precisions(stats, bleu_cfg.max_order), sum_brevity(stats),
                             bleu_cfg);
  report.mp = mean_s_cm(stats);
  report.mp_average = mean_gold_s_cm(stats);
  report.mp_prime = std::abs(report.mp - report.mp_average);

  report.diagnostics = report.bleu.diagnostics;
  const bool all_empty =
      std::ranges::all_of(stats, [](const InstanceStats& s) { return s.hyp_length == 0; });
  if (all_empty) report.diagnostics.push_back("every hypothesis is empty; BLEU = 0 and MP = 0");

  if (options.per_sentence) {
    std::vector<SentenceDetail> details;
    details.reserve(stats.size());
    for (std::size_t i = 0; i < stats.size(); ++i) {
      details.push_back({corpus[i].id, stats[i].match, stats[i].s_cm, stats[i].hyp_length,
                         stats[i].ref_length});
    }
    report.per_sentence = std::move(details);
  }
  return report;
}

}  // namespace cgec
