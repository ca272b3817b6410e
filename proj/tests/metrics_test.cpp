#include "cgec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracle/bleu_oracle.hpp"
#include "support/random_corpus.hpp"

namespace cgec {
namespace {

const NormalizationPolicy kDefault{};
const MeaningPreservationConfig kMp{};

Corpus make_corpus(std::vector<std::pair<std::string, std::vector<std::string>>> rows) {
  std::vector<EvaluationInstance> instances;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    instances.push_back({std::to_string(i + 1), rows[i].first, rows[i].second, 0});
  }
  return Corpus(std::move(instances));
}

HypothesisSet make_hyps(const Corpus& corpus, std::vector<std::string> lines) {
  HypothesisSet h{"sys", {}};
  for (std::size_t i = 0; i < lines.size(); ++i) h.entries[corpus[i].id] = lines[i];
  return h;
}

TEST(SentenceMatch, AnyReferenceSuffices) {
  const EvaluationInstance inst{"1", "src", {"甲乙", "丙丁", "戊己"}, 0};
  EXPECT_EQ(sentence_match("甲乙", inst, kDefault), 1);
  EXPECT_EQ(sentence_match("戊己", inst, kDefault), 1);
  EXPECT_EQ(sentence_match("戊乙", inst, kDefault), 0);
  EXPECT_EQ(sentence_match("  甲乙\r\n", inst, kDefault), 1);
}

TEST(CorpusAccuracy, MeanOfIndicators) {
  const auto c = make_corpus({{"s", {"a"}}, {"s", {"b"}}, {"s", {"c"}}, {"s", {"d"}}});
  EXPECT_DOUBLE_EQ(corpus_accuracy(make_hyps(c, {"a", "x", "x", "x"}), c, kDefault), 0.25);
  EXPECT_DOUBLE_EQ(corpus_accuracy(make_hyps(c, {"a", "b", "c", "d"}), c, kDefault), 1.0);
  EXPECT_DOUBLE_EQ(corpus_accuracy(make_hyps(c, {"x", "x", "x", "x"}), c, kDefault), 0.0);
  EXPECT_THROW(corpus_accuracy(HypothesisSet{}, Corpus{}, kDefault), UsageError);
  EXPECT_THROW(corpus_accuracy(make_hyps(c, {"a"}), c, kDefault), DataError);
}

TEST(ModifiedPrecision, HandEnumeratedCases) {
  {
    // a clipped to 1, b to 1: 2/3.
    const auto c = make_corpus({{"s", {"ab"}}});
    const auto p = modified_precision(make_hyps(c, {"aab"}), c, 1, kDefault);
    EXPECT_EQ(p.numerator, 2u);
    EXPECT_EQ(p.denominator, 3u);
    EXPECT_DOUBLE_EQ(p.value(), 2.0 / 3.0);
  }
  {
    const auto c = make_corpus({{"s", {"a", "aa"}}});
    const auto p = modified_precision(make_hyps(c, {"aa"}), c, 1, kDefault);
    EXPECT_EQ(p.numerator, 2u);
    EXPECT_EQ(p.denominator, 2u);
  }
  {
    const auto c = make_corpus({{"s", {"但是这种"}}});
    for (std::size_t n = 1; n <= 4; ++n) {
      EXPECT_DOUBLE_EQ(modified_precision(make_hyps(c, {"但是这种"}), c, n, kDefault).value(), 1.0);
    }
  }
}

TEST(ModifiedPrecision, UndefinedWhenNoCandidateNgrams) {
  const auto c = make_corpus({{"s", {"abcd"}}});
  const auto p = modified_precision(make_hyps(c, {"ab"}), c, 3, kDefault);
  EXPECT_FALSE(p.defined());
  EXPECT_EQ(p.value(), 0.0);
  EXPECT_THROW(modified_precision(make_hyps(c, {"ab"}), c, 0, kDefault), UsageError);
}

TEST(BrevityPenalty, Branches) {
  EXPECT_EQ(brevity_penalty_value(10, 8), 1.0);
  EXPECT_NEAR(brevity_penalty_value(8, 10), 0.7788007830714049, 1e-15);
  EXPECT_EQ(brevity_penalty_value(9, 9), 1.0);
  EXPECT_EQ(brevity_penalty_value(0, 3), 0.0);
}

TEST(BrevityPenalty, ClosestReferenceTiesTowardShorter) {
  EXPECT_EQ(closest_reference_length(5, {3, 7}), 3u);
  EXPECT_EQ(closest_reference_length(5, {7, 3}), 3u);
  EXPECT_EQ(closest_reference_length(5, {6, 3}), 6u);
  EXPECT_EQ(closest_reference_length(0, {2, 1}), 1u);
  EXPECT_THROW(closest_reference_length(1, {}), UsageError);
}

TEST(BrevityPenalty, CorpusAggregation) {
  // c = 3 + 5 = 8; closest r = 5 + 5 = 10.
  const auto c = make_corpus({{"s", {"abcde", "abcdefghi"}}, {"s", {"abcde"}}});
  const auto bp = brevity_penalty(make_hyps(c, {"abc", "abcde"}), c, kDefault);
  EXPECT_EQ(bp.hypothesis_length, 8u);
  EXPECT_EQ(bp.reference_length, 10u);
  EXPECT_NEAR(bp.value, std::exp(1.0 - 10.0 / 8.0), 1e-15);
}

// Adding a reference can pull the closest length above the hypothesis and
// lower BP even though no precision changes.
TEST(BrevityPenalty, CloserLongerReferenceCanLowerIt) {
  const auto before = make_corpus({{"s", {"abc"}}});
  const auto after = make_corpus({{"s", {"abc", "xyzwvu"}}});
  const auto hyp_b = make_hyps(before, {"abcde"});
  const auto hyp_a = make_hyps(after, {"abcde"});
  EXPECT_EQ(brevity_penalty(hyp_b, before, kDefault).value, 1.0);
  EXPECT_LT(brevity_penalty(hyp_a, after, kDefault).value, 1.0);
}

TEST(CharBleu, AddedReferenceCanLowerScoreThroughBrevity) {
  // P1..P4 = 4/7, 3/6, 2/5, 1/4 both times; r moves from 4 to 8 > c = 7.
  const auto before = make_corpus({{"s", {"abcd"}}});
  const auto after = make_corpus({{"s", {"abcd", "xxxxxxxx"}}});
  const auto b = char_bleu(make_hyps(before, {"abcdefg"}), before, {}, kDefault);
  const auto a = char_bleu(make_hyps(after, {"abcdefg"}), after, {}, kDefault);
  const double precision = std::pow(4.0 / 7.0 * 3.0 / 6.0 * 2.0 / 5.0 * 1.0 / 4.0, 0.25);
  EXPECT_NEAR(b.score, precision, 1e-15);
  EXPECT_NEAR(a.score, std::exp(1.0 - 8.0 / 7.0) * precision, 1e-15);
  EXPECT_LT(a.score, b.score);
}

TEST(CharBleu, PerfectSystemScoresOne) {
  const auto c = make_corpus({{"但是这个想法太短浅。", {"但是这种想法太短浅。", "这种想法太短浅了。"}},
                              {"我去学校了昨天", {"我昨天去学校了"}}});
  const auto r = char_bleu(make_hyps(c, {"这种想法太短浅了。", "我昨天去学校了"}), c, {}, kDefault);
  EXPECT_EQ(r.score, 1.0);
  EXPECT_TRUE(r.diagnostics.empty());
}

TEST(CharBleu, ZeroFourGramPrecisionNamed) {
  const auto c = make_corpus({{"s", {"abcdef"}}});
  const auto r = char_bleu(make_hyps(c, {"abcxef"}), c, {}, kDefault);
  EXPECT_EQ(r.score, 0.0);
  ASSERT_EQ(r.precisions.size(), 4u);
  EXPECT_EQ(r.precisions[3].numerator, 0u);
  EXPECT_NE(std::find(r.diagnostics.begin(), r.diagnostics.end(), "P_4 = 0"), r.diagnostics.end());
}

TEST(CharBleu, EmptyHypothesesGiveZero) {
  const auto c = make_corpus({{"s", {"abc"}}, {"t", {"de"}}});
  const auto r = char_bleu(make_hyps(c, {"", ""}), c, {}, kDefault);
  EXPECT_EQ(r.score, 0.0);
  EXPECT_EQ(r.brevity.value, 0.0);
  EXPECT_FALSE(r.brevity.defined());
}

TEST(CharBleu, MatchesHandComputedValue) {
  // hyp "aab" vs ref "ab", max order 2: P1 = 2/3, P2 = 1/2, c = 3 > r = 2.
  const auto c = make_corpus({{"s", {"ab"}}});
  const auto r = char_bleu(make_hyps(c, {"aab"}), c, BleuConfig::uniform(2), kDefault);
  EXPECT_NEAR(r.score, std::sqrt(2.0 / 3.0 * 0.5), 1e-15);
  EXPECT_EQ(r.brevity.value, 1.0);
}

TEST(CharBleu, EqualsBruteForceOracle) {
  testing_support::CorpusGenerator gen(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto g = gen.corpus();
    for (std::size_t n : {1u, 2u, 4u}) {
      const auto r = char_bleu(g.hyps, g.corpus, BleuConfig::uniform(n), kDefault);
      EXPECT_NEAR(r.score, oracle::bleu(g.items, n), 1e-12) << "trial " << trial << " order " << n;
      for (std::size_t k = 1; k <= n; ++k) {
        const auto counts = oracle::precision_counts(g.items, k);
        EXPECT_EQ(r.precisions[k - 1].numerator, counts.numerator);
        EXPECT_EQ(r.precisions[k - 1].denominator, counts.denominator);
      }
    }
  }
}

TEST(BleuConfig, Validation) {
  EXPECT_THROW(BleuConfig::uniform(0), UsageError);
  EXPECT_THROW(BleuConfig::weighted({0.5, 0.4}), UsageError);
  EXPECT_THROW(BleuConfig::weighted({1.5, -0.5}), UsageError);
  const auto w = BleuConfig::weighted({0.25, 0.75});
  EXPECT_EQ(w.max_order, 2u);
  EXPECT_EQ(w.weight(2), 0.75);
  EXPECT_EQ(BleuConfig{}.weight(3), 0.25);
}

TEST(CharBleu, CustomWeights) {
  // P1 = 2/3, P2 = 1/2.
  const auto c = make_corpus({{"s", {"ab"}}});
  const auto r = char_bleu(make_hyps(c, {"aab"}), c, BleuConfig::weighted({0.25, 0.75}), kDefault);
  EXPECT_NEAR(r.score, std::exp(0.25 * std::log(2.0 / 3.0) + 0.75 * std::log(0.5)), 1e-15);
}

TEST(MpSentence, Examples) {
  EXPECT_EQ(mp_sentence("但是", "但是", kMp, kDefault), 1.0);
  EXPECT_EQ(mp_sentence("ab", "cd", kMp, kDefault), 0.0);
  EXPECT_NEAR(mp_sentence("ab", "abcd", kMp, kDefault), 0.5 / 0.925, 1e-12);
  EXPECT_EQ(mp_sentence("", "abc", kMp, kDefault), 0.0);
  EXPECT_EQ(mp_sentence("abc", "", kMp, kDefault), 0.0);
  EXPECT_THROW(mp_sentence("a", "a", MeaningPreservationConfig{1.0}, kDefault), UsageError);
  EXPECT_THROW(mp_sentence("a", "a", MeaningPreservationConfig{0.0}, kDefault), UsageError);
}

TEST(MpSentence, MultisetOverlapIgnoresOrder) {
  // m("aab", "abb") = min(2,1) + min(1,2) = 2.
  EXPECT_EQ(matched_characters(tokenize_chars("aab"), tokenize_chars("abb")), 2u);
  std::mt19937 rng(5);
  const std::u32string alphabet = U"但是这种想法，。ab";
  std::uniform_int_distribution<std::size_t> sym(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> len(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    std::u32string a(static_cast<std::size_t>(len(rng)), U' ');
    std::u32string b(static_cast<std::size_t>(len(rng)), U' ');
    for (auto& c : a) c = alphabet[sym(rng)];
    for (auto& c : b) c = alphabet[sym(rng)];
    const double s = mp_sentence(to_utf8(a), to_utf8(b), kMp, kDefault);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_EQ(mp_sentence(to_utf8(a), to_utf8(a), kMp, kDefault), 1.0);
    auto pa = a;
    auto pb = b;
    std::shuffle(pa.begin(), pa.end(), rng);
    std::shuffle(pb.begin(), pb.end(), rng);
    EXPECT_EQ(mp_sentence(to_utf8(pa), to_utf8(pb), kMp, kDefault), s);
  }
}

TEST(MpAverage, FlatMeanOverDistinctPairs) {
  const auto identical = make_corpus({{"ab", {"ab"}}, {"cd", {"cd"}}});
  EXPECT_EQ(mp_average(identical, kMp, kDefault), 1.0);

  const double s1 = mp_sentence("ab", "abcd", kMp, kDefault);
  const double s2 = mp_sentence("abcx", "abcd", kMp, kDefault);
  const auto one = make_corpus({{"abcd", {"ab", "abcx"}}});
  EXPECT_DOUBLE_EQ(mp_average(one, kMp, kDefault), (s1 + s2) / 2.0);

  const auto two = make_corpus({{"abcd", {"ab"}}, {"abcd", {"abcx"}}});
  EXPECT_DOUBLE_EQ(mp_average(two, kMp, kDefault), (s1 + s2) / 2.0);

  // Flat weighting: the 2-reference instance counts twice.
  const double s3 = mp_sentence("xyz", "abcd", kMp, kDefault);
  const auto uneven = make_corpus({{"abcd", {"ab", "abcx"}}, {"abcd", {"xyz"}}});
  EXPECT_DOUBLE_EQ(mp_average(uneven, kMp, kDefault), (s1 + s2 + s3) / 3.0);

  const auto duplicated = make_corpus({{"abcd", {"ab", "abcx", "ab "}}});
  EXPECT_EQ(mp_average(duplicated, kMp, kDefault), mp_average(one, kMp, kDefault));
}

TEST(MpPrime, Examples) {
  const auto c = make_corpus({{"abcd", {"abc"}}, {"但是好", {"但是很好"}}});
  const auto gold = mp_prime(make_hyps(c, {"abc", "但是很好"}), c, kMp, kDefault);
  EXPECT_EQ(gold.mp_prime, 0.0);

  const auto identity = mp_prime(make_hyps(c, {"abcd", "但是好"}), c, kMp, kDefault);
  EXPECT_EQ(identity.mp, 1.0);
  EXPECT_EQ(identity.mp_prime, std::abs(1.0 - identity.mp_average));
}

TEST(EvaluateSystem, ComposesAllMetrics) {
  const auto c = make_corpus({{"我去学校了昨天", {"我昨天去学校了"}},
                              {"他很高兴的说", {"他很高兴地说", "他高兴地说"}}});
  const auto identity = evaluate_system(make_hyps(c, {"我去学校了昨天", "他很高兴的说"}), c, {},
                                        kMp, kDefault);
  EXPECT_EQ(identity.acc_sen, 0.0);
  EXPECT_EQ(identity.mp, 1.0);

  EvalOptions opts;
  opts.per_sentence = true;
  const auto perfect = evaluate_system(make_hyps(c, {"我昨天去学校了", "他高兴地说"}), c, {},
                                       kMp, kDefault, opts);
  EXPECT_EQ(perfect.acc_sen, 1.0);
  EXPECT_EQ(perfect.bleu.score, 1.0);
  EXPECT_EQ(perfect.mp_prime, std::abs(perfect.mp - perfect.mp_average));
  ASSERT_TRUE(perfect.per_sentence.has_value());
  EXPECT_EQ(perfect.per_sentence->size(), 2u);
  EXPECT_EQ((*perfect.per_sentence)[1].closest_reference_length, 5u);
}

TEST(EvaluateSystem, AgreesWithStandaloneOperations) {
  testing_support::CorpusGenerator gen(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = gen.corpus();
    const auto report = evaluate_system(g.hyps, g.corpus, {}, kMp, kDefault, {3, false});
    EXPECT_EQ(report.acc_sen, corpus_accuracy(g.hyps, g.corpus, kDefault));
    EXPECT_EQ(report.bleu.score, char_bleu(g.hyps, g.corpus, {}, kDefault).score);
    const auto mp = mp_prime(g.hyps, g.corpus, kMp, kDefault);
    EXPECT_EQ(report.mp, mp.mp);
    EXPECT_EQ(report.mp_average, mp.mp_average);
    EXPECT_EQ(report.mp_prime, mp.mp_prime);
    const auto bp = brevity_penalty(g.hyps, g.corpus, kDefault);
    EXPECT_EQ(report.bleu.brevity.reference_length, bp.reference_length);
  }
}

TEST(EvaluateSystem, BoundsAndPermutationInvariance) {
  testing_support::CorpusGenerator gen(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = gen.corpus();
    const auto a = evaluate_system(g.hyps, g.corpus, {}, kMp, kDefault);
    EXPECT_GE(a.acc_sen, 0.0);
    EXPECT_LE(a.acc_sen, 1.0);
    EXPECT_GE(a.bleu.score, 0.0);
    EXPECT_LE(a.bleu.score, 1.0);

    auto instances = g.corpus.instances();
    std::reverse(instances.begin(), instances.end());
    const Corpus reversed(std::move(instances));
    const auto b = evaluate_system(g.hyps, reversed, {}, kMp, kDefault);
    EXPECT_DOUBLE_EQ(a.acc_sen, b.acc_sen);
    EXPECT_NEAR(a.bleu.score, b.bleu.score, 1e-15);
    EXPECT_NEAR(a.mp_prime, b.mp_prime, 1e-15);
  }
}

TEST(EvaluateSystem, DuplicateReferencesChangeNothing) {
  testing_support::CorpusGenerator gen(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = gen.corpus();
    auto instances = g.corpus.instances();
    for (auto& inst : instances) inst.references.push_back(inst.references.front());
    const Corpus doubled(std::move(instances));
    const auto a = evaluate_system(g.hyps, g.corpus, {}, kMp, kDefault);
    const auto b = evaluate_system(g.hyps, doubled, {}, kMp, kDefault);
    EXPECT_EQ(a.acc_sen, b.acc_sen);
    EXPECT_EQ(a.bleu.score, b.bleu.score);
    EXPECT_EQ(a.mp_average, b.mp_average);
  }
}

TEST(EvaluateSystem, ThreadCountDoesNotChangeResults) {
  testing_support::CorpusGenerator gen(8, {5, 8, 40, 3, 0});
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = gen.corpus();
    const auto one = evaluate_system(g.hyps, g.corpus, {}, kMp, kDefault, {1, true});
    const auto many = evaluate_system(g.hyps, g.corpus, {}, kMp, kDefault, {7, true});
    EXPECT_EQ(one.bleu.score, many.bleu.score);
    EXPECT_EQ(one.mp, many.mp);
    EXPECT_EQ(one.mp_average, many.mp_average);
  }
}

TEST(Metrics, FullWidthAndAsciiPunctuationDiffer) {
  const auto c = make_corpus({{"但是好", {"但是，好。"}}});
  const auto full = evaluate_system(make_hyps(c, {"但是，好。"}), c, {}, kMp, kDefault);
  const auto ascii = evaluate_system(make_hyps(c, {"但是,好."}), c, {}, kMp, kDefault);
  EXPECT_EQ(full.acc_sen, 1.0);
  EXPECT_EQ(ascii.acc_sen, 0.0);
  EXPECT_NE(full.bleu.score, ascii.bleu.score);
}

}  // namespace
}  // namespace cgec
