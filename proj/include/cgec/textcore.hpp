#pragma once

// Character-level text machinery shared by every metric: UTF-8 decoding into
// Unicode scalar values, the normalization policy applied before comparison,
// and counted n-gram bags with reference clipping.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

namespace cgec {

/// Raised when a caller violates an operation's preconditions.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when input data is malformed (bad UTF-8, bad records, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NormalizationPolicy {
  bool trim_surrounding_whitespace = true;
  bool unify_line_endings = true;
  bool apply_canonical_composition = false;
  bool strip_internal_whitespace = false;

  friend bool operator==(const NormalizationPolicy&, const NormalizationPolicy&) = default;
};

/// Applies, in order: trim, CRLF/CR -> LF, NFC, internal whitespace removal.
/// Idempotent for every policy. Throws DataError on ill-formed UTF-8.
std::string normalize(std::string_view text, const NormalizationPolicy& policy);

/// True for code points carrying the Unicode White_Space property.
bool is_unicode_whitespace(char32_t cp) noexcept;

/// A sentence as Unicode scalar values. One element per scalar; full-width
/// punctuation, ideographs and ASCII all count as one character.
class CharSequence {
 public:
  CharSequence() = default;
  explicit CharSequence(std::u32string chars);

  const std::u32string& chars() const noexcept { return chars_; }
  std::size_t length() const noexcept { return chars_.size(); }
  bool empty() const noexcept { return chars_.empty(); }
  char32_t operator[](std::size_t i) const { return chars_[i]; }

  friend bool operator==(const CharSequence&, const CharSequence&) = default;

 private:
  std::u32string chars_;
};

/// Decodes UTF-8 into scalar values. Rejects overlong forms, surrogates,
/// out-of-range values and truncated sequences with DataError.
CharSequence tokenize_chars(std::string_view text);

/// Encodes scalar values back to UTF-8.
std::string to_utf8(std::u32string_view chars);

/// Counted bag of n-grams of a fixed order. Keys are tuples of scalars held
/// as u32string, never re-joined UTF-8 text.
class NGramMultiset {
 public:
  using Key = std::u32string;
  using Counts = std::unordered_map<Key, std::size_t>;

  explicit NGramMultiset(std::size_t order);

  std::size_t order() const noexcept { return order_; }
  std::size_t total() const noexcept { return total_; }
  const Counts& counts() const noexcept { return counts_; }
  std::size_t count(const Key& key) const;
  bool empty() const noexcept { return total_ == 0; }

  void add(Key key, std::size_t times = 1);

  friend bool operator==(const NGramMultiset&, const NGramMultiset&) = default;

 private:
  std::size_t order_;
  std::size_t total_ = 0;
  Counts counts_;
};

/// Sliding-window n-grams with multiplicity. Empty when seq is shorter than
/// order. order == 0 throws UsageError.
NGramMultiset extract_ngrams(const CharSequence& seq, std::size_t order);

/// Sum over candidate n-grams of min(candidate count, max reference count).
/// references must be non-empty and share the candidate's order.
std::size_t clipped_match(const NGramMultiset& candidate,
                          std::span<const NGramMultiset> references);

}  // namespace cgec
