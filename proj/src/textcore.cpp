#include "cgec/textcore.hpp"

#include <algorithm>
#include <memory>

#include <unicode/errorcode.h>
#include <unicode/normalizer2.h>
#include <unicode/bytestream.h>

namespace cgec {

namespace {

// Decodes one scalar starting at text[pos]. Returns false on ill-formed input.
bool decode_one(std::string_view text, std::size_t& pos, char32_t& out) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) {
    out = lead;
    ++pos;
    return true;
  }
  std::size_t extra = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
    min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
    min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
    min = 0x10000;
  } else {
    return false;
  }
  if (pos + extra >= text.size()) return false;
  for (std::size_t i = 1; i <= extra; ++i) {
    const unsigned char b = byte(pos + i);
    if ((b & 0xC0) != 0x80) return false;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
  out = cp;
  pos += extra + 1;
  return true;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = 0;
    if (!decode_one(text, pos, cp)) {
      throw DataError("ill-formed UTF-8 at byte offset " + std::to_string(pos));
    }
    out.push_back(cp);
  }
  return out;
}

std::u32string compose_nfc(const std::u32string& chars) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw std::runtime_error(std::string("ICU NFC unavailable: ") + u_errorName(status));
  }
  const std::string utf8 = to_utf8(chars);
  std::string composed;
  icu::StringByteSink<std::string> sink(&composed);
  nfc->normalizeUTF8(0, icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())), sink,
                     nullptr, status);
  if (U_FAILURE(status)) {
    throw std::runtime_error(std::string("NFC normalization failed: ") + u_errorName(status));
  }
  return decode(composed);
}

}  // namespace

bool is_unicode_whitespace(char32_t cp) noexcept {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::string normalize(std::string_view text, const NormalizationPolicy& policy) {
  std::u32string chars = decode(text);

  if (policy.trim_surrounding_whitespace) {
    const auto first = std::find_if_not(chars.begin(), chars.end(), is_unicode_whitespace);
    const auto last = std::find_if_not(chars.rbegin(), std::make_reverse_iterator(first),
                                       is_unicode_whitespace).base();
    chars = std::u32string(first, last);
  }

  if (policy.unify_line_endings) {
    std::u32string unified;
    unified.reserve(chars.size());
    for (std::size_t i = 0; i < chars.size(); ++i) {
      if (chars[i] == U'\r') {
        if (i + 1 < chars.size() && chars[i + 1] == U'\n') ++i;
        unified.push_back(U'\n');
      } else {
        unified.push_back(chars[i]);
      }
    }
    chars = std::move(unified);
  }

  if (policy.apply_canonical_composition) chars = compose_nfc(chars);

  if (policy.strip_internal_whitespace) {
    const auto removed = std::erase_if(chars, is_unicode_whitespace);
    // Removing whitespace can bring a base and a combining mark together.
    if (removed && policy.apply_canonical_composition) chars = compose_nfc(chars);
  }

  return to_utf8(chars);
}

CharSequence::CharSequence(std::u32string chars) : chars_(std::move(chars)) {
  for (char32_t cp : chars_) {
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      throw DataError("code point is not a Unicode scalar value");
    }
  }
}

CharSequence tokenize_chars(std::string_view text) { return CharSequence(decode(text)); }

std::string to_utf8(std::u32string_view chars) {
  std::string out;
  out.reserve(chars.size() * 3);
  for (char32_t cp : chars) append_utf8(out, cp);
  return out;
}

NGramMultiset::NGramMultiset(std::size_t order) : order_(order) {
  if (order == 0) throw UsageError("n-gram order must be at least 1");
}

std::size_t NGramMultiset::count(const Key& key) const {
  const auto it = counts_.find(key);
  return it == counts_.end() ? 0 : it->second;
}

void NGramMultiset::add(Key key, std::size_t times) {
  if (key.size() != order_) {
    throw UsageError("n-gram of length " + std::to_string(key.size()) +
                     " added to multiset of order " + std::to_string(order_));
  }
  if (times == 0) return;
  counts_[std::move(key)] += times;
  total_ += times;
}

NGramMultiset extract_ngrams(const CharSequence& seq, std::size_t order) {
  NGramMultiset bag(order);
  const auto& chars = seq.chars();
  if (chars.size() < order) return bag;
  for (std::size_t i = 0; i + order <= chars.size(); ++i) {
    bag.add(chars.substr(i, order));
  }
  return bag;
}

std::size_t clipped_match(const NGramMultiset& candidate,
                          std::span<const NGramMultiset> references) {
  if (references.empty()) throw UsageError("clipped_match needs at least one reference");
  for (const auto& ref : references) {
    if (ref.order() != candidate.order()) {
      throw UsageError("clipped_match over multisets of different orders");
    }
  }
  std::size_t matched = 0;
  for (const auto& [key, count] : candidate.counts()) {
    std::size_t best = 0;
    for (const auto& ref : references) best = std::max(best, ref.count(key));
    matched += std::min(count, best);
  }
  return matched;
}

}  // namespace cgec
