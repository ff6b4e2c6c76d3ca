#pragma once

// Small text helpers shared by every stage of the question pipeline.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace adsqa {

inline bool is_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
inline char lower_char(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string to_lower(std::string_view s);

// Lowercase, trim and collapse internal whitespace runs to one space.
std::string normalize_value(std::string_view s);

// Lowercase alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize_words(std::string_view s);

// "20k" -> 20000, "$2,000" -> 2000, "7.5K" -> 7500. The whole string must be
// consumed; a leading '$' is allowed.
std::optional<double> parse_number_literal(std::string_view s);

// Integral values print without a fraction ("7000"), others with up to six
// significant digits.
std::string format_number(double v);

// zero..twenty -> 0..20
std::optional<int> number_word_value(std::string_view word);

// Light plural stemmer (the S-stemmer: ies->y, es->e, s->"").
std::string stem(std::string_view word);

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  // One word per line; '#' starts a comment.
  static StopwordList load(const std::filesystem::path& file);

  bool contains(std::string_view word) const;
  size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

std::string read_file(const std::filesystem::path& file);

}  // namespace adsqa
