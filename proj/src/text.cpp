#include "adsqa/text.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "adsqa/errors.hpp"

namespace adsqa {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = lower_char(c);
  return out;
}

std::string normalize_value(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(lower_char(c));
  }
  return out;
}

std::vector<std::string> tokenize_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (is_alnum(c)) {
      cur.push_back(lower_char(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::optional<double> parse_number_literal(std::string_view s) {
  size_t i = 0;
  if (i < s.size() && s[i] == '$') ++i;
  if (i >= s.size() || !is_digit(s[i])) return std::nullopt;
  std::string digits;
  bool seen_dot = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (is_digit(c)) {
      digits.push_back(c);
    } else if (c == ',' && !seen_dot && i + 1 < s.size() && is_digit(s[i + 1])) {
      continue;
    } else if (c == '.' && !seen_dot && i + 1 < s.size() && is_digit(s[i + 1])) {
      seen_dot = true;
      digits.push_back('.');
    } else {
      break;
    }
  }
  double multiplier = 1.0;
  if (i < s.size() && (s[i] == 'k' || s[i] == 'K')) {
    multiplier = 1000.0;
    ++i;
  }
  if (i != s.size()) return std::nullopt;
  return std::stod(digits) * multiplier;
}

std::string format_number(double v) {
  if (std::isfinite(v) && std::floor(v) == v && std::fabs(v) < 1e15) {
    return fmt::format("{}", static_cast<long long>(v));
  }
  return fmt::format("{:.6g}", v);
}

std::optional<int> number_word_value(std::string_view word) {
  static constexpr std::string_view kWords[] = {
      "zero",    "one",     "two",       "three",    "four",    "five",    "six",
      "seven",   "eight",   "nine",      "ten",      "eleven",  "twelve",  "thirteen",
      "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};
  std::string lw = to_lower(word);
  for (int i = 0; i < static_cast<int>(std::size(kWords)); ++i) {
    if (kWords[i] == lw) return i;
  }
  return std::nullopt;
}

std::string stem(std::string_view word) {
  std::string w = to_lower(word);
  auto ends_with = [&](std::string_view suf) {
    return w.size() >= suf.size() && w.compare(w.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (w.size() > 3 && ends_with("ies") && !ends_with("eies") && !ends_with("aies")) {
    w.replace(w.size() - 3, 3, "y");
  } else if (w.size() > 3 && ends_with("es") && !ends_with("aes") && !ends_with("ees") &&
             !ends_with("oes")) {
    w.pop_back();
  } else if (w.size() > 2 && ends_with("s") && !ends_with("us") && !ends_with("ss")) {
    w.pop_back();
  }
  return w;
}

StopwordList StopwordList::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw CorpusError(fmt::format("cannot open stopword file {}", file.string()));
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string w = normalize_value(line);
    if (!w.empty()) words.insert(std::move(w));
  }
  return StopwordList(std::move(words));
}

bool StopwordList::contains(std::string_view word) const {
  return words_.count(to_lower(word)) > 0;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CorpusError(fmt::format("cannot open {}", file.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace adsqa
