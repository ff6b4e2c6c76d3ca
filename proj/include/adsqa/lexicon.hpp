#pragma once

// Per-domain keyword trie: tagging, spelling/space correction and shorthand
// detection.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adsqa/corpus.hpp"
#include "adsqa/text.hpp"

namespace adsqa {

enum class IdKind {
  None,
  TypeIValue,
  TypeIIValue,
  TypeIIIAttribute,
  TypeIIINumber,
  Unit,
  ComparatorLess,
  ComparatorGreater,
  ComparatorEqual,
  Between,
  SuperlativeComplete,
  SuperlativePartial,
  Negation,
  And,
  Or,
};

std::string_view to_string(IdKind k);
std::optional<IdKind> id_kind_from_string(std::string_view s);

enum class Extreme { Min, Max };

struct Identifier {
  IdKind kind = IdKind::None;
  std::optional<std::string> attribute;
  // Lowercase keyword for trie entries; the numeric literal for numbers.
  std::string literal;
  // Spelling from the lexicon file (values) or the question (numbers).
  std::string display;
  std::optional<double> number;
  std::optional<Extreme> extreme;
  // Comparators only: "at most", "max" are inclusive.
  bool inclusive = false;

  bool same_meaning(const Identifier& o) const {
    return kind == o.kind && attribute == o.attribute && extreme == o.extreme &&
           inclusive == o.inclusive;
  }
};

// Short tag label in the style "TI", "TII", "TIII-CS", "TIII-PB", "TIII-CB".
std::string tag_label(const Identifier& id);

inline bool is_comparator(IdKind k) {
  return k == IdKind::ComparatorLess || k == IdKind::ComparatorGreater ||
         k == IdKind::ComparatorEqual;
}

// One row of the shared keyword table: synonyms mapped to an identifier kind.
struct IdentifierRow {
  std::vector<std::string> keywords;
  IdKind kind = IdKind::None;
  // Target attribute for complete superlatives and complete boundaries
  // ("cheapest" -> price). Resolved against each domain's schema.
  std::optional<std::string> attribute;
  std::optional<Extreme> extreme;
  bool inclusive = false;
};

struct IdentifierTable {
  std::vector<IdentifierRow> rows;

  static IdentifierTable parse(std::string_view json_text);
  static IdentifierTable load(const std::filesystem::path& file);
};

struct TrieNode {
  char value = 0;
  std::string label;
  std::map<char, std::unique_ptr<TrieNode>> children;
  std::optional<Identifier> identifier;
  bool is_keyword = false;

  const TrieNode* child(char c) const {
    auto it = children.find(c);
    return it == children.end() ? nullptr : it->second.get();
  }
};

class Trie {
 public:
  struct Match {
    size_t length = 0;  // characters consumed in the scanned text
    const TrieNode* node = nullptr;
  };

  // `dictionary` lists valid words that carry no condition ("car", "great");
  // correction leaves them alone.
  static Trie build(const DomainLexicon& lexicon, const DomainSchema& schema,
                    const IdentifierTable& identifiers, StopwordList stopwords,
                    StopwordList dictionary = {});

  const TrieNode& root() const { return *root_; }

  // Node reached by following `phrase` (lowercased, whitespace collapsed).
  const TrieNode* find_node(std::string_view phrase) const;
  // Identifier of a keyword phrase, or null.
  const Identifier* lookup(std::string_view phrase) const;

  // Longest keyword starting at `pos` that ends on a word boundary. A space in
  // a keyword matches any whitespace run in the text.
  std::optional<Match> longest_match(std::string_view text, size_t pos) const;

  // Keyword nodes in the subtree rooted at `node` (inclusive), in label order.
  std::vector<const TrieNode*> keywords_under(const TrieNode* node) const;

  const StopwordList& stopwords() const { return stopwords_; }
  const StopwordList& dictionary() const { return dictionary_; }
  // Type I and Type II lexicon values, used for shorthand detection.
  const std::vector<LexiconEntry>& values() const { return values_; }
  size_t node_count() const { return node_count_; }
  size_t keyword_count() const { return keyword_count_; }

 private:
  void insert(const std::string& phrase, Identifier id);

  std::unique_ptr<TrieNode> root_ = std::make_unique<TrieNode>();
  StopwordList stopwords_;
  StopwordList dictionary_;
  std::vector<LexiconEntry> values_;
  size_t node_count_ = 1;
  size_t keyword_count_ = 0;
};

struct TaggedToken {
  std::string surface;
  Identifier identifier;
  // [start, end) in the tagged text
  std::pair<size_t, size_t> span;
  bool stopword = false;
  // Set by negation detection.
  bool negated = false;
  // Explicit-Boolean segment the token belongs to (set by the Boolean stage).
  int segment = 0;

  IdKind kind() const { return identifier.kind; }
};

// Greedy longest-match scan, left to right. Unknown words are tagged None.
std::vector<TaggedToken> tag(std::string_view question, const Trie& trie);

// Drops stopwords and every token not recognized as a value, unit,
// comparator, superlative, negation or connective.
std::vector<TaggedToken> strip_nonessential(const std::vector<TaggedToken>& tokens);

// Tokens joined by single spaces; numbers are lowercased ("20K" -> "20k").
std::string simplified_text(const std::vector<TaggedToken>& tokens);

// Percentage similarity from recursively matched longest common substrings:
// 200 * common / (|a| + |b|). Symmetric; 0 when both are empty.
double text_similarity(std::string_view a, std::string_view b);

struct CorrectionEdit {
  enum class Kind { SpaceInserted, Substituted };
  Kind kind = Kind::Substituted;
  std::string original;
  std::string replacement;
  size_t position = 0;  // offset of the original word in the input
  double similarity = 100.0;
};

struct CorrectionReport {
  std::string text;
  std::vector<CorrectionEdit> edits;
  // Words the trie could not place and no candidate reached the threshold.
  std::vector<std::string> unrecognized;
};

constexpr double kDefaultCorrectionThreshold = 60.0;

CorrectionReport correct(std::string_view question, const Trie& trie,
                         double threshold = kDefaultCorrectionThreshold);

// Lowercase, separators (space, '-') removed, number words as digits.
std::string shorthand_key(std::string_view s);

// True iff, after normalization, one string is an ordered subsequence of the
// other.
bool is_shorthand(std::string_view candidate, std::string_view value);

// Subsequence test on already-normalized keys.
bool is_subsequence(std::string_view needle, std::string_view haystack);

}  // namespace adsqa
