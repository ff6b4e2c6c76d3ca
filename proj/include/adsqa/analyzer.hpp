#pragma once

// Typed selection conditions built from tagged tokens.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adsqa/corpus.hpp"
#include "adsqa/lexicon.hpp"

namespace adsqa {

enum class Comparator { Eq, Lt, Le, Gt, Ge, Between };

std::string_view to_string(Comparator c);

struct NumericRange {
  double low = 0;
  double high = 0;
  bool low_inclusive = true;
  bool high_inclusive = true;

  bool contains(double v) const {
    return (low_inclusive ? v >= low : v > low) && (high_inclusive ? v <= high : v < high);
  }
  bool operator==(const NumericRange&) const = default;
};

struct Condition {
  AttrType attr_type = AttrType::TypeI;
  // Absent only for a number whose attribute had to be inferred and stayed
  // ambiguous; `candidate_attributes` then lists the alternatives.
  std::optional<std::string> attribute;
  std::vector<std::string> candidate_attributes;
  Comparator comparator = Comparator::Eq;
  // Type I/II: the normalized lexicon phrase.
  std::string text;
  // Type III: the bound for Eq/Lt/Le/Gt/Ge, the interval for Between.
  double number = 0;
  NumericRange range;
  // Lexicon display form or the question's surface text.
  std::string display;
  bool negated = false;
  // Superlative conditions carry an extreme and no value.
  std::optional<Extreme> superlative;
  // Inclusive token indices the condition was built from.
  std::pair<size_t, size_t> tokens{0, 0};

  bool is_superlative() const { return superlative.has_value(); }
  bool is_numeric_filter() const { return attr_type == AttrType::TypeIII && !superlative; }
  // The attribute, or every candidate, as a list.
  std::vector<std::string> attributes() const;
  // "Price" or "{Price|Mileage}".
  std::string attribute_label() const;
  // Grouping key for numeric merging: attribute or the candidate set.
  std::string merge_key() const;
  // Interval accepted by a non-negated numeric filter other than Eq.
  NumericRange interval() const;

  bool operator==(const Condition&) const = default;
};

// Leaf rendering used in interpretations: "Toyota", "Price < 7000",
// "Price between [2000, 7000)", "MIN(Price)". Negation is not rendered here.
std::string describe(const Condition& c);

// Every Type III attribute whose valid range contains `value`, in schema
// order. Throws AnalysisError("value fits no attribute") when none does.
std::vector<std::string> infer_missing_attribute(double value, const Corpus& corpus);

// Builds conditions in question order from stripped tokens (negation flags
// already set). Connective and negation tokens are skipped, except an "and"
// joining the two numbers of a "between".
std::vector<Condition> extract_conditions(const std::vector<TaggedToken>& tokens, const Corpus& corpus);

// Categorical equality as used by the executor: normalized equality, or a
// shorthand in either direction that starts with the same character.
bool categorical_match(std::string_view wanted, std::string_view stored);

// Whether record `r` satisfies the (non-negated reading of the) condition.
// Superlatives are always satisfied here; they select rather than filter.
bool satisfies(const Condition& c, const Corpus& corpus, size_t r);

}  // namespace adsqa
