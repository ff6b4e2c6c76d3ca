#pragma once

// Implicit and explicit Boolean interpretation of extracted conditions.

#include <optional>
#include <string>
#include <vector>

#include "adsqa/analyzer.hpp"
#include "adsqa/lexicon.hpp"

namespace adsqa {

struct BoolExpr {
  enum class Kind { Leaf, Not, And, Or };

  Kind kind = Kind::Leaf;
  // Leaf only. Conditions inside a tree never carry `negated`; negation is
  // expressed by a Not node.
  Condition condition;
  std::vector<BoolExpr> children;

  static BoolExpr leaf(Condition c);
  // Not(leaf(c)).
  static BoolExpr negation(Condition c);
  // A Leaf for a plain condition, a Not for a negated one.
  static BoolExpr from_condition(Condition c);
  // Flattens nested nodes of the same kind; a single child is returned as is.
  static BoolExpr all_of(std::vector<BoolExpr> parts);
  static BoolExpr any_of(std::vector<BoolExpr> parts);

  // Smallest token index of any leaf, used for question-order rendering.
  size_t position() const;

  bool operator==(const BoolExpr&) const = default;
};

// Throws Error when a Not does not wrap exactly one Leaf or an And/Or has
// fewer than two children.
void validate(const BoolExpr& e);

// "(Toyota AND Corolla) OR (silver AND NOT manual)". Compound children are
// parenthesized.
std::string to_string(const BoolExpr& e);

std::vector<const Condition*> leaves(const BoolExpr& e);

template <class Pred>
bool evaluate(const BoolExpr& e, const Pred& leaf_true) {
  switch (e.kind) {
    case BoolExpr::Kind::Leaf: return leaf_true(e.condition);
    case BoolExpr::Kind::Not: return !evaluate(e.children.front(), leaf_true);
    case BoolExpr::Kind::And:
      for (const auto& c : e.children) {
        if (!evaluate(c, leaf_true)) return false;
      }
      return true;
    case BoolExpr::Kind::Or:
      for (const auto& c : e.children) {
        if (evaluate(c, leaf_true)) return true;
      }
      return false;
  }
  return false;
}

// Marks the first condition-bearing token after each negation keyword.
// Throws AnalysisError("dangling negation") if none follows.
void detect_negation(std::vector<TaggedToken>& tokens);

// Same Type I/II attribute, both plain equalities, different values.
bool mutually_exclusive(const Condition& a, const Condition& b, const DomainSchema& schema);

// Merges numeric conditions on one attribute (or one candidate set):
// negated bounds are complemented, bounds intersected. Negated equalities and
// negated ranges pass through unchanged. Throws ContradictionError when the
// bounds cannot overlap.
std::vector<Condition> combine_type3(const std::vector<Condition>& same_attribute);

// Applies combine_type3 to each attribute's numeric conditions inside each
// stretch of the question between Type I values.
std::vector<Condition> merge_type3(const std::vector<Condition>& conditions);

// A flat OR when the question is a list of single conditions separated only
// by OR; nullopt when the implicit rules must decide.
std::optional<BoolExpr> normalize_explicit(const std::vector<TaggedToken>& tokens,
                                           const std::vector<Condition>& conditions);

BoolExpr interpret_implicit(const std::vector<Condition>& conditions, const DomainSchema& schema);

// Full Boolean stage: explicit normalization, numeric merging, implicit rules.
// Throws AnalysisError("no conditions extracted") on an empty list.
BoolExpr interpret(const std::vector<TaggedToken>& tokens, const std::vector<Condition>& conditions,
                   const DomainSchema& schema);

}  // namespace adsqa
