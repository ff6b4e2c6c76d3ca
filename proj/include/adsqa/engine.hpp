#pragma once

// Query planning, SQL rendering, staged execution, the substring index and
// N-1 relaxation.

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "adsqa/boolean.hpp"
#include "adsqa/corpus.hpp"

namespace adsqa {

constexpr size_t kDefaultAnswerCap = 30;
constexpr size_t kDefaultRelaxThreshold = 5;

struct QueryPlan {
  // Leaves of the overlay bucketed by attribute type, in question order.
  std::vector<Condition> stage1;
  std::vector<Condition> stage2;
  std::vector<Condition> stage3;
  // Superlatives, applied last to the filtered records.
  std::vector<Condition> stage4;
  // Filtering expression without superlatives; absent for a question made
  // only of superlatives.
  std::optional<BoolExpr> overlay;
  // True when the overlay is a single leaf or an AND of leaves, so the
  // stages can be applied one after the other.
  bool conjunctive = true;
  size_t answer_cap = kDefaultAnswerCap;
};

QueryPlan plan(const BoolExpr& expr, size_t answer_cap = kDefaultAnswerCap);

// ANSI-style SELECT with one nested IN sub-select per condition. `relaxed`
// joins the sub-selects with OR.
std::string to_sql(const QueryPlan& p, const DomainSchema& schema, bool relaxed = false);

// Trigram postings over every categorical value, plus a per-attribute value
// dictionary for shorthand matches.
class SubstringIndex {
 public:
  static SubstringIndex build(const Corpus& corpus, size_t gram = 3);

  // Lowercase substrings of length `gram`; a shorter value is its own key.
  static std::vector<std::string> keys_of(std::string_view value, size_t gram = 3);

  // Records (ascending) whose value of `attr` matches `wanted` under
  // categorical_match.
  std::vector<size_t> lookup(size_t attr, std::string_view wanted) const;

  size_t gram() const { return gram_; }
  size_t key_count() const;
  std::string to_json() const;

 private:
  size_t gram_ = 3;
  // per attribute: key -> ascending record positions
  std::vector<std::unordered_map<std::string, std::vector<size_t>>> postings_;
  // per attribute: distinct value -> ascending record positions
  std::vector<std::unordered_map<std::string, std::vector<size_t>>> values_;
};

enum class MatchKind { Exact, Partial };

std::string_view to_string(MatchKind k);

struct MatchResult {
  size_t record = 0;  // position in the corpus
  std::string record_id;
  MatchKind kind = MatchKind::Exact;
  // Units of the conjunctive term the record was matched against.
  size_t conditions = 0;
  size_t satisfied = 0;
  // The unit left out, for partial matches.
  std::optional<BoolExpr> dropped;
};

// Every record satisfying the overlay, superlatives applied, ascending and
// uncapped. `index` only narrows the candidates; results are identical.
std::vector<size_t> matching_records(const QueryPlan& p, const Corpus& corpus,
                                     const SubstringIndex* index = nullptr);

// Exact answers capped at the plan's answer_cap, in corpus order.
std::vector<MatchResult> execute(const QueryPlan& p, const Corpus& corpus,
                                 const SubstringIndex* index = nullptr);

// The overlay as a disjunction of conjunctive terms. Each unit is a leaf, a
// negated leaf, or an OR of those. At most `max_terms` terms are kept.
std::vector<std::vector<BoolExpr>> conjunctive_terms(const BoolExpr& overlay, size_t max_terms = 64);

// For each term and each unit in it: records satisfying every other unit but
// not the dropped one, excluding `exact`. A one-unit term yields every record
// failing it (similarity matching decides which survive). Superlatives play
// no part.
std::vector<MatchResult> relax_n_minus_1(const QueryPlan& p, const Corpus& corpus,
                                         const std::vector<size_t>& exact);

}  // namespace adsqa
