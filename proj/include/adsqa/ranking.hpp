#pragma once

// Similarity stores (query-log value matrix, word-correlation matrix, numeric
// ranges) and scoring of partially matched answers.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adsqa/corpus.hpp"
#include "adsqa/engine.hpp"
#include "adsqa/text.hpp"

namespace adsqa {

struct TIFeatures {
  double mod = 0;
  double time = 0;
  double ad_time = 0;
  double rank = 0;
  double click = 0;

  double sum() const { return mod + time + ad_time + rank + click; }
  bool operator==(const TIFeatures&) const = default;
};

// Raw per-pair statistics gathered from a query log before normalization.
struct TIPairStats {
  double rewrites = 0;
  double gap_total = 0;
  double gap_count = 0;
  double dwell_total = 0;
  double rank_total = 0;
  double clicks = 0;
};

class TIMatrix {
 public:
  // Type I values found in `text`, as (attribute, normalized value), longest
  // phrase first at each position.
  static std::vector<std::pair<std::string, std::string>> values_in(std::string_view text,
                                                                    const DomainLexicon& lexicon);

  static TIMatrix build(const std::vector<QueryLogSession>& sessions, const Corpus& corpus);

  // Zero features for unknown pairs and for A == B.
  TIFeatures features(std::string_view attribute, std::string_view a, std::string_view b) const;
  double ti_sim(std::string_view attribute, std::string_view a, std::string_view b) const;
  // ti_sim divided by the largest ti_sim in the matrix; 0 for an empty matrix.
  double normalized(std::string_view attribute, std::string_view a, std::string_view b) const;

  double max_ti_sim() const { return max_ti_sim_; }
  size_t size() const { return cells_.size(); }
  const std::map<std::string, TIFeatures>& cells() const { return cells_; }

  std::string to_json() const;
  static TIMatrix from_json(std::string_view text);

  static std::string key(std::string_view attribute, std::string_view a, std::string_view b);

 private:
  std::map<std::string, TIFeatures> cells_;
  double max_ti_sim_ = 0;
};

class WSMatrix {
 public:
  // Stemmed, lowercase, stopword-free words of `text`, in order.
  static std::vector<std::string> words_of(std::string_view text, const StopwordList& stopwords);

  static WSMatrix build(const std::vector<std::string>& documents, const StopwordList& stopwords);

  // Raw correlation. The diagonal is the largest value in the word's row.
  double correlation(std::string_view a, std::string_view b) const;

  // Mean over the words of `t` of the best normalized correlation with any
  // word of `v`. Both phrases go through words_of first.
  double feat_sim(std::string_view t, std::string_view v) const;

  double max_value() const { return max_; }
  size_t vocabulary_size() const { return rows_.size(); }

  std::string to_json() const;
  static WSMatrix from_json(std::string_view text, StopwordList stopwords);

 private:
  std::map<std::string, std::map<std::string, double>> rows_;
  double max_ = 0;
  StopwordList stopwords_;
};

// Mean of the ten largest values minus mean of the ten smallest; 1 when they
// coincide. Throws Error("range unavailable") on no values.
double attribute_range(std::vector<double> values);

// 1 - |t - v| / range, never below 0.
double num_sim(double t, double v, double range);

inline double rank_sim(size_t n, double s) { return static_cast<double>(n) - 1.0 + s; }

struct SimilarityStores {
  TIMatrix ti;
  WSMatrix ws;
  std::map<std::string, double> ranges;  // Type III attribute -> range

  static SimilarityStores build(const Corpus& corpus, const std::vector<QueryLogSession>& sessions,
                                const std::vector<std::string>& documents, const StopwordList& stopwords);
};

struct Similarity {
  double value = 0;
  // "TI_Sim on Make", "Feat_Sim on Color", "Num_Sim on Price", or "none".
  std::string measure = "none";
};

// Similarity between the condition a record failed and the record's own
// value. A numeric range is compared through its point closest to the record
// value; an OR unit takes its best branch; a negated unit scores 0.
Similarity dropped_similarity(const BoolExpr& dropped, const Corpus& corpus, size_t record,
                              const SimilarityStores& stores);

struct RankedAnswer {
  MatchResult match;
  double score = 0;
  std::string measure;
};

// One entry per record (its best score), by score descending then record id.
// A one-condition question keeps only records with nonzero similarity.
std::vector<RankedAnswer> rank_partials(const std::vector<MatchResult>& partials, const Corpus& corpus,
                                        const SimilarityStores& stores);

// Exact answers first (score = their condition count), then partials, capped.
std::vector<RankedAnswer> merge_answers(const std::vector<MatchResult>& exact,
                                        const std::vector<RankedAnswer>& partials, size_t cap);

}  // namespace adsqa
