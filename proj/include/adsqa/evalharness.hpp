#pragma once

// Retrieval metrics, baseline rankers and the method comparison table.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "adsqa/boolean.hpp"
#include "adsqa/corpus.hpp"
#include "adsqa/ranking.hpp"

namespace adsqa {

double accuracy(const std::vector<std::string>& predictions, const std::vector<std::string>& labels);

struct PRF {
  double precision = 0;
  double recall = 0;
  double f = 0;
};

// Only the first 30 retrieved ids count.
PRF precision_recall_f(const std::vector<std::string>& retrieved, const std::set<std::string>& relevant);

struct JudgedCandidate {
  std::string record_id;
  int related = 0;
};

struct Judgment {
  std::string question;
  std::vector<JudgedCandidate> candidates;
};

using JudgmentSet = std::vector<Judgment>;

JudgmentSet parse_judgments(std::string_view jsonl);

// Mean over questions of (related among the first k) / k. Throws Error when a
// list is shorter than k.
double p_at_k(const JudgmentSet& judgments, size_t k);

// Mean of 1/r over questions, r being the position of the first related
// answer among the first five; 0 when there is none.
double mrr(const JudgmentSet& judgments);

template <class T>
std::vector<T> baseline_random(std::vector<T> candidates, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  return candidates;
}

// sqrt(satisfied / n): cosine between an all-ones vector and a 0/1 vector.
double baseline_cosine(size_t satisfied, size_t n);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// For every categorical value, the values of the other categorical attributes
// among the records holding it.
class Supertuples {
 public:
  static Supertuples build(const Corpus& corpus);

  // Mean Jaccard coefficient over the other categorical attributes; 1 for
  // equal values, 0 when either value is unknown.
  double vsim(std::string_view attribute, std::string_view a, std::string_view b) const;

  const std::map<std::string, std::set<std::string>>* find(std::string_view attribute,
                                                          std::string_view value) const;

 private:
  // attribute -> value -> other attribute -> values
  std::map<std::string, std::map<std::string, std::map<std::string, std::set<std::string>>>> tuples_;
};

// 1 - |q - a| / q; with q == 0 the term is 1 on equality and 0 otherwise.
double aimq_numeric(double q, double a);

// Weighted sum over the question conditions, each weighing 1/n.
double baseline_aimq(const std::vector<Condition>& question, const Corpus& corpus, size_t record,
                     const Supertuples& supertuples);

class TfIdf {
 public:
  // Each record, all its values joined, is one document.
  static TfIdf build(const Corpus& corpus);
  static TfIdf build(const std::vector<std::string>& documents);

  double score(std::string_view question, size_t document) const;
  size_t size() const { return docs_.size(); }

 private:
  std::map<std::string, double> weigh(std::string_view text) const;

  std::map<std::string, double> idf_;
  std::vector<std::map<std::string, double>> docs_;
  std::vector<double> norms_;
};

std::string record_text(const Corpus& corpus, size_t record);

struct MethodScores {
  std::string method;
  double p_at_1 = 0;
  double p_at_5 = 0;
  double mrr = 0;
};

inline const std::vector<std::string>& all_methods() {
  static const std::vector<std::string> m{"cqads", "random", "cosine", "aimq", "faqfinder"};
  return m;
}

// Turns a question into its Boolean expression.
using Interpreter = std::function<BoolExpr(const std::string&)>;

// Reorders every judged candidate list by each method's score and computes
// P@1, P@5 and MRR on the reordered labels. All methods see the same
// candidates.
std::vector<MethodScores> compare_methods(const JudgmentSet& judgments, const Corpus& corpus,
                                          const SimilarityStores& stores, const Interpreter& interpret,
                                          const std::vector<std::string>& methods, std::uint64_t seed);

// Score a record under the full question: N for an exact match, rank_sim for
// a single failed unit, otherwise the number of satisfied units.
double cqads_score(const BoolExpr& expr, const Corpus& corpus, size_t record, const SimilarityStores& stores);

std::string to_csv(const std::vector<MethodScores>& rows);

}  // namespace adsqa
