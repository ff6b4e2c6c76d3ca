#pragma once

// Naive Bayes domain classifier with a burstiness-aware term model.
//
// Each (term, domain) pair models the per-question count of the term as a
// Beta-Binomial fit by method of moments. When the observed counts are not
// over-dispersed relative to a binomial, the term falls back to a binomial
// with the Laplace-smoothed multinomial rate, which is the zero-burstiness
// limit of the same family.

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace adsqa {

struct TermModel {
  // Beta-Binomial parameters; only meaningful when `bursty`.
  double alpha = 0;
  double beta = 0;
  // Laplace-smoothed rate used by the binomial fallback.
  double rate = 0;
  bool bursty = false;
  // Training statistics kept for serialization and inspection.
  double occurrences = 0;
  double documents = 0;
};

struct DomainModel {
  std::string domain;
  double prior = 0;
  double total_documents = 0;
  double total_tokens = 0;
  double mean_length = 0;
  // Rate given to terms outside the shared vocabulary.
  double unseen_rate = 0;
  std::map<std::string, TermModel> terms;
};

struct Classification {
  std::string domain;
  double posterior = 0;
  // Every domain's posterior, sorted by domain name.
  std::vector<std::pair<std::string, double>> posteriors;
};

class DomainClassifier {
 public:
  DomainClassifier() = default;

  static DomainClassifier train(const std::vector<std::pair<std::string, std::string>>& labeled);

  // log P(d|c): the sum over vocabulary terms of log P(count | length), plus
  // unseen-term contributions. An empty question contributes 0.
  double log_likelihood(std::string_view question, const DomainModel& model) const;

  Classification classify(std::string_view question) const;

  const std::vector<DomainModel>& models() const { return models_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  bool empty() const { return models_.empty(); }

  std::string to_json() const;
  static DomainClassifier from_json(std::string_view text);

  static std::vector<std::string> tokenize(std::string_view question);

 private:
  std::vector<DomainModel> models_;  // sorted by domain name
  std::vector<std::string> vocabulary_;
};

// log of the Beta-Binomial pmf P(x | n, alpha, beta).
double log_beta_binomial(int x, int n, double alpha, double beta);
// log of the binomial pmf P(x | n, p).
double log_binomial(int x, int n, double p);

}  // namespace adsqa
