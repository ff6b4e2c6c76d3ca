#include "adsqa/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "adsqa/errors.hpp"
#include "adsqa/text.hpp"

namespace adsqa {

using nlohmann::json;

namespace {

double log_choose(int n, int x) {
  return std::lgamma(n + 1.0) - std::lgamma(x + 1.0) - std::lgamma(n - x + 1.0);
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Smallest intra-class correlation accepted from a moment fit; below this the
// Beta-Binomial is numerically a binomial anyway.
constexpr double kMinCorrelation = 1e-6;
constexpr double kMaxCorrelation = 0.999;

}  // namespace

double log_beta_binomial(int x, int n, double alpha, double beta) {
  return log_choose(n, x) + log_beta(x + alpha, n - x + beta) - log_beta(alpha, beta);
}

double log_binomial(int x, int n, double p) {
  double out = log_choose(n, x);
  if (x > 0) out += x * std::log(p);
  if (n - x > 0) out += (n - x) * std::log1p(-p);
  return out;
}

std::vector<std::string> DomainClassifier::tokenize(std::string_view question) {
  return tokenize_words(question);
}

DomainClassifier DomainClassifier::train(
    const std::vector<std::pair<std::string, std::string>>& labeled) {
  std::map<std::string, std::vector<std::vector<std::string>>> by_domain;
  std::set<std::string> vocab;
  for (const auto& [text, domain] : labeled) {
    if (domain.empty()) throw ClassifierError("training example with empty domain label");
    auto toks = tokenize(text);
    vocab.insert(toks.begin(), toks.end());
    by_domain[domain].push_back(std::move(toks));
  }
  if (by_domain.empty()) throw ClassifierError("no training examples");
  for (const auto& [domain, docs] : by_domain) {
    size_t tokens = 0;
    for (const auto& d : docs) tokens += d.size();
    if (tokens == 0) {
      throw ClassifierError(fmt::format("domain '{}' has no usable training text", domain));
    }
  }

  DomainClassifier clf;
  clf.vocabulary_.assign(vocab.begin(), vocab.end());
  const double vocab_size = static_cast<double>(vocab.size());
  const double total_docs = static_cast<double>(labeled.size());

  for (const auto& [domain, docs] : by_domain) {
    DomainModel m;
    m.domain = domain;
    m.total_documents = static_cast<double>(docs.size());
    m.prior = m.total_documents / total_docs;

    std::vector<std::unordered_map<std::string, int>> counts(docs.size());
    std::unordered_map<std::string, double> occurrences;
    for (size_t i = 0; i < docs.size(); ++i) {
      for (const auto& t : docs[i]) {
        ++counts[i][t];
        occurrences[t] += 1;
      }
      m.total_tokens += static_cast<double>(docs[i].size());
    }
    m.mean_length = m.total_tokens / m.total_documents;
    m.unseen_rate = 1.0 / (m.total_tokens + vocab_size);

    for (const auto& w : clf.vocabulary_) {
      TermModel tm;
      auto occ_it = occurrences.find(w);
      tm.occurrences = occ_it == occurrences.end() ? 0.0 : occ_it->second;
      tm.rate = (tm.occurrences + 1.0) / (m.total_tokens + vocab_size);
      if (tm.occurrences > 0) {
        double mean = tm.occurrences / m.total_documents;
        double var = 0;
        for (const auto& c : counts) {
          auto it = c.find(w);
          double x = it == c.end() ? 0.0 : it->second;
          if (x > 0) tm.documents += 1;
          var += (x - mean) * (x - mean);
        }
        var /= m.total_documents;
        const double n = m.mean_length;
        const double binomial_var = mean * (1.0 - mean / n);
        const double p = mean / n;
        if (n > 1.0 && p > 0.0 && p < 1.0 && var > binomial_var * (1.0 + 1e-12)) {
          double rho = (var / (n * p * (1.0 - p)) - 1.0) / (n - 1.0);
          rho = std::clamp(rho, kMinCorrelation, kMaxCorrelation);
          const double concentration = (1.0 - rho) / rho;
          tm.alpha = p * concentration;
          tm.beta = (1.0 - p) * concentration;
          tm.bursty = true;
        }
      }
      m.terms.emplace(w, tm);
    }
    clf.models_.push_back(std::move(m));
  }
  return clf;
}

double DomainClassifier::log_likelihood(std::string_view question, const DomainModel& model) const {
  auto toks = tokenize(question);
  if (toks.empty()) return 0.0;
  const int n = static_cast<int>(toks.size());
  std::unordered_map<std::string, int> counts;
  for (const auto& t : toks) ++counts[t];

  double ll = 0.0;
  for (const auto& [term, tm] : model.terms) {
    auto it = counts.find(term);
    const int x = it == counts.end() ? 0 : it->second;
    ll += tm.bursty ? log_beta_binomial(x, n, tm.alpha, tm.beta) : log_binomial(x, n, tm.rate);
  }
  for (const auto& [term, x] : counts) {
    if (!model.terms.count(term)) ll += log_binomial(x, n, model.unseen_rate);
  }
  return ll;
}

Classification DomainClassifier::classify(std::string_view question) const {
  if (models_.empty()) throw ClassifierError("classifier not initialized");
  std::vector<double> scores;
  scores.reserve(models_.size());
  for (const auto& m : models_) scores.push_back(std::log(m.prior) + log_likelihood(question, m));
  const double peak = *std::max_element(scores.begin(), scores.end());
  double z = 0;
  for (double s : scores) z += std::exp(s - peak);

  Classification out;
  size_t best = 0;
  for (size_t i = 0; i < models_.size(); ++i) {
    out.posteriors.emplace_back(models_[i].domain, std::exp(scores[i] - peak) / z);
    // models_ are sorted by name, so strict > keeps the lexicographically first on ties
    if (scores[i] > scores[best]) best = i;
  }
  out.domain = models_[best].domain;
  out.posterior = out.posteriors[best].second;
  return out;
}

std::string DomainClassifier::to_json() const {
  json models = json::array();
  for (const auto& m : models_) {
    json terms = json::object();
    for (const auto& [w, t] : m.terms) {
      terms[w] = {{"alpha", t.alpha},     {"beta", t.beta},
                  {"rate", t.rate},       {"bursty", t.bursty},
                  {"occurrences", t.occurrences}, {"documents", t.documents}};
    }
    models.push_back({{"domain", m.domain},
                      {"prior", m.prior},
                      {"total_documents", m.total_documents},
                      {"total_tokens", m.total_tokens},
                      {"mean_length", m.mean_length},
                      {"unseen_rate", m.unseen_rate},
                      {"terms", terms}});
  }
  return json{{"vocabulary", vocabulary_}, {"models", models}}.dump();
}

DomainClassifier DomainClassifier::from_json(std::string_view text) {
  DomainClassifier clf;
  try {
    json j = json::parse(text);
    clf.vocabulary_ = j.at("vocabulary").get<std::vector<std::string>>();
    for (const auto& mj : j.at("models")) {
      DomainModel m;
      m.domain = mj.at("domain").get<std::string>();
      m.prior = mj.at("prior").get<double>();
      m.total_documents = mj.at("total_documents").get<double>();
      m.total_tokens = mj.at("total_tokens").get<double>();
      m.mean_length = mj.at("mean_length").get<double>();
      m.unseen_rate = mj.at("unseen_rate").get<double>();
      for (const auto& [w, tj] : mj.at("terms").items()) {
        TermModel t;
        t.alpha = tj.at("alpha").get<double>();
        t.beta = tj.at("beta").get<double>();
        t.rate = tj.at("rate").get<double>();
        t.bursty = tj.at("bursty").get<bool>();
        t.occurrences = tj.at("occurrences").get<double>();
        t.documents = tj.at("documents").get<double>();
        m.terms.emplace(w, t);
      }
      clf.models_.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw ClassifierError(fmt::format("classifier model: {}", e.what()));
  }
  std::sort(clf.models_.begin(), clf.models_.end(),
            [](const DomainModel& a, const DomainModel& b) { return a.domain < b.domain; });
  return clf;
}

}  // namespace adsqa
