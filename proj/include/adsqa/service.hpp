#pragma once

// End-to-end question answering over loaded domains, the answer envelope, and
// the HTTP front end.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adsqa/boolean.hpp"
#include "adsqa/classifier.hpp"
#include "adsqa/corpus.hpp"
#include "adsqa/engine.hpp"
#include "adsqa/lexicon.hpp"
#include "adsqa/ranking.hpp"

namespace adsqa {

struct ServiceOptions {
  size_t answer_cap = kDefaultAnswerCap;
  // Relaxation runs when fewer exact answers than this are found.
  size_t relax_threshold = kDefaultRelaxThreshold;
  double correction_threshold = kDefaultCorrectionThreshold;
};

struct DomainRuntime {
  Corpus corpus;
  Trie trie;
  SubstringIndex index;
  SimilarityStores stores;
};

struct AnswerRow {
  std::string record_id;
  MatchKind kind = MatchKind::Exact;
  double score = 0;
  std::string measure;
  // Rendered dropped unit for partial answers.
  std::string dropped;
  std::vector<std::pair<std::string, std::string>> values;
};

struct AnswerEnvelope {
  std::string question;
  std::string corrected;
  std::vector<CorrectionEdit> corrections;
  std::vector<std::string> unrecognized;
  std::string domain;
  double posterior = 1;
  bool domain_forced = false;
  std::vector<std::pair<std::string, double>> posteriors;
  // Essential tokens only.
  std::vector<TaggedToken> tags;
  std::vector<std::string> conditions;
  std::string interpretation;
  std::string sql;
  std::string relaxed_sql;
  std::vector<AnswerRow> answers;
  // Set for a contradiction or an explain run with nothing to interpret.
  std::string message;
  bool executed = false;
  bool relaxation_triggered = false;
  size_t exact_count = 0;
  size_t partial_count = 0;
  std::map<std::string, double> timing_ms;

  std::string to_json(bool include_timing = true) const;
};

class Service {
 public:
  Service(ServiceOptions options, IdentifierTable identifiers, StopwordList stopwords, StopwordList dictionary);

  // Shared files at the top of `data_dir`, one subdirectory per domain holding
  // schema.json, lexicon.json and ads.jsonl (querylog.jsonl and ws_corpus.txt
  // are optional). The classifier is read from classifier/model.json, or
  // trained from classifier/questions.jsonl.
  static Service load(const std::filesystem::path& data_dir, ServiceOptions options = {});

  void add_domain(Corpus corpus, const std::vector<QueryLogSession>& sessions,
                  const std::vector<std::string>& documents);
  void set_classifier(DomainClassifier classifier) { classifier_ = std::move(classifier); }

  std::vector<std::string> domains() const;
  const DomainRuntime& runtime(std::string_view domain) const;
  const ServiceOptions& options() const { return options_; }
  const StopwordList& stopwords() const { return stopwords_; }

  // Throws AnalysisError("no conditions extracted") when nothing in the
  // question is a condition.
  AnswerEnvelope ask(std::string_view question, std::optional<std::string> domain = std::nullopt) const;
  // Same stages, stopping before execution.
  AnswerEnvelope explain(std::string_view question, std::optional<std::string> domain = std::nullopt) const;

  // Boolean expression for a question in a known domain.
  BoolExpr interpret_question(std::string_view question, std::string_view domain) const;

 private:
  AnswerEnvelope run(std::string_view question, std::optional<std::string> domain, bool execute) const;

  ServiceOptions options_;
  IdentifierTable identifiers_;
  StopwordList stopwords_;
  StopwordList dictionary_;
  std::optional<DomainClassifier> classifier_;
  std::map<std::string, std::unique_ptr<DomainRuntime>> domains_;
};

std::vector<std::pair<std::string, std::string>> load_labeled_questions(const std::filesystem::path& file);
std::vector<std::string> load_lines(const std::filesystem::path& file);

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  // Served at "/" when set; otherwise a built-in page is.
  std::optional<std::filesystem::path> static_dir;
};

// Called once the socket is bound, with the bound port and a function that
// stops the server from any thread.
using ServeReady = std::function<void(int port, std::function<void()> stop)>;

// Blocks until the server stops. Port 0 binds any free port. Throws Error
// when the port cannot be bound.
void serve(const Service& service, const ServeConfig& config, const ServeReady& on_ready = {});

}  // namespace adsqa
