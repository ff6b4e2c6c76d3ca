#include "adsqa/service.hpp"

#include <chrono>
#include <fstream>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "adsqa/errors.hpp"

namespace adsqa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Stopwatch {
 public:
  double lap() {
    auto now = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string describe_signed(const Condition& c) { return c.negated ? "NOT " + describe(c) : describe(c); }

std::string render_unit(const BoolExpr& e) { return to_string(e); }

json tag_json(const TaggedToken& t) {
  json j{{"surface", t.surface}, {"tag", tag_label(t.identifier)}, {"kind", std::string(to_string(t.kind()))},
         {"negated", t.negated}};
  if (t.identifier.attribute) j["attribute"] = *t.identifier.attribute;
  if (t.identifier.number) j["number"] = *t.identifier.number;
  return j;
}

}  // namespace

std::string AnswerEnvelope::to_json(bool include_timing) const {
  json edits = json::array();
  for (const auto& e : corrections) {
    edits.push_back({{"kind", e.kind == CorrectionEdit::Kind::SpaceInserted ? "space_inserted" : "substituted"},
                     {"original", e.original},
                     {"replacement", e.replacement},
                     {"position", e.position},
                     {"similarity", e.similarity}});
  }
  json post = json::object();
  for (const auto& [d, p] : posteriors) post[d] = p;
  json tag_list = json::array();
  for (const auto& t : tags) tag_list.push_back(tag_json(t));
  json rows = json::array();
  for (size_t i = 0; i < answers.size(); ++i) {
    const AnswerRow& a = answers[i];
    json record = json::object();
    for (const auto& [k, v] : a.values) record[k] = v;
    json row{{"rank", i + 1},
             {"record_id", a.record_id},
             {"kind", std::string(to_string(a.kind))},
             {"score", a.score},
             {"measure", a.measure},
             {"record", record}};
    if (!a.dropped.empty()) row["dropped"] = a.dropped;
    rows.push_back(std::move(row));
  }
  json diag{{"executed", executed},
            {"relaxation_triggered", relaxation_triggered},
            {"exact_count", exact_count},
            {"partial_count", partial_count}};
  if (include_timing) diag["timing_ms"] = timing_ms;
  json j{{"question", question},
         {"corrected", corrected},
         {"corrections", edits},
         {"unrecognized", unrecognized},
         {"domain", {{"name", domain}, {"posterior", posterior}, {"forced", domain_forced}, {"posteriors", post}}},
         {"tags", tag_list},
         {"conditions", conditions},
         {"interpretation", interpretation},
         {"sql", sql},
         {"answers", rows},
         {"diagnostics", diag}};
  if (!relaxed_sql.empty()) j["relaxed_sql"] = relaxed_sql;
  if (!message.empty()) j["message"] = message;
  return j.dump(2);
}

Service::Service(ServiceOptions options, IdentifierTable identifiers, StopwordList stopwords,
                 StopwordList dictionary)
    : options_(options),
      identifiers_(std::move(identifiers)),
      stopwords_(std::move(stopwords)),
      dictionary_(std::move(dictionary)) {}

std::vector<std::pair<std::string, std::string>> load_labeled_questions(const fs::path& file) {
  std::vector<std::pair<std::string, std::string>> out;
  std::ifstream in(file);
  if (!in) throw Error(fmt::format("cannot open {}", file.string()));
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (normalize_value(line).empty()) continue;
    try {
      const json j = json::parse(line);
      out.emplace_back(j.at("question").get<std::string>(), j.at("domain").get<std::string>());
    } catch (const json::exception& e) {
      throw Error(fmt::format("{} line {}: {}", file.string(), n, e.what()));
    }
  }
  return out;
}

std::vector<std::string> load_lines(const fs::path& file) {
  std::vector<std::string> out;
  std::ifstream in(file);
  if (!in) throw Error(fmt::format("cannot open {}", file.string()));
  std::string line;
  while (std::getline(in, line)) {
    if (!normalize_value(line).empty()) out.push_back(line);
  }
  return out;
}

Service Service::load(const fs::path& data_dir, ServiceOptions options) {
  if (!fs::is_directory(data_dir)) throw Error(fmt::format("data directory not found: {}", data_dir.string()));
  auto optional_list = [&](const char* name) {
    const fs::path p = data_dir / name;
    return fs::exists(p) ? StopwordList::load(p) : StopwordList{};
  };
  Service s(options, IdentifierTable::load(data_dir / "identifiers.json"), optional_list("stopwords.txt"),
            optional_list("dictionary.txt"));

  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(data_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "schema.json")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    Corpus corpus = load_domain(dir / "schema.json", dir / "lexicon.json", dir / "ads.jsonl");
    std::vector<QueryLogSession> sessions;
    if (fs::exists(dir / "querylog.jsonl")) sessions = load_query_log(dir / "querylog.jsonl").sessions;
    std::vector<std::string> documents;
    if (fs::exists(dir / "ws_corpus.txt")) documents = load_lines(dir / "ws_corpus.txt");
    s.add_domain(std::move(corpus), sessions, documents);
  }
  if (s.domains_.empty()) throw Error(fmt::format("no domains under {}", data_dir.string()));

  const fs::path model = data_dir / "classifier" / "model.json";
  const fs::path questions = data_dir / "classifier" / "questions.jsonl";
  if (fs::exists(model)) {
    s.classifier_ = DomainClassifier::from_json(read_file(model));
  } else if (fs::exists(questions)) {
    s.classifier_ = DomainClassifier::train(load_labeled_questions(questions));
  }
  return s;
}

void Service::add_domain(Corpus corpus, const std::vector<QueryLogSession>& sessions,
                         const std::vector<std::string>& documents) {
  const std::string name = corpus.schema().domain;
  Trie trie = Trie::build(corpus.lexicon(), corpus.schema(), identifiers_, stopwords_, dictionary_);
  SubstringIndex index = SubstringIndex::build(corpus);
  SimilarityStores stores = SimilarityStores::build(corpus, sessions, documents, stopwords_);
  domains_[name] = std::make_unique<DomainRuntime>(
      DomainRuntime{std::move(corpus), std::move(trie), std::move(index), std::move(stores)});
}

std::vector<std::string> Service::domains() const {
  std::vector<std::string> out;
  for (const auto& [name, rt] : domains_) out.push_back(name);
  return out;
}

const DomainRuntime& Service::runtime(std::string_view domain) const {
  auto it = domains_.find(std::string(domain));
  if (it == domains_.end()) throw Error(fmt::format("domain '{}' is not loaded", domain));
  return *it->second;
}

AnswerEnvelope Service::ask(std::string_view question, std::optional<std::string> domain) const {
  return run(question, std::move(domain), true);
}

AnswerEnvelope Service::explain(std::string_view question, std::optional<std::string> domain) const {
  return run(question, std::move(domain), false);
}

BoolExpr Service::interpret_question(std::string_view question, std::string_view domain) const {
  const DomainRuntime& rt = runtime(domain);
  const CorrectionReport rep = correct(question, rt.trie, options_.correction_threshold);
  auto tokens = strip_nonessential(tag(rep.text, rt.trie));
  detect_negation(tokens);
  const auto conds = extract_conditions(tokens, rt.corpus);
  return interpret(tokens, conds, rt.corpus.schema());
}

AnswerEnvelope Service::run(std::string_view question, std::optional<std::string> domain, bool execute_query) const {
  Stopwatch clock;
  AnswerEnvelope env;
  env.question = std::string(question);

  if (domain) {
    env.domain = *domain;
    env.domain_forced = true;
    env.posteriors = {{*domain, 1.0}};
  } else if (domains_.size() == 1 && !classifier_) {
    env.domain = domains_.begin()->first;
    env.posteriors = {{env.domain, 1.0}};
  } else {
    if (!classifier_) throw Error("no classifier loaded; pass a domain");
    Classification c = classifier_->classify(question);
    // the classifier may know domains that are not loaded here
    double best = -1;
    for (const auto& [name, p] : c.posteriors) {
      if (domains_.count(name) && p > best) {
        best = p;
        env.domain = name;
      }
    }
    if (best < 0) throw Error("classifier knows none of the loaded domains; pass a domain");
    env.posterior = best;
    env.posteriors = std::move(c.posteriors);
  }
  const DomainRuntime& rt = runtime(env.domain);
  env.timing_ms["classify"] = clock.lap();

  CorrectionReport rep = correct(question, rt.trie, options_.correction_threshold);
  env.corrected = rep.text;
  env.corrections = std::move(rep.edits);
  env.unrecognized = std::move(rep.unrecognized);
  auto tokens = strip_nonessential(tag(env.corrected, rt.trie));
  detect_negation(tokens);
  env.tags = tokens;
  env.timing_ms["tag"] = clock.lap();

  const auto conds = extract_conditions(tokens, rt.corpus);
  for (const auto& c : conds) env.conditions.push_back(describe_signed(c));
  if (conds.empty()) {
    if (execute_query) throw AnalysisError("no conditions extracted");
    env.message = "no conditions extracted";
    return env;
  }
  std::optional<BoolExpr> expr;
  try {
    expr = interpret(tokens, conds, rt.corpus.schema());
  } catch (const ContradictionError& e) {
    env.message = e.what();
    env.executed = execute_query;
    return env;
  }
  env.interpretation = to_string(*expr);
  const QueryPlan p = plan(*expr, options_.answer_cap);
  env.sql = to_sql(p, rt.corpus.schema());
  env.timing_ms["interpret"] = clock.lap();
  if (!execute_query) return env;

  env.executed = true;
  const auto all_exact = matching_records(p, rt.corpus, &rt.index);
  const auto exact = execute(p, rt.corpus, &rt.index);
  std::vector<RankedAnswer> ranked;
  if (all_exact.size() < options_.relax_threshold && p.overlay) {
    env.relaxation_triggered = true;
    env.relaxed_sql = to_sql(p, rt.corpus.schema(), true);
    ranked = rank_partials(relax_n_minus_1(p, rt.corpus, all_exact), rt.corpus, rt.stores);
  }
  const auto merged = merge_answers(exact, ranked, options_.answer_cap);
  for (const auto& a : merged) {
    AnswerRow row;
    row.record_id = a.match.record_id;
    row.kind = a.match.kind;
    row.score = a.score;
    row.measure = a.measure;
    if (a.match.dropped) row.dropped = render_unit(*a.match.dropped);
    const AdRecord& rec = rt.corpus.records()[a.match.record];
    for (const auto& attr : rt.corpus.schema().attributes) {
      const Scalar* v = rec.get(attr.name);
      if (!v) continue;
      row.values.emplace_back(attr.name, std::holds_alternative<std::string>(*v)
                                             ? std::get<std::string>(*v)
                                             : format_number(std::get<double>(*v)));
    }
    (row.kind == MatchKind::Exact ? env.exact_count : env.partial_count) += 1;
    env.answers.push_back(std::move(row));
  }
  env.timing_ms["execute"] = clock.lap();
  return env;
}

namespace {

constexpr const char* kIndexPage = R"html(<!doctype html>
<html><head><meta charset="utf-8"><title>adsqa</title>
<style>body{font-family:sans-serif;margin:2em}td,th{border:1px solid #ccc;padding:4px}
.partial{color:#865}.exact{color:#264}</style></head>
<body>
<form id="f"><input id="q" size="60" placeholder="Cheapest 2dr mazda with automatic transmission">
<button>Ask</button></form>
<p id="interp"></p><table id="t"></table>
<script>
document.getElementById('f').onsubmit = async (ev) => {
  ev.preventDefault();
  const r = await fetch('/ask', {method: 'POST', headers: {'Content-Type': 'application/json'},
    body: JSON.stringify({question: document.getElementById('q').value})});
  const env = await r.json();
  document.getElementById('interp').textContent = env.error || env.message || env.interpretation;
  const t = document.getElementById('t');
  t.innerHTML = '';
  for (const a of env.answers || []) {
    const tr = t.insertRow();
    tr.className = a.kind;
    for (const v of [a.rank, a.kind, a.score.toFixed(2), a.measure, a.record_id,
                     Object.values(a.record).join(', ')]) tr.insertCell().textContent = v;
  }
};
</script></body></html>
)html";

void reply_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}}.dump(), "application/json");
}

void handle_question(const Service& service, const httplib::Request& req, httplib::Response& res, bool execute) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::exception&) {
    return reply_error(res, 400, "body must be JSON");
  }
  if (!body.is_object() || !body.contains("question") || !body["question"].is_string()) {
    return reply_error(res, 400, "missing 'question'");
  }
  std::optional<std::string> domain;
  if (body.contains("domain") && body["domain"].is_string()) domain = body["domain"].get<std::string>();
  try {
    const std::string q = body["question"].get<std::string>();
    AnswerEnvelope env = execute ? service.ask(q, domain) : service.explain(q, domain);
    res.set_content(env.to_json(), "application/json");
  } catch (const Error& e) {
    reply_error(res, 422, e.what());
  }
}

}  // namespace

void serve(const Service& service, const ServeConfig& config, const ServeReady& on_ready) {
  httplib::Server server;
  server.Post("/ask", [&](const httplib::Request& req, httplib::Response& res) {
    handle_question(service, req, res, true);
  });
  server.Post("/explain", [&](const httplib::Request& req, httplib::Response& res) {
    handle_question(service, req, res, false);
  });
  server.Get("/domains", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"domains", service.domains()}}.dump(), "application/json");
  });
  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
  if (config.static_dir) {
    if (!server.set_mount_point("/", config.static_dir->string())) {
      throw Error(fmt::format("static directory not found: {}", config.static_dir->string()));
    }
  } else {
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kIndexPage, "text/html; charset=utf-8");
    });
  }
  int port = config.port;
  if (port == 0) {
    port = server.bind_to_any_port(config.host);
    if (port < 0) throw Error(fmt::format("cannot bind {}", config.host));
  } else if (!server.bind_to_port(config.host, port)) {
    throw Error(fmt::format("cannot bind {}:{}", config.host, port));
  }
  if (on_ready) on_ready(port, [&server] { server.stop(); });
  server.listen_after_bind();
}

}  // namespace adsqa
