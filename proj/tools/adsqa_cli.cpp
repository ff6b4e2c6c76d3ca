#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "adsqa/classifier.hpp"
#include "adsqa/corpus.hpp"
#include "adsqa/errors.hpp"
#include "adsqa/evalharness.hpp"
#include "adsqa/service.hpp"

#ifndef ADSQA_DATA_DIR
#define ADSQA_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace adsqa;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << text;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

std::string with_metadata(const std::string& payload, const std::vector<std::string>& sources) {
  return json{{"metadata", {{"built_at", timestamp()}, {"sources", sources}}}, {"store", json::parse(payload)}}
      .dump(1);
}

void print_table(const AnswerEnvelope& env) {
  fmt::print("question:       {}\n", env.question);
  if (env.corrected != env.question) fmt::print("corrected:      {}\n", env.corrected);
  fmt::print("domain:         {} ({:.3f}{})\n", env.domain, env.posterior, env.domain_forced ? ", forced" : "");
  fmt::print("tags:          ");
  for (const auto& t : env.tags) fmt::print(" \"{}\"/{}", t.surface, tag_label(t.identifier));
  fmt::print("\n");
  if (!env.interpretation.empty()) fmt::print("interpretation: {}\n", env.interpretation);
  if (!env.sql.empty()) fmt::print("sql:\n{}\n", env.sql);
  if (!env.message.empty()) fmt::print("message:        {}\n", env.message);
  if (!env.executed) return;
  fmt::print("answers ({} exact, {} partial{}):\n", env.exact_count, env.partial_count,
             env.relaxation_triggered ? ", relaxed" : "");
  for (size_t i = 0; i < env.answers.size(); ++i) {
    const auto& a = env.answers[i];
    std::string values;
    for (const auto& [k, v] : a.values) values += fmt::format("{}{}={}", values.empty() ? "" : " ", k, v);
    fmt::print("{:>3}  {:<7} {:>6.3f}  {:<20} {}  {}\n", i + 1, to_string(a.kind), a.score, a.measure, a.record_id,
               values);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Question answering over classified ads"};
  app.require_subcommand(1);
  std::string data_dir = ADSQA_DATA_DIR;
  app.add_option("--data", data_dir, "Data directory")->capture_default_str();
  ServiceOptions opts;
  app.add_option("--cap", opts.answer_cap, "Maximum answers")->capture_default_str();
  app.add_option("--relax-below", opts.relax_threshold, "Relax when fewer exact answers than this")
      ->capture_default_str();

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate domain files and write them to the data directory");
  std::string schema_file, lexicon_file, ads_file, log_file;
  ingest->add_option("--schema", schema_file)->required()->check(CLI::ExistingFile);
  ingest->add_option("--lexicon", lexicon_file)->required()->check(CLI::ExistingFile);
  ingest->add_option("--ads", ads_file)->required()->check(CLI::ExistingFile);
  ingest->add_option("--log", log_file)->check(CLI::ExistingFile);

  // build-stores
  auto* build = app.add_subcommand("build-stores", "Build and persist similarity stores and the index");
  std::string build_domain, build_out;
  build->add_option("--domain", build_domain)->required();
  build->add_option("--out", build_out, "Output directory (default <data>/<domain>/stores)");

  // train
  auto* train = app.add_subcommand("train", "Train the domain classifier");
  std::string questions_file, model_out;
  double holdout = 0.2;
  std::uint64_t seed = 7;
  train->add_option("--questions", questions_file)->check(CLI::ExistingFile);
  train->add_option("--out", model_out, "Model file (default <data>/classifier/model.json)");
  train->add_option("--holdout", holdout, "Fraction held out for accuracy")->capture_default_str()->check(
      CLI::Range(0.0, 0.9));
  train->add_option("--seed", seed)->capture_default_str();

  // ask / explain
  std::string question;
  std::optional<std::string> domain;
  bool as_json = false;
  auto* ask = app.add_subcommand("ask", "Answer a question");
  ask->add_option("question", question)->required();
  ask->add_option("--domain", domain);
  ask->add_flag("--json", as_json);
  auto* explain = app.add_subcommand("explain", "Show the interpretation without executing");
  explain->add_option("question", question)->required();
  explain->add_option("--domain", domain);
  explain->add_flag("--json", as_json);

  // eval
  auto* eval = app.add_subcommand("eval", "Compare rankers on judged candidates");
  std::string judgments_file, methods = "all", eval_domain = "cars", csv_out;
  eval->add_option("--judgments", judgments_file)->required()->check(CLI::ExistingFile);
  eval->add_option("--methods", methods, "Comma-separated or 'all'")->capture_default_str();
  eval->add_option("--domain", eval_domain)->capture_default_str();
  eval->add_option("--seed", seed)->capture_default_str();
  eval->add_option("--out", csv_out, "CSV file (default stdout)");

  // serve
  auto* srv = app.add_subcommand("serve", "Run the HTTP service");
  ServeConfig serve_config;
  std::string static_dir;
  srv->add_option("--port", serve_config.port)->capture_default_str();
  srv->add_option("--host", serve_config.host)->capture_default_str();
  srv->add_option("--static", static_dir, "Directory served at /");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      const DomainSchema schema = parse_schema(read_file(schema_file));
      schema.validate();
      const std::string lexicon_text = read_file(lexicon_file);
      parse_lexicon(lexicon_text, schema);
      const auto ads = parse_ads(read_file(ads_file), schema);
      const fs::path dir = fs::path(data_dir) / schema.domain;
      write_file(dir / "schema.json", serialize_schema(schema));
      write_file(dir / "lexicon.json", lexicon_text);
      write_file(dir / "ads.jsonl", serialize_ads(ads));
      fmt::print("{}: {} records\n", schema.domain, ads.size());
      if (!log_file.empty()) {
        const QueryLog log = load_query_log(log_file);
        write_file(dir / "querylog.jsonl", serialize_query_log(log.sessions));
        fmt::print("{}: {} sessions, {} rejected lines\n", schema.domain, log.sessions.size(), log.rejected.size());
        for (const auto& r : log.rejected) fmt::print(stderr, "  line {}: {}\n", r.line_number, r.reason);
      }
      return 0;
    }

    if (*train) {
      const fs::path qfile = questions_file.empty() ? fs::path(data_dir) / "classifier" / "questions.jsonl"
                                                    : fs::path(questions_file);
      auto labeled = load_labeled_questions(qfile);
      std::mt19937_64 rng(seed);
      std::shuffle(labeled.begin(), labeled.end(), rng);
      const size_t held = static_cast<size_t>(static_cast<double>(labeled.size()) * holdout);
      std::vector<std::pair<std::string, std::string>> test(labeled.begin(), labeled.begin() + held);
      std::vector<std::pair<std::string, std::string>> fit(labeled.begin() + held, labeled.end());
      if (!test.empty()) {
        const auto model = DomainClassifier::train(fit);
        std::vector<std::string> predicted, expected;
        for (const auto& [q, d] : test) {
          predicted.push_back(model.classify(q).domain);
          expected.push_back(d);
        }
        fmt::print("held-out accuracy: {:.4f} ({} of {} questions)\n", accuracy(predicted, expected), test.size(),
                   labeled.size());
      }
      const auto full = DomainClassifier::train(labeled);
      const fs::path out = model_out.empty() ? fs::path(data_dir) / "classifier" / "model.json" : fs::path(model_out);
      write_file(out, full.to_json());
      fmt::print("model written to {}\n", out.string());
      return 0;
    }

    const Service service = Service::load(data_dir, opts);

    if (*build) {
      const DomainRuntime& rt = service.runtime(build_domain);
      const fs::path dir = fs::path(data_dir) / build_domain;
      const fs::path out = build_out.empty() ? dir / "stores" : fs::path(build_out);
      const std::vector<std::string> sources{(dir / "ads.jsonl").string(), (dir / "querylog.jsonl").string(),
                                             (dir / "ws_corpus.txt").string()};
      write_file(out / "ti_matrix.json", with_metadata(rt.stores.ti.to_json(), sources));
      write_file(out / "ws_matrix.json", with_metadata(rt.stores.ws.to_json(), sources));
      write_file(out / "ranges.json", with_metadata(json(rt.stores.ranges).dump(), sources));
      write_file(out / "index.json", with_metadata(rt.index.to_json(), sources));
      fmt::print("TI pairs {}, WS words {}, ranges {}, index keys {} -> {}\n", rt.stores.ti.size(),
                 rt.stores.ws.vocabulary_size(), rt.stores.ranges.size(), rt.index.key_count(), out.string());
      return 0;
    }

    if (*ask || *explain) {
      const AnswerEnvelope env = *ask ? service.ask(question, domain) : service.explain(question, domain);
      if (as_json) {
        fmt::print("{}\n", env.to_json());
      } else {
        print_table(env);
      }
      return 0;
    }

    if (*eval) {
      std::vector<std::string> chosen;
      if (methods == "all") {
        chosen = all_methods();
      } else {
        std::stringstream ss(methods);
        for (std::string m; std::getline(ss, m, ',');) {
          if (!m.empty()) chosen.push_back(m);
        }
      }
      const DomainRuntime& rt = service.runtime(eval_domain);
      const auto judgments = parse_judgments(read_file(judgments_file));
      const auto rows = compare_methods(
          judgments, rt.corpus, rt.stores,
          [&](const std::string& q) { return service.interpret_question(q, eval_domain); }, chosen, seed);
      const std::string csv = to_csv(rows);
      if (csv_out.empty()) {
        fmt::print("{}", csv);
      } else {
        write_file(csv_out, csv);
      }
      return 0;
    }

    if (*srv) {
      if (!static_dir.empty()) serve_config.static_dir = static_dir;
      serve(service, serve_config, [&](int port, std::function<void()>) {
        fmt::print("listening on http://{}:{}\n", serve_config.host, port);
        std::fflush(stdout);
      });
      return 0;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
