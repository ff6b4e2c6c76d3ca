#include "adsqa/evalharness.hpp"

#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "adsqa/engine.hpp"
#include "adsqa/errors.hpp"

namespace adsqa {

using nlohmann::json;

double accuracy(const std::vector<std::string>& predictions, const std::vector<std::string>& labels) {
  if (predictions.size() != labels.size()) {
    throw Error(fmt::format("length mismatch: {} predictions, {} labels", predictions.size(), labels.size()));
  }
  if (labels.empty()) throw Error("no instances");
  size_t correct = 0;
  for (size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i];
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

PRF precision_recall_f(const std::vector<std::string>& retrieved, const std::set<std::string>& relevant) {
  const size_t n = std::min<size_t>(retrieved.size(), kDefaultAnswerCap);
  size_t correct = 0;
  for (size_t i = 0; i < n; ++i) correct += relevant.count(retrieved[i]);
  PRF out;
  if (n) out.precision = static_cast<double>(correct) / static_cast<double>(n);
  if (!relevant.empty()) out.recall = static_cast<double>(correct) / static_cast<double>(relevant.size());
  if (out.precision + out.recall > 0) out.f = 2 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

JudgmentSet parse_judgments(std::string_view jsonl) {
  JudgmentSet out;
  size_t line_number = 0;
  size_t start = 0;
  while (start <= jsonl.size()) {
    size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(start, end - start);
    start = end + 1;
    ++line_number;
    if (normalize_value(line).empty()) continue;
    try {
      const json j = json::parse(line);
      Judgment jd;
      jd.question = j.at("question").get<std::string>();
      for (const auto& c : j.at("candidates")) {
        JudgedCandidate jc{c.at("record_id").get<std::string>(), c.at("related").get<int>()};
        if (jc.related != 0 && jc.related != 1) throw Error("related must be 0 or 1");
        jd.candidates.push_back(std::move(jc));
      }
      if (jd.candidates.empty()) throw Error("empty candidate list");
      out.push_back(std::move(jd));
    } catch (const json::exception& e) {
      throw Error(fmt::format("judgments line {}: {}", line_number, e.what()));
    } catch (const Error& e) {
      throw Error(fmt::format("judgments line {}: {}", line_number, e.what()));
    }
  }
  return out;
}

double p_at_k(const JudgmentSet& judgments, size_t k) {
  if (k == 0) throw Error("K must be positive");
  if (judgments.empty()) return 0;
  double total = 0;
  for (const auto& j : judgments) {
    if (j.candidates.size() < k) {
      throw Error(fmt::format("question '{}' has {} candidates, fewer than K = {}", j.question,
                              j.candidates.size(), k));
    }
    size_t related = 0;
    for (size_t i = 0; i < k; ++i) related += j.candidates[i].related;
    total += static_cast<double>(related) / static_cast<double>(k);
  }
  return total / static_cast<double>(judgments.size());
}

double mrr(const JudgmentSet& judgments) {
  if (judgments.empty()) return 0;
  double total = 0;
  for (const auto& j : judgments) {
    const size_t n = std::min<size_t>(5, j.candidates.size());
    for (size_t i = 0; i < n; ++i) {
      if (j.candidates[i].related) {
        total += 1.0 / static_cast<double>(i + 1);
        break;
      }
    }
  }
  return total / static_cast<double>(judgments.size());
}

double baseline_cosine(size_t satisfied, size_t n) {
  if (n == 0 || satisfied == 0) return 0;
  return std::sqrt(static_cast<double>(satisfied) / static_cast<double>(n));
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1;
  size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

Supertuples Supertuples::build(const Corpus& corpus) {
  Supertuples s;
  const auto& attrs = corpus.schema().attributes;
  for (size_t a = 0; a < attrs.size(); ++a) {
    if (attrs[a].kind != ValueKind::Categorical) continue;
    auto& by_value = s.tuples_[to_lower(attrs[a].name)];
    for (size_t r = 0; r < corpus.size(); ++r) {
      const std::string* v = corpus.categorical(a, r);
      if (!v) continue;
      auto& tuple = by_value[*v];
      for (size_t b = 0; b < attrs.size(); ++b) {
        if (b == a || attrs[b].kind != ValueKind::Categorical) continue;
        auto& bag = tuple[to_lower(attrs[b].name)];
        if (const std::string* w = corpus.categorical(b, r)) bag.insert(*w);
      }
    }
  }
  return s;
}

const std::map<std::string, std::set<std::string>>* Supertuples::find(std::string_view attribute,
                                                                     std::string_view value) const {
  auto a = tuples_.find(to_lower(attribute));
  if (a == tuples_.end()) return nullptr;
  auto v = a->second.find(normalize_value(value));
  return v == a->second.end() ? nullptr : &v->second;
}

double Supertuples::vsim(std::string_view attribute, std::string_view a, std::string_view b) const {
  if (normalize_value(a) == normalize_value(b)) return 1;
  const auto* ta = find(attribute, a);
  const auto* tb = find(attribute, b);
  if (!ta || !tb) return 0;
  std::set<std::string> keys;
  for (const auto& [k, v] : *ta) keys.insert(k);
  for (const auto& [k, v] : *tb) keys.insert(k);
  if (keys.empty()) return 0;
  static const std::set<std::string> none;
  double total = 0;
  for (const auto& k : keys) {
    auto x = ta->find(k);
    auto y = tb->find(k);
    total += jaccard(x == ta->end() ? none : x->second, y == tb->end() ? none : y->second);
  }
  return total / static_cast<double>(keys.size());
}

double aimq_numeric(double q, double a) {
  if (q == 0) return a == 0 ? 1 : 0;
  return 1 - std::abs(q - a) / q;
}

double baseline_aimq(const std::vector<Condition>& question, const Corpus& corpus, size_t record,
                     const Supertuples& supertuples) {
  std::vector<const Condition*> used;
  for (const auto& c : question) {
    if (!c.superlative) used.push_back(&c);
  }
  if (used.empty()) return 0;
  const double w = 1.0 / static_cast<double>(used.size());
  const DomainSchema& schema = corpus.schema();
  double total = 0;
  for (const Condition* c : used) {
    double term = 0;
    if (c->negated) {
      Condition plain = *c;
      plain.negated = false;
      term = satisfies(plain, corpus, record) ? 0 : 1;
    } else if (c->attr_type != AttrType::TypeIII) {
      auto idx = schema.index_of(*c->attribute);
      const std::string* v = idx ? corpus.categorical(*idx, record) : nullptr;
      if (v) term = categorical_match(c->text, *v) ? 1 : supertuples.vsim(*c->attribute, c->text, *v);
    } else {
      const double q = c->comparator == Comparator::Between ? (c->range.low + c->range.high) / 2 : c->number;
      bool first = true;
      for (const auto& name : c->attributes()) {
        auto idx = schema.index_of(name);
        auto v = idx ? corpus.numeric(*idx, record) : std::nullopt;
        if (!v) continue;
        const double s = aimq_numeric(q, *v);
        if (first || s > term) term = s;
        first = false;
      }
    }
    total += w * term;
  }
  return total;
}

std::string record_text(const Corpus& corpus, size_t record) {
  const AdRecord& r = corpus.records()[record];
  std::string out;
  for (const auto& a : corpus.schema().attributes) {
    const Scalar* v = r.get(a.name);
    if (!v) continue;
    if (!out.empty()) out += ' ';
    out += std::holds_alternative<std::string>(*v) ? std::get<std::string>(*v) : format_number(std::get<double>(*v));
  }
  return out;
}

TfIdf TfIdf::build(const Corpus& corpus) {
  std::vector<std::string> docs;
  for (size_t r = 0; r < corpus.size(); ++r) docs.push_back(record_text(corpus, r));
  return build(docs);
}

TfIdf TfIdf::build(const std::vector<std::string>& documents) {
  TfIdf t;
  std::map<std::string, size_t> df;
  std::vector<std::map<std::string, double>> tf;
  for (const auto& d : documents) {
    std::map<std::string, double> counts;
    for (const auto& w : tokenize_words(d)) counts[w] += 1;
    for (const auto& [w, c] : counts) df[w] += 1;
    tf.push_back(std::move(counts));
  }
  const double n = static_cast<double>(documents.size());
  for (const auto& [w, d] : df) t.idf_[w] = std::log(n / static_cast<double>(d));
  for (auto& counts : tf) {
    double norm = 0;
    for (auto& [w, c] : counts) {
      c *= t.idf_[w];
      norm += c * c;
    }
    t.docs_.push_back(std::move(counts));
    t.norms_.push_back(std::sqrt(norm));
  }
  return t;
}

std::map<std::string, double> TfIdf::weigh(std::string_view text) const {
  std::map<std::string, double> out;
  for (const auto& w : tokenize_words(text)) {
    auto it = idf_.find(w);
    if (it != idf_.end()) out[w] += it->second;
  }
  return out;
}

double TfIdf::score(std::string_view question, size_t document) const {
  if (document >= docs_.size()) throw Error("document out of range");
  const auto q = weigh(question);
  double dot = 0, qnorm = 0;
  for (const auto& [w, x] : q) {
    qnorm += x * x;
    auto it = docs_[document].find(w);
    if (it != docs_[document].end()) dot += x * it->second;
  }
  if (dot == 0 || qnorm == 0 || norms_[document] == 0) return 0;
  return dot / (std::sqrt(qnorm) * norms_[document]);
}

double cqads_score(const BoolExpr& expr, const Corpus& corpus, size_t record, const SimilarityStores& stores) {
  const QueryPlan p = plan(expr);
  if (!p.overlay) return 1;
  double best = 0;
  for (const auto& term : conjunctive_terms(*p.overlay)) {
    const size_t n = term.size();
    size_t failed = 0;
    const BoolExpr* dropped = nullptr;
    for (const auto& u : term) {
      if (evaluate(u, [&](const Condition& c) { return satisfies(c, corpus, record); })) continue;
      ++failed;
      dropped = &u;
    }
    double s;
    if (failed == 0) {
      s = static_cast<double>(n);
    } else if (failed == 1) {
      s = rank_sim(n, dropped_similarity(*dropped, corpus, record, stores).value);
    } else {
      s = static_cast<double>(n - failed);
    }
    best = std::max(best, s);
  }
  return best;
}

namespace {

std::vector<Condition> flat_conditions(const BoolExpr& e, bool negated = false) {
  switch (e.kind) {
    case BoolExpr::Kind::Leaf: {
      Condition c = e.condition;
      c.negated = negated;
      return {c};
    }
    case BoolExpr::Kind::Not: return flat_conditions(e.children.front(), !negated);
    default: {
      std::vector<Condition> out;
      for (const auto& c : e.children) {
        auto more = flat_conditions(c, negated);
        out.insert(out.end(), more.begin(), more.end());
      }
      return out;
    }
  }
}

size_t best_satisfied(const BoolExpr& expr, const Corpus& corpus, size_t record, size_t& n_out) {
  const QueryPlan p = plan(expr);
  n_out = 0;
  if (!p.overlay) return 0;
  size_t best = 0;
  bool first = true;
  for (const auto& term : conjunctive_terms(*p.overlay)) {
    size_t sat = 0;
    for (const auto& u : term) {
      sat += evaluate(u, [&](const Condition& c) { return satisfies(c, corpus, record); });
    }
    // best ratio; term sizes may differ
    if (first || sat * n_out > best * term.size()) {
      best = sat;
      n_out = term.size();
      first = false;
    }
  }
  return best;
}

}  // namespace

std::vector<MethodScores> compare_methods(const JudgmentSet& judgments, const Corpus& corpus,
                                          const SimilarityStores& stores, const Interpreter& interpret,
                                          const std::vector<std::string>& methods, std::uint64_t seed) {
  for (const auto& m : methods) {
    if (std::find(all_methods().begin(), all_methods().end(), m) == all_methods().end()) {
      throw Error(fmt::format("unknown method '{}'", m));
    }
  }
  const TfIdf tfidf = TfIdf::build(corpus);
  const Supertuples supertuples = Supertuples::build(corpus);

  std::vector<MethodScores> rows;
  for (const auto& method : methods) {
    JudgmentSet reordered;
    for (size_t qi = 0; qi < judgments.size(); ++qi) {
      const Judgment& j = judgments[qi];
      std::optional<BoolExpr> expr;
      try {
        expr = interpret(j.question);
      } catch (const Error&) {
        // an uninterpretable question leaves every structured score at 0
      }
      Judgment out{j.question, {}};
      if (method == "random") {
        out.candidates = baseline_random(j.candidates, seed + qi);
        reordered.push_back(std::move(out));
        continue;
      }
      std::vector<std::pair<double, JudgedCandidate>> scored;
      for (const auto& c : j.candidates) {
        auto pos = corpus.position_of(c.record_id);
        if (!pos) throw Error(fmt::format("judged record '{}' is not in the corpus", c.record_id));
        double s = 0;
        if (method == "faqfinder") {
          s = tfidf.score(j.question, *pos);
        } else if (expr && method == "cqads") {
          s = cqads_score(*expr, corpus, *pos, stores);
        } else if (expr && method == "cosine") {
          size_t n = 0;
          const size_t sat = best_satisfied(*expr, corpus, *pos, n);
          s = baseline_cosine(sat, n);
        } else if (expr && method == "aimq") {
          s = baseline_aimq(flat_conditions(*expr), corpus, *pos, supertuples);
        }
        scored.emplace_back(s, c);
      }
      std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second.record_id < b.second.record_id;
      });
      for (auto& [s, c] : scored) out.candidates.push_back(c);
      reordered.push_back(std::move(out));
    }
    JudgmentSet five;
    for (const auto& j : reordered) {
      if (j.candidates.size() >= 5) five.push_back(j);
    }
    rows.push_back({method, p_at_k(reordered, 1), p_at_k(five, 5), mrr(reordered)});
  }
  return rows;
}

std::string to_csv(const std::vector<MethodScores>& rows) {
  std::string out = "method,p_at_1,p_at_5,mrr\n";
  for (const auto& r : rows) out += fmt::format("{},{:.4f},{:.4f},{:.4f}\n", r.method, r.p_at_1, r.p_at_5, r.mrr);
  return out;
}

}  // namespace adsqa
