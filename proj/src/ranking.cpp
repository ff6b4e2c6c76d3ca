#include "adsqa/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "adsqa/errors.hpp"

namespace adsqa {

using nlohmann::json;

namespace {

struct Phrase {
  std::vector<std::string> words;
  std::string attribute;
  std::string value;
};

std::vector<Phrase> type1_phrases(const DomainLexicon& lexicon) {
  std::vector<Phrase> out;
  for (const auto& e : lexicon.values) {
    if (e.type != AttrType::TypeI) continue;
    auto words = tokenize_words(e.phrase);
    if (words.empty()) continue;
    out.push_back({std::move(words), e.attribute, normalize_value(e.phrase)});
  }
  // longest phrase wins at a position
  std::stable_sort(out.begin(), out.end(),
                   [](const Phrase& a, const Phrase& b) { return a.words.size() > b.words.size(); });
  return out;
}

std::string attribute_key(std::string_view attribute) { return to_lower(attribute); }

using ValueSet = std::set<std::pair<std::string, std::string>>;

ValueSet record_type1_values(const Corpus& corpus, size_t pos) {
  ValueSet out;
  const auto& attrs = corpus.schema().attributes;
  for (size_t a = 0; a < attrs.size(); ++a) {
    if (attrs[a].type != AttrType::TypeI) continue;
    if (const std::string* v = corpus.categorical(a, pos)) out.emplace(attrs[a].name, *v);
  }
  return out;
}

double safe_div(double a, double b) { return b > 0 ? a / b : 0; }

}  // namespace

std::vector<std::pair<std::string, std::string>> TIMatrix::values_in(std::string_view text,
                                                                      const DomainLexicon& lexicon) {
  const auto phrases = type1_phrases(lexicon);
  const auto words = tokenize_words(text);
  std::vector<std::pair<std::string, std::string>> out;
  size_t i = 0;
  while (i < words.size()) {
    const Phrase* hit = nullptr;
    for (const auto& p : phrases) {
      if (i + p.words.size() > words.size()) continue;
      if (std::equal(p.words.begin(), p.words.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
        hit = &p;
        break;
      }
    }
    if (hit) {
      out.emplace_back(hit->attribute, hit->value);
      i += hit->words.size();
    } else {
      ++i;
    }
  }
  return out;
}

std::string TIMatrix::key(std::string_view attribute, std::string_view a, std::string_view b) {
  std::string x = normalize_value(a);
  std::string y = normalize_value(b);
  if (y < x) std::swap(x, y);
  return attribute_key(attribute) + "|" + x + "|" + y;
}

TIMatrix TIMatrix::build(const std::vector<QueryLogSession>& sessions, const Corpus& corpus) {
  std::map<std::string, TIPairStats> stats;
  auto same_attr = [](const auto& p, const auto& q) { return attribute_key(p.first) == attribute_key(q.first); };

  for (const auto& session : sessions) {
    std::vector<ValueSet> qs;
    for (const auto& e : session.entries) {
      auto found = values_in(e.query_text, corpus.lexicon());
      qs.emplace_back(found.begin(), found.end());
    }
    // rewrites between consecutive submissions
    for (size_t k = 0; k + 1 < qs.size(); ++k) {
      for (const auto& a : qs[k]) {
        if (qs[k + 1].count(a)) continue;
        for (const auto& b : qs[k + 1]) {
          if (qs[k].count(b) || !same_attr(a, b) || a.second == b.second) continue;
          stats[key(a.first, a.second, b.second)].rewrites += 1;
        }
      }
    }
    for (size_t i = 0; i < qs.size(); ++i) {
      for (size_t j = i + 1; j < qs.size(); ++j) {
        const double gap = std::abs(session.entries[j].timestamp - session.entries[i].timestamp);
        std::set<std::string> seen;
        for (const auto& a : qs[i]) {
          for (const auto& b : qs[j]) {
            if (!same_attr(a, b) || a.second == b.second) continue;
            const std::string k = key(a.first, a.second, b.second);
            if (!seen.insert(k).second) continue;
            stats[k].gap_total += gap;
            stats[k].gap_count += 1;
          }
        }
      }
    }
    for (size_t i = 0; i < qs.size(); ++i) {
      for (const auto& click : session.entries[i].clicked_ads) {
        auto pos = corpus.position_of(click.ad_id);
        if (!pos) continue;
        for (const auto& b : record_type1_values(corpus, *pos)) {
          for (const auto& a : qs[i]) {
            if (!same_attr(a, b) || a.second == b.second) continue;
            auto& s = stats[key(a.first, a.second, b.second)];
            s.dwell_total += click.dwell_seconds;
            s.rank_total += click.rank_position;
            s.clicks += 1;
          }
        }
      }
    }
  }

  double max_mod = 0, max_gap = 0, max_dwell = 0, max_rank = 0, max_click = 0;
  for (const auto& [k, s] : stats) {
    max_mod = std::max(max_mod, s.rewrites);
    if (s.gap_count > 0) max_gap = std::max(max_gap, s.gap_total / s.gap_count);
    if (s.clicks > 0) {
      max_dwell = std::max(max_dwell, s.dwell_total / s.clicks);
      max_rank = std::max(max_rank, safe_div(s.clicks, s.rank_total));
      max_click = std::max(max_click, s.clicks);
    }
  }

  TIMatrix m;
  for (const auto& [k, s] : stats) {
    TIFeatures f;
    f.mod = safe_div(s.rewrites, max_mod);
    if (s.gap_count > 0) f.time = max_gap > 0 ? 1.0 - (s.gap_total / s.gap_count) / max_gap : 1.0;
    if (s.clicks > 0) {
      f.ad_time = safe_div(s.dwell_total / s.clicks, max_dwell);
      f.rank = safe_div(safe_div(s.clicks, s.rank_total), max_rank);
      f.click = safe_div(s.clicks, max_click);
    }
    m.max_ti_sim_ = std::max(m.max_ti_sim_, f.sum());
    m.cells_.emplace(k, f);
  }
  return m;
}

TIFeatures TIMatrix::features(std::string_view attribute, std::string_view a, std::string_view b) const {
  if (normalize_value(a) == normalize_value(b)) return {};
  auto it = cells_.find(key(attribute, a, b));
  return it == cells_.end() ? TIFeatures{} : it->second;
}

double TIMatrix::ti_sim(std::string_view attribute, std::string_view a, std::string_view b) const {
  return features(attribute, a, b).sum();
}

double TIMatrix::normalized(std::string_view attribute, std::string_view a, std::string_view b) const {
  return safe_div(ti_sim(attribute, a, b), max_ti_sim_);
}

std::string TIMatrix::to_json() const {
  json cells = json::object();
  for (const auto& [k, f] : cells_) {
    cells[k] = {{"mod", f.mod}, {"time", f.time}, {"ad_time", f.ad_time}, {"rank", f.rank}, {"click", f.click}};
  }
  return json{{"max_ti_sim", max_ti_sim_}, {"cells", cells}}.dump();
}

TIMatrix TIMatrix::from_json(std::string_view text) {
  TIMatrix m;
  try {
    const json j = json::parse(text);
    m.max_ti_sim_ = j.at("max_ti_sim").get<double>();
    for (const auto& [k, v] : j.at("cells").items()) {
      m.cells_[k] = {v.at("mod").get<double>(), v.at("time").get<double>(), v.at("ad_time").get<double>(),
                     v.at("rank").get<double>(), v.at("click").get<double>()};
    }
  } catch (const json::exception& e) {
    throw Error(std::string("bad TI matrix: ") + e.what());
  }
  return m;
}

std::vector<std::string> WSMatrix::words_of(std::string_view text, const StopwordList& stopwords) {
  std::vector<std::string> out;
  for (auto& w : tokenize_words(text)) {
    if (stopwords.contains(w)) continue;
    out.push_back(stem(w));
  }
  return out;
}

WSMatrix WSMatrix::build(const std::vector<std::string>& documents, const StopwordList& stopwords) {
  WSMatrix m;
  m.stopwords_ = stopwords;
  for (const auto& doc : documents) {
    const auto w = words_of(doc, stopwords);
    for (size_t i = 0; i < w.size(); ++i) {
      for (size_t j = i + 1; j < w.size(); ++j) {
        if (w[i] == w[j]) continue;
        const double v = 1.0 / (1.0 + static_cast<double>(j - i));
        m.rows_[w[i]][w[j]] += v;
        m.rows_[w[j]][w[i]] += v;
      }
    }
  }
  for (auto& [w, row] : m.rows_) {
    double best = 0;
    for (const auto& [other, v] : row) best = std::max(best, v);
    row[w] = best;
    m.max_ = std::max(m.max_, best);
  }
  return m;
}

double WSMatrix::correlation(std::string_view a, std::string_view b) const {
  auto r = rows_.find(std::string(a));
  if (r == rows_.end()) return 0;
  auto c = r->second.find(std::string(b));
  return c == r->second.end() ? 0 : c->second;
}

double WSMatrix::feat_sim(std::string_view t, std::string_view v) const {
  const auto tw = words_of(t, stopwords_);
  const auto vw = words_of(v, stopwords_);
  if (tw.empty() || vw.empty() || max_ <= 0) return 0;
  double total = 0;
  for (const auto& a : tw) {
    double best = 0;
    for (const auto& b : vw) best = std::max(best, correlation(a, b));
    total += best / max_;
  }
  return total / static_cast<double>(tw.size());
}

std::string WSMatrix::to_json() const { return json{{"max", max_}, {"rows", rows_}}.dump(); }

WSMatrix WSMatrix::from_json(std::string_view text, StopwordList stopwords) {
  WSMatrix m;
  m.stopwords_ = std::move(stopwords);
  try {
    const json j = json::parse(text);
    m.max_ = j.at("max").get<double>();
    m.rows_ = j.at("rows").get<std::map<std::string, std::map<std::string, double>>>();
  } catch (const json::exception& e) {
    throw Error(std::string("bad WS matrix: ") + e.what());
  }
  return m;
}

double attribute_range(std::vector<double> values) {
  if (values.empty()) throw Error("range unavailable");
  std::sort(values.begin(), values.end());
  const size_t k = std::min<size_t>(10, values.size());
  double low = 0, high = 0;
  for (size_t i = 0; i < k; ++i) {
    low += values[i];
    high += values[values.size() - 1 - i];
  }
  const double range = (high - low) / static_cast<double>(k);
  return range == 0 ? 1.0 : range;
}

double num_sim(double t, double v, double range) { return std::max(0.0, 1.0 - std::abs(t - v) / range); }

SimilarityStores SimilarityStores::build(const Corpus& corpus, const std::vector<QueryLogSession>& sessions,
                                         const std::vector<std::string>& documents,
                                         const StopwordList& stopwords) {
  SimilarityStores s;
  s.ti = TIMatrix::build(sessions, corpus);
  s.ws = WSMatrix::build(documents, stopwords);
  const auto& attrs = corpus.schema().attributes;
  for (size_t a = 0; a < attrs.size(); ++a) {
    if (attrs[a].type != AttrType::TypeIII) continue;
    std::vector<double> values;
    for (size_t r = 0; r < corpus.size(); ++r) {
      if (auto v = corpus.numeric(a, r)) values.push_back(*v);
    }
    if (!values.empty()) s.ranges[attrs[a].name] = attribute_range(std::move(values));
  }
  return s;
}

namespace {

Similarity leaf_similarity(const Condition& c, const Corpus& corpus, size_t record, const SimilarityStores& stores) {
  Similarity best;
  if (c.superlative) return best;
  const DomainSchema& schema = corpus.schema();
  if (c.attr_type != AttrType::TypeIII) {
    auto idx = schema.index_of(*c.attribute);
    if (!idx) return best;
    const std::string& name = schema.attributes[*idx].name;
    const std::string* v = corpus.categorical(*idx, record);
    if (c.attr_type == AttrType::TypeI) {
      best.measure = "TI_Sim on " + name;
      if (v) best.value = stores.ti.normalized(name, c.text, *v);
    } else {
      best.measure = "Feat_Sim on " + name;
      if (v) best.value = stores.ws.feat_sim(c.text, *v);
    }
    return best;
  }
  for (const auto& attr : c.attributes()) {
    auto idx = schema.index_of(attr);
    if (!idx) continue;
    const std::string& name = schema.attributes[*idx].name;
    if (best.measure == "none") best.measure = "Num_Sim on " + name;
    auto v = corpus.numeric(*idx, record);
    auto range = stores.ranges.find(name);
    if (!v || range == stores.ranges.end()) continue;
    const double t = c.comparator == Comparator::Between ? std::clamp(*v, c.range.low, c.range.high) : c.number;
    const double s = num_sim(t, *v, range->second);
    if (s > best.value) best = {s, "Num_Sim on " + name};
  }
  return best;
}

}  // namespace

Similarity dropped_similarity(const BoolExpr& dropped, const Corpus& corpus, size_t record,
                              const SimilarityStores& stores) {
  switch (dropped.kind) {
    case BoolExpr::Kind::Leaf: return leaf_similarity(dropped.condition, corpus, record, stores);
    case BoolExpr::Kind::Or: {
      Similarity best;
      for (const auto& c : dropped.children) {
        Similarity s = dropped_similarity(c, corpus, record, stores);
        if (best.measure == "none" || s.value > best.value) best = s;
      }
      return best;
    }
    case BoolExpr::Kind::Not:
    case BoolExpr::Kind::And: return {};
  }
  return {};
}

std::vector<RankedAnswer> rank_partials(const std::vector<MatchResult>& partials, const Corpus& corpus,
                                        const SimilarityStores& stores) {
  std::map<size_t, RankedAnswer> best;
  for (const auto& m : partials) {
    if (!m.dropped) continue;
    Similarity s = dropped_similarity(*m.dropped, corpus, m.record, stores);
    if (m.conditions <= 1 && s.value <= 0) continue;
    RankedAnswer a{m, rank_sim(m.conditions, s.value), s.measure};
    auto it = best.find(m.record);
    if (it == best.end() || a.score > it->second.score) best[m.record] = std::move(a);
  }
  std::vector<RankedAnswer> out;
  for (auto& [r, a] : best) out.push_back(std::move(a));
  std::sort(out.begin(), out.end(), [](const RankedAnswer& a, const RankedAnswer& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.match.record_id < b.match.record_id;
  });
  return out;
}

std::vector<RankedAnswer> merge_answers(const std::vector<MatchResult>& exact,
                                        const std::vector<RankedAnswer>& partials, size_t cap) {
  std::vector<RankedAnswer> out;
  for (const auto& m : exact) {
    if (out.size() >= cap) return out;
    out.push_back({m, static_cast<double>(m.conditions), "exact"});
  }
  for (const auto& p : partials) {
    if (out.size() >= cap) break;
    out.push_back(p);
  }
  return out;
}

}  // namespace adsqa
