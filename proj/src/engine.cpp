#include "adsqa/engine.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "adsqa/errors.hpp"

namespace adsqa {

using nlohmann::json;

namespace {

bool is_literal(const BoolExpr& e) { return e.kind == BoolExpr::Kind::Leaf || e.kind == BoolExpr::Kind::Not; }

std::string sql_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

std::string column(const DomainSchema& schema, const std::string& attribute) {
  const AttributeDecl* a = schema.find(attribute);
  return "C." + (a ? a->name : attribute);
}

std::string predicate_sql(const Condition& c, const DomainSchema& schema, const std::string& attribute) {
  const std::string col = column(schema, attribute);
  if (c.attr_type != AttrType::TypeIII) return fmt::format("{} = {}", col, sql_quote(c.display));
  if (c.comparator == Comparator::Between) {
    return fmt::format("{} {} {} AND {} {} {}", col, c.range.low_inclusive ? ">=" : ">",
                       format_number(c.range.low), col, c.range.high_inclusive ? "<=" : "<",
                       format_number(c.range.high));
  }
  return fmt::format("{} {} {}", col, to_string(c.comparator), format_number(c.number));
}

std::string subselect(const Condition& c, const DomainSchema& schema) {
  const std::string head = fmt::format("SELECT {} FROM {} C\nWHERE ", schema.id_column, schema.table);
  std::string body;
  const auto attrs = c.attributes();
  for (size_t i = 0; i < attrs.size(); ++i) {
    if (i) body += "\nUNION\n";
    body += head + predicate_sql(c, schema, attrs[i]);
  }
  return "(" + body + ")";
}

std::string expr_sql(const BoolExpr& e, const DomainSchema& schema, bool relaxed) {
  switch (e.kind) {
    case BoolExpr::Kind::Leaf: return fmt::format("{} IN\n{}", schema.id_column, subselect(e.condition, schema));
    case BoolExpr::Kind::Not:
      return fmt::format("{} NOT IN\n{}", schema.id_column, subselect(e.children.front().condition, schema));
    case BoolExpr::Kind::And:
    case BoolExpr::Kind::Or: {
      const bool use_or = e.kind == BoolExpr::Kind::Or || relaxed;
      std::string out;
      for (size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += use_or ? " OR " : " AND ";
        const auto& c = e.children[i];
        const bool compound = !is_literal(c);
        out += compound ? "(" + expr_sql(c, schema, relaxed) + ")" : expr_sql(c, schema, relaxed);
      }
      return out;
    }
  }
  return {};
}

std::vector<size_t> intersect(const std::vector<size_t>& a, const std::vector<size_t>& b) {
  std::vector<size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<size_t> unite(const std::vector<size_t>& a, const std::vector<size_t>& b) {
  std::vector<size_t> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::optional<std::vector<size_t>> index_candidates(const BoolExpr& e, const Corpus& corpus,
                                                    const SubstringIndex& index) {
  switch (e.kind) {
    case BoolExpr::Kind::Leaf: {
      const Condition& c = e.condition;
      if (c.attr_type == AttrType::TypeIII || c.superlative || !c.attribute) return std::nullopt;
      auto idx = corpus.schema().index_of(*c.attribute);
      if (!idx) return std::vector<size_t>{};
      return index.lookup(*idx, c.text);
    }
    case BoolExpr::Kind::Not: return std::nullopt;
    case BoolExpr::Kind::And: {
      std::optional<std::vector<size_t>> acc;
      for (const auto& c : e.children) {
        auto s = index_candidates(c, corpus, index);
        if (!s) continue;
        acc = acc ? intersect(*acc, *s) : std::move(*s);
      }
      return acc;
    }
    case BoolExpr::Kind::Or: {
      std::vector<size_t> acc;
      for (const auto& c : e.children) {
        auto s = index_candidates(c, corpus, index);
        if (!s) return std::nullopt;
        acc = unite(acc, *s);
      }
      return acc;
    }
  }
  return std::nullopt;
}

std::vector<size_t> all_records(const Corpus& corpus) {
  std::vector<size_t> out(corpus.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

void apply_superlatives(const std::vector<Condition>& stage4, const Corpus& corpus, std::vector<size_t>& rs) {
  for (const auto& s : stage4) {
    auto idx = corpus.schema().index_of(*s.attribute);
    if (!idx) {
      rs.clear();
      return;
    }
    std::optional<double> best;
    for (size_t r : rs) {
      auto v = corpus.numeric(*idx, r);
      if (!v) continue;
      if (!best || (*s.superlative == Extreme::Min ? *v < *best : *v > *best)) best = v;
    }
    std::erase_if(rs, [&](size_t r) {
      auto v = corpus.numeric(*idx, r);
      return !v || !best || *v != *best;
    });
  }
}

bool unit_holds(const BoolExpr& unit, const Corpus& corpus, size_t r) {
  return evaluate(unit, [&](const Condition& c) { return satisfies(c, corpus, r); });
}

}  // namespace

QueryPlan plan(const BoolExpr& expr, size_t answer_cap) {
  validate(expr);
  QueryPlan p;
  p.answer_cap = answer_cap;
  std::vector<BoolExpr> filters;
  auto take = [&](const BoolExpr& e) {
    if (e.kind == BoolExpr::Kind::Leaf && e.condition.superlative) {
      p.stage4.push_back(e.condition);
    } else {
      filters.push_back(e);
    }
  };
  if (expr.kind == BoolExpr::Kind::And) {
    for (const auto& c : expr.children) take(c);
  } else {
    take(expr);
  }
  if (!filters.empty()) p.overlay = BoolExpr::all_of(std::move(filters));
  if (p.overlay) {
    const BoolExpr& o = *p.overlay;
    p.conjunctive = o.kind == BoolExpr::Kind::Leaf ||
                    (o.kind == BoolExpr::Kind::And &&
                     std::all_of(o.children.begin(), o.children.end(),
                                 [](const BoolExpr& c) { return c.kind == BoolExpr::Kind::Leaf; }));
    for (const Condition* c : leaves(o)) {
      switch (c->attr_type) {
        case AttrType::TypeI: p.stage1.push_back(*c); break;
        case AttrType::TypeII: p.stage2.push_back(*c); break;
        case AttrType::TypeIII: p.stage3.push_back(*c); break;
      }
    }
  }
  return p;
}

std::string to_sql(const QueryPlan& p, const DomainSchema& schema, bool relaxed) {
  std::string where;
  if (p.overlay && p.conjunctive) {
    // staged order: Type I, Type II, then Type III sub-selects
    std::vector<const Condition*> staged;
    for (const auto* stage : {&p.stage1, &p.stage2, &p.stage3}) {
      for (const auto& c : *stage) staged.push_back(&c);
    }
    for (size_t i = 0; i < staged.size(); ++i) {
      if (i) where += relaxed ? " OR " : " AND ";
      where += fmt::format("{} IN\n{}", schema.id_column, subselect(*staged[i], schema));
    }
  } else if (p.overlay) {
    where = expr_sql(*p.overlay, schema, relaxed);
  }
  std::string sql = fmt::format("SELECT * FROM {}", schema.table);
  if (!where.empty()) sql += " WHERE " + where;
  if (!p.stage4.empty()) {
    sql += "\nORDER BY ";
    for (size_t i = 0; i < p.stage4.size(); ++i) {
      if (i) sql += ", ";
      const AttributeDecl* a = schema.find(*p.stage4[i].attribute);
      sql += fmt::format("{} {}", a ? a->name : *p.stage4[i].attribute,
                         *p.stage4[i].superlative == Extreme::Min ? "ASC" : "DESC");
    }
    sql += fmt::format(" LIMIT {}", p.answer_cap);
  }
  return sql;
}

std::vector<std::string> SubstringIndex::keys_of(std::string_view value, size_t gram) {
  const std::string v = normalize_value(value);
  std::vector<std::string> out;
  if (v.empty()) return out;
  if (v.size() < gram) return {v};
  std::set<std::string> seen;
  for (size_t i = 0; i + gram <= v.size(); ++i) {
    std::string k = v.substr(i, gram);
    if (seen.insert(k).second) out.push_back(std::move(k));
  }
  return out;
}

SubstringIndex SubstringIndex::build(const Corpus& corpus, size_t gram) {
  if (gram == 0) throw Error("substring index needs a positive gram length");
  SubstringIndex ix;
  ix.gram_ = gram;
  const size_t nattr = corpus.schema().attributes.size();
  ix.postings_.resize(nattr);
  ix.values_.resize(nattr);
  for (size_t a = 0; a < nattr; ++a) {
    if (corpus.schema().attributes[a].kind != ValueKind::Categorical) continue;
    for (size_t r = 0; r < corpus.size(); ++r) {
      const std::string* v = corpus.categorical(a, r);
      if (!v) continue;
      ix.values_[a][*v].push_back(r);
      for (auto& k : keys_of(*v, gram)) ix.postings_[a][k].push_back(r);
    }
  }
  return ix;
}

std::vector<size_t> SubstringIndex::lookup(size_t attr, std::string_view wanted) const {
  if (attr >= postings_.size()) return {};
  const std::string w = normalize_value(wanted);
  if (w.empty()) return {};
  const auto& grams = postings_[attr];
  const auto& dict = values_[attr];

  // equal values: every key of the wanted text must be present
  std::vector<size_t> exact;
  bool first = true;
  for (const auto& k : keys_of(w, gram_)) {
    auto it = grams.find(k);
    if (it == grams.end()) {
      exact.clear();
      first = false;
      break;
    }
    exact = first ? it->second : intersect(exact, it->second);
    first = false;
  }
  auto same = dict.find(w);
  std::vector<size_t> out;
  if (same != dict.end()) {
    // the gram candidates are a superset of the records holding `w` itself
    out = intersect(exact, same->second);
  }
  // shorthand variants differ in text, so they are found through the value
  // dictionary
  for (const auto& [value, recs] : dict) {
    if (value == w || value.empty()) continue;
    if (categorical_match(w, value)) out = unite(out, recs);
  }
  return out;
}

size_t SubstringIndex::key_count() const {
  size_t n = 0;
  for (const auto& m : postings_) n += m.size();
  return n;
}

std::string SubstringIndex::to_json() const {
  json attrs = json::array();
  for (size_t a = 0; a < postings_.size(); ++a) {
    std::map<std::string, std::vector<size_t>> sorted(postings_[a].begin(), postings_[a].end());
    attrs.push_back(sorted);
  }
  return json{{"gram", gram_}, {"postings", attrs}}.dump();
}

std::string_view to_string(MatchKind k) { return k == MatchKind::Exact ? "exact" : "partial"; }

std::vector<size_t> matching_records(const QueryPlan& p, const Corpus& corpus, const SubstringIndex* index) {
  std::vector<size_t> rs;
  if (!p.overlay) {
    rs = all_records(corpus);
  } else {
    std::optional<std::vector<size_t>> cand;
    if (index) cand = index_candidates(*p.overlay, corpus, *index);
    rs = cand ? std::move(*cand) : all_records(corpus);
    if (p.conjunctive) {
      for (const auto* stage : {&p.stage1, &p.stage2, &p.stage3}) {
        for (const auto& c : *stage) {
          std::erase_if(rs, [&](size_t r) { return !satisfies(c, corpus, r); });
        }
      }
    } else {
      std::erase_if(rs, [&](size_t r) { return !unit_holds(*p.overlay, corpus, r); });
    }
  }
  apply_superlatives(p.stage4, corpus, rs);
  return rs;
}

std::vector<std::vector<BoolExpr>> conjunctive_terms(const BoolExpr& e, size_t max_terms) {
  switch (e.kind) {
    case BoolExpr::Kind::Leaf:
    case BoolExpr::Kind::Not: return {{e}};
    case BoolExpr::Kind::Or: {
      if (std::all_of(e.children.begin(), e.children.end(), is_literal)) return {{e}};
      std::vector<std::vector<BoolExpr>> out;
      for (const auto& c : e.children) {
        for (auto& t : conjunctive_terms(c, max_terms)) {
          if (out.size() < max_terms) out.push_back(std::move(t));
        }
      }
      return out;
    }
    case BoolExpr::Kind::And: {
      std::vector<std::vector<BoolExpr>> acc{{}};
      for (const auto& c : e.children) {
        auto d = conjunctive_terms(c, max_terms);
        std::vector<std::vector<BoolExpr>> next;
        for (const auto& a : acc) {
          for (const auto& b : d) {
            if (next.size() >= max_terms) break;
            auto t = a;
            t.insert(t.end(), b.begin(), b.end());
            next.push_back(std::move(t));
          }
        }
        acc = std::move(next);
      }
      return acc;
    }
  }
  return {};
}

std::vector<MatchResult> execute(const QueryPlan& p, const Corpus& corpus, const SubstringIndex* index) {
  auto rs = matching_records(p, corpus, index);
  if (rs.size() > p.answer_cap) rs.resize(p.answer_cap);
  std::vector<std::vector<BoolExpr>> terms;
  if (p.overlay) terms = conjunctive_terms(*p.overlay);
  std::vector<MatchResult> out;
  for (size_t r : rs) {
    MatchResult m;
    m.record = r;
    m.record_id = corpus.records()[r].id;
    m.kind = MatchKind::Exact;
    for (const auto& t : terms) {
      bool all = std::all_of(t.begin(), t.end(), [&](const BoolExpr& u) { return unit_holds(u, corpus, r); });
      if (all) {
        m.conditions = t.size();
        break;
      }
    }
    m.conditions += p.stage4.size();
    m.satisfied = m.conditions;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<MatchResult> relax_n_minus_1(const QueryPlan& p, const Corpus& corpus,
                                         const std::vector<size_t>& exact) {
  std::vector<MatchResult> out;
  if (!p.overlay) return out;
  const std::set<size_t> excluded(exact.begin(), exact.end());
  std::set<size_t> taken;
  for (const auto& term : conjunctive_terms(*p.overlay)) {
    const size_t n = term.size();
    for (size_t r = 0; r < corpus.size(); ++r) {
      if (excluded.count(r) || taken.count(r)) continue;
      std::optional<size_t> failed;
      bool more_than_one = false;
      for (size_t u = 0; u < n && !more_than_one; ++u) {
        if (unit_holds(term[u], corpus, r)) continue;
        if (failed) more_than_one = true;
        failed = u;
      }
      if (!failed || more_than_one) continue;
      MatchResult m;
      m.record = r;
      m.record_id = corpus.records()[r].id;
      m.kind = MatchKind::Partial;
      m.conditions = n;
      m.satisfied = n - 1;
      m.dropped = term[*failed];
      out.push_back(std::move(m));
      taken.insert(r);
    }
  }
  std::sort(out.begin(), out.end(), [](const MatchResult& a, const MatchResult& b) { return a.record < b.record; });
  return out;
}

}  // namespace adsqa
