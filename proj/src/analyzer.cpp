#include "adsqa/analyzer.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "adsqa/errors.hpp"

namespace adsqa {

std::string_view to_string(Comparator c) {
  switch (c) {
    case Comparator::Eq: return "=";
    case Comparator::Lt: return "<";
    case Comparator::Le: return "<=";
    case Comparator::Gt: return ">";
    case Comparator::Ge: return ">=";
    case Comparator::Between: return "between";
  }
  return "?";
}

std::vector<std::string> Condition::attributes() const {
  if (attribute) return {*attribute};
  return candidate_attributes;
}

std::string Condition::attribute_label() const {
  if (attribute) return *attribute;
  std::string out = "{";
  for (size_t i = 0; i < candidate_attributes.size(); ++i) {
    if (i) out += '|';
    out += candidate_attributes[i];
  }
  return out + "}";
}

std::string Condition::merge_key() const { return attribute_label(); }

NumericRange Condition::interval() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (comparator) {
    case Comparator::Eq: return {number, number, true, true};
    case Comparator::Lt: return {-inf, number, false, false};
    case Comparator::Le: return {-inf, number, false, true};
    case Comparator::Gt: return {number, inf, false, false};
    case Comparator::Ge: return {number, inf, true, false};
    case Comparator::Between: return range;
  }
  return range;
}

std::string describe(const Condition& c) {
  if (c.superlative) {
    return fmt::format("{}({})", *c.superlative == Extreme::Min ? "MIN" : "MAX", c.attribute_label());
  }
  if (c.attr_type != AttrType::TypeIII) return c.display;
  if (c.comparator == Comparator::Between) {
    return fmt::format("{} between {}{}, {}{}", c.attribute_label(), c.range.low_inclusive ? '[' : '(',
                       format_number(c.range.low), format_number(c.range.high),
                       c.range.high_inclusive ? ']' : ')');
  }
  return fmt::format("{} {} {}", c.attribute_label(), to_string(c.comparator), format_number(c.number));
}

std::vector<std::string> infer_missing_attribute(double value, const Corpus& corpus) {
  std::vector<std::string> out;
  for (const auto& a : corpus.schema().attributes) {
    if (a.type != AttrType::TypeIII) continue;
    auto r = corpus.try_valid_range(a.name);
    if (r && r->contains(value)) out.push_back(a.name);
  }
  if (out.empty()) throw AnalysisError(fmt::format("value fits no attribute: {}", format_number(value)));
  return out;
}

namespace {

bool is_number(const TaggedToken& t) { return t.kind() == IdKind::TypeIIINumber; }

// Type III attribute named by an attribute word or a unit token.
std::optional<std::string> attribute_hint(const TaggedToken& t) {
  if (t.kind() == IdKind::TypeIIIAttribute || t.kind() == IdKind::Unit) return t.identifier.attribute;
  return std::nullopt;
}

Comparator comparator_of(const Identifier& id) {
  switch (id.kind) {
    case IdKind::ComparatorLess: return id.inclusive ? Comparator::Le : Comparator::Lt;
    case IdKind::ComparatorGreater: return id.inclusive ? Comparator::Ge : Comparator::Gt;
    default: return Comparator::Eq;
  }
}

class Extractor {
 public:
  Extractor(const std::vector<TaggedToken>& tokens, const Corpus& corpus)
      : t_(tokens), corpus_(corpus), used_(tokens.size(), false) {}

  std::vector<Condition> run() {
    for (size_t i = 0; i < t_.size(); ++i) {
      if (is_comparator(t_[i].kind())) boundary(i);
      if (t_[i].kind() == IdKind::Between) between(i);
    }
    for (size_t i = 0; i < t_.size(); ++i) {
      if (t_[i].kind() == IdKind::SuperlativeComplete || t_[i].kind() == IdKind::SuperlativePartial) {
        superlative(i);
      }
    }
    for (size_t i = 0; i < t_.size(); ++i) {
      if (is_number(t_[i]) && !used_[i]) bare_number(i);
    }
    for (size_t i = 0; i < t_.size(); ++i) {
      const IdKind k = t_[i].kind();
      if (k != IdKind::TypeIValue && k != IdKind::TypeIIValue) continue;
      Condition c;
      c.attr_type = k == IdKind::TypeIValue ? AttrType::TypeI : AttrType::TypeII;
      c.attribute = t_[i].identifier.attribute;
      c.text = normalize_value(t_[i].identifier.literal);
      c.display = t_[i].identifier.display.empty() ? t_[i].surface : t_[i].identifier.display;
      c.negated = t_[i].negated;
      c.tokens = {i, i};
      used_[i] = true;
      out_.push_back(std::move(c));
    }
    std::stable_sort(out_.begin(), out_.end(),
                     [](const Condition& a, const Condition& b) { return a.tokens.first < b.tokens.first; });
    return std::move(out_);
  }

 private:
  std::optional<size_t> next_number(size_t from) const {
    for (size_t j = from; j < t_.size(); ++j) {
      if (is_number(t_[j]) && !used_[j]) return j;
    }
    return std::nullopt;
  }

  // Unused attribute word or unit directly before `i` or directly after `j`.
  std::optional<std::pair<size_t, std::string>> adjacent_attribute(size_t i, size_t j) const {
    if (i > 0 && !used_[i - 1]) {
      if (auto a = attribute_hint(t_[i - 1])) return std::make_pair(i - 1, *a);
    }
    if (j + 1 < t_.size() && !used_[j + 1]) {
      if (auto a = attribute_hint(t_[j + 1])) return std::make_pair(j + 1, *a);
    }
    return std::nullopt;
  }

  // Sets attribute (or candidates) for a numeric condition spanning tokens
  // [first, last] whose values are `values`.
  void resolve_attribute(Condition& c, size_t first, size_t last, std::optional<std::string> known,
                         const std::vector<double>& values) {
    if (!known) {
      if (auto adj = adjacent_attribute(first, last)) {
        known = adj->second;
        used_[adj->first] = true;
        c.tokens.first = std::min(c.tokens.first, adj->first);
        c.tokens.second = std::max(c.tokens.second, adj->first);
      }
    }
    if (known) {
      c.attribute = *known;
      return;
    }
    std::vector<std::string> cands = infer_missing_attribute(values.front(), corpus_);
    for (size_t k = 1; k < values.size(); ++k) {
      auto more = infer_missing_attribute(values[k], corpus_);
      std::erase_if(cands, [&](const std::string& a) {
        return std::find(more.begin(), more.end(), a) == more.end();
      });
    }
    if (cands.empty()) throw AnalysisError("value fits no attribute");
    if (cands.size() == 1) {
      c.attribute = cands.front();
    } else {
      c.candidate_attributes = std::move(cands);
    }
  }

  void boundary(size_t i) {
    auto j = next_number(i + 1);
    if (!j) throw AnalysisError(fmt::format("dangling comparator '{}'", t_[i].surface));
    Condition c;
    c.attr_type = AttrType::TypeIII;
    c.comparator = comparator_of(t_[i].identifier);
    c.number = *t_[*j].identifier.number;
    c.negated = t_[i].negated || t_[*j].negated;
    c.tokens = {i, *j};
    c.display = fmt::format("{} {}", t_[i].surface, t_[*j].surface);
    used_[i] = used_[*j] = true;
    std::optional<std::string> known = t_[*j].identifier.attribute;
    if (!known) known = t_[i].identifier.attribute;
    resolve_attribute(c, i, *j, known, {c.number});
    out_.push_back(std::move(c));
  }

  void between(size_t i) {
    auto j1 = next_number(i + 1);
    auto j2 = j1 ? next_number(*j1 + 1) : std::nullopt;
    if (!j1 || !j2) throw AnalysisError(fmt::format("dangling comparator '{}'", t_[i].surface));
    const double a = *t_[*j1].identifier.number;
    const double b = *t_[*j2].identifier.number;
    Condition c;
    c.attr_type = AttrType::TypeIII;
    c.comparator = Comparator::Between;
    c.range = {std::min(a, b), std::max(a, b), true, true};
    c.negated = t_[i].negated || t_[*j1].negated || t_[*j2].negated;
    c.tokens = {i, *j2};
    c.display = fmt::format("{} {} and {}", t_[i].surface, t_[*j1].surface, t_[*j2].surface);
    used_[i] = used_[*j1] = used_[*j2] = true;
    std::optional<std::string> known = t_[*j1].identifier.attribute;
    if (!known) known = t_[*j2].identifier.attribute;
    resolve_attribute(c, i, *j2, known, {a, b});
    out_.push_back(std::move(c));
  }

  void superlative(size_t i) {
    Condition c;
    c.attr_type = AttrType::TypeIII;
    c.superlative = t_[i].identifier.extreme.value_or(Extreme::Min);
    c.negated = t_[i].negated;
    c.tokens = {i, i};
    c.display = t_[i].surface;
    used_[i] = true;
    if (t_[i].kind() == IdKind::SuperlativeComplete && t_[i].identifier.attribute) {
      c.attribute = t_[i].identifier.attribute;
    } else {
      // nearest following attribute word, then nearest preceding one
      std::optional<size_t> hit;
      for (size_t j = i + 1; j < t_.size() && !hit; ++j) {
        if (!used_[j] && attribute_hint(t_[j])) hit = j;
      }
      for (size_t j = i; j-- > 0 && !hit;) {
        if (!used_[j] && attribute_hint(t_[j])) hit = j;
      }
      if (!hit) throw AnalysisError(fmt::format("dangling superlative '{}'", t_[i].surface));
      c.attribute = attribute_hint(t_[*hit]);
      used_[*hit] = true;
      c.tokens = {std::min(i, *hit), std::max(i, *hit)};
      c.display = fmt::format("{} {}", t_[c.tokens.first].surface, t_[c.tokens.second].surface);
    }
    out_.push_back(std::move(c));
  }

  void bare_number(size_t i) {
    Condition c;
    c.attr_type = AttrType::TypeIII;
    c.comparator = Comparator::Eq;
    c.number = *t_[i].identifier.number;
    c.negated = t_[i].negated;
    c.tokens = {i, i};
    c.display = t_[i].surface;
    used_[i] = true;
    resolve_attribute(c, i, i, t_[i].identifier.attribute, {c.number});
    out_.push_back(std::move(c));
  }

  const std::vector<TaggedToken>& t_;
  const Corpus& corpus_;
  std::vector<bool> used_;
  std::vector<Condition> out_;
};

}  // namespace

std::vector<Condition> extract_conditions(const std::vector<TaggedToken>& tokens, const Corpus& corpus) {
  return Extractor(tokens, corpus).run();
}

bool categorical_match(std::string_view wanted, std::string_view stored) {
  if (wanted == stored) return true;
  if (wanted.empty() || stored.empty()) return false;
  const std::string a = shorthand_key(wanted);
  const std::string b = shorthand_key(stored);
  if (a.empty() || b.empty() || a[0] != b[0]) return false;
  return is_subsequence(a, b) || is_subsequence(b, a);
}

bool satisfies(const Condition& c, const Corpus& corpus, size_t r) {
  if (c.superlative) return true;
  const DomainSchema& schema = corpus.schema();
  if (c.attr_type != AttrType::TypeIII) {
    auto idx = schema.index_of(*c.attribute);
    if (!idx) return false;
    const std::string* v = corpus.categorical(*idx, r);
    return v && categorical_match(c.text, *v);
  }
  for (const auto& name : c.attributes()) {
    auto idx = schema.index_of(name);
    if (!idx) continue;
    auto v = corpus.numeric(*idx, r);
    if (!v) continue;
    bool ok = false;
    switch (c.comparator) {
      case Comparator::Eq: ok = *v == c.number; break;
      case Comparator::Lt: ok = *v < c.number; break;
      case Comparator::Le: ok = *v <= c.number; break;
      case Comparator::Gt: ok = *v > c.number; break;
      case Comparator::Ge: ok = *v >= c.number; break;
      case Comparator::Between: ok = c.range.contains(*v); break;
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace adsqa
