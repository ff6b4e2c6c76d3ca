#include "adsqa/boolean.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "adsqa/errors.hpp"

namespace adsqa {

BoolExpr BoolExpr::leaf(Condition c) {
  BoolExpr e;
  c.negated = false;
  e.condition = std::move(c);
  return e;
}

BoolExpr BoolExpr::negation(Condition c) {
  BoolExpr e;
  e.kind = Kind::Not;
  e.children.push_back(leaf(std::move(c)));
  return e;
}

BoolExpr BoolExpr::from_condition(Condition c) {
  // an extreme cannot be negated meaningfully; the keyword is ignored
  if (c.negated && !c.superlative) return negation(std::move(c));
  return leaf(std::move(c));
}

namespace {

BoolExpr combine(BoolExpr::Kind kind, std::vector<BoolExpr> parts) {
  std::vector<BoolExpr> flat;
  for (auto& p : parts) {
    if (p.kind == kind) {
      for (auto& c : p.children) flat.push_back(std::move(c));
    } else {
      flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) throw Error("empty Boolean combination");
  if (flat.size() == 1) return std::move(flat.front());
  std::stable_sort(flat.begin(), flat.end(),
                   [](const BoolExpr& a, const BoolExpr& b) { return a.position() < b.position(); });
  BoolExpr e;
  e.kind = kind;
  e.children = std::move(flat);
  return e;
}

}  // namespace

BoolExpr BoolExpr::all_of(std::vector<BoolExpr> parts) { return combine(Kind::And, std::move(parts)); }
BoolExpr BoolExpr::any_of(std::vector<BoolExpr> parts) { return combine(Kind::Or, std::move(parts)); }

size_t BoolExpr::position() const {
  if (kind == Kind::Leaf) return condition.tokens.first;
  size_t p = std::numeric_limits<size_t>::max();
  for (const auto& c : children) p = std::min(p, c.position());
  return p;
}

void validate(const BoolExpr& e) {
  switch (e.kind) {
    case BoolExpr::Kind::Leaf:
      if (!e.children.empty()) throw Error("leaf with children");
      return;
    case BoolExpr::Kind::Not:
      if (e.children.size() != 1 || e.children.front().kind != BoolExpr::Kind::Leaf) {
        throw Error("NOT must wrap exactly one leaf");
      }
      return;
    case BoolExpr::Kind::And:
    case BoolExpr::Kind::Or:
      if (e.children.size() < 2) throw Error("AND/OR needs at least two children");
      for (const auto& c : e.children) validate(c);
      return;
  }
}

std::string to_string(const BoolExpr& e) {
  switch (e.kind) {
    case BoolExpr::Kind::Leaf: return describe(e.condition);
    case BoolExpr::Kind::Not: return "NOT " + to_string(e.children.front());
    case BoolExpr::Kind::And:
    case BoolExpr::Kind::Or: {
      const char* sep = e.kind == BoolExpr::Kind::And ? " AND " : " OR ";
      std::string out;
      for (size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += sep;
        const auto& c = e.children[i];
        const bool compound = c.kind == BoolExpr::Kind::And || c.kind == BoolExpr::Kind::Or;
        out += compound ? "(" + to_string(c) + ")" : to_string(c);
      }
      return out;
    }
  }
  return {};
}

std::vector<const Condition*> leaves(const BoolExpr& e) {
  std::vector<const Condition*> out;
  std::vector<const BoolExpr*> stack{&e};
  while (!stack.empty()) {
    const BoolExpr* n = stack.back();
    stack.pop_back();
    if (n->kind == BoolExpr::Kind::Leaf) {
      out.push_back(&n->condition);
      continue;
    }
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) stack.push_back(&*it);
  }
  return out;
}

namespace {

bool bears_condition(IdKind k) {
  switch (k) {
    case IdKind::TypeIValue:
    case IdKind::TypeIIValue:
    case IdKind::TypeIIINumber:
    case IdKind::ComparatorLess:
    case IdKind::ComparatorGreater:
    case IdKind::ComparatorEqual:
    case IdKind::Between:
    case IdKind::SuperlativeComplete:
    case IdKind::SuperlativePartial: return true;
    default: return false;
  }
}

Comparator complement(Comparator c) {
  switch (c) {
    case Comparator::Lt: return Comparator::Ge;
    case Comparator::Le: return Comparator::Gt;
    case Comparator::Gt: return Comparator::Le;
    case Comparator::Ge: return Comparator::Lt;
    default: return c;
  }
}

}  // namespace

void detect_negation(std::vector<TaggedToken>& tokens) {
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind() != IdKind::Negation) continue;
    size_t j = i + 1;
    while (j < tokens.size() && !bears_condition(tokens[j].kind())) ++j;
    if (j == tokens.size()) throw AnalysisError(fmt::format("dangling negation '{}'", tokens[i].surface));
    tokens[j].negated = true;
  }
}

bool mutually_exclusive(const Condition& a, const Condition& b, const DomainSchema& schema) {
  if (a.superlative || b.superlative) return false;
  if (a.comparator != Comparator::Eq || b.comparator != Comparator::Eq) return false;
  if (a.attr_type == AttrType::TypeIII || b.attr_type == AttrType::TypeIII) return false;
  if (!a.attribute || !b.attribute) return false;
  const AttributeDecl* da = schema.find(*a.attribute);
  const AttributeDecl* db = schema.find(*b.attribute);
  if (!da || da != db || da->type == AttrType::TypeIII) return false;
  return !categorical_match(a.text, b.text);
}

std::vector<Condition> combine_type3(const std::vector<Condition>& same_attribute) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  NumericRange acc{-inf, inf, false, false};
  const Condition* first = nullptr;
  size_t last_token = 0;
  std::vector<Condition> out;
  for (const auto& c : same_attribute) {
    if (!c.is_numeric_filter()) throw Error("combine_type3 expects numeric filters");
    if (c.negated && (c.comparator == Comparator::Eq || c.comparator == Comparator::Between)) {
      out.push_back(c);
      continue;
    }
    Condition p = c;
    if (p.negated) {
      p.comparator = complement(p.comparator);
      p.negated = false;
    }
    const NumericRange r = p.interval();
    if (r.low > acc.low) {
      acc.low = r.low;
      acc.low_inclusive = r.low_inclusive;
    } else if (r.low == acc.low) {
      acc.low_inclusive = acc.low_inclusive && r.low_inclusive;
    }
    if (r.high < acc.high) {
      acc.high = r.high;
      acc.high_inclusive = r.high_inclusive;
    } else if (r.high == acc.high) {
      acc.high_inclusive = acc.high_inclusive && r.high_inclusive;
    }
    if (!first) first = &c;
    last_token = std::max(last_token, c.tokens.second);
  }
  if (first) {
    if (acc.low > acc.high || (acc.low == acc.high && !(acc.low_inclusive && acc.high_inclusive))) {
      throw ContradictionError();
    }
    Condition m = *first;
    m.negated = false;
    m.tokens.second = std::max(m.tokens.second, last_token);
    const bool has_low = acc.low > -inf;
    const bool has_high = acc.high < inf;
    if (has_low && has_high && acc.low == acc.high) {
      m.comparator = Comparator::Eq;
      m.number = acc.low;
    } else if (has_low && has_high) {
      m.comparator = Comparator::Between;
      m.range = acc;
    } else if (has_low) {
      m.comparator = acc.low_inclusive ? Comparator::Ge : Comparator::Gt;
      m.number = acc.low;
    } else {
      m.comparator = acc.high_inclusive ? Comparator::Le : Comparator::Lt;
      m.number = acc.high;
    }
    if (m.comparator != Comparator::Between) m.range = {};
    out.push_back(std::move(m));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Condition& a, const Condition& b) { return a.tokens.first < b.tokens.first; });
  return out;
}

std::vector<Condition> merge_type3(const std::vector<Condition>& conditions) {
  std::vector<Condition> out;
  size_t i = 0;
  while (i < conditions.size()) {
    if (conditions[i].attr_type == AttrType::TypeI) {
      out.push_back(conditions[i++]);
      continue;
    }
    // stretch up to the next Type I value
    size_t j = i;
    while (j < conditions.size() && conditions[j].attr_type != AttrType::TypeI) ++j;
    std::map<std::string, std::vector<Condition>> groups;
    for (size_t k = i; k < j; ++k) {
      if (conditions[k].is_numeric_filter()) {
        groups[conditions[k].merge_key()].push_back(conditions[k]);
      } else {
        out.push_back(conditions[k]);
      }
    }
    for (auto& [key, group] : groups) {
      for (auto& c : combine_type3(group)) out.push_back(std::move(c));
    }
    i = j;
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Condition& a, const Condition& b) { return a.tokens.first < b.tokens.first; });
  return out;
}

std::optional<BoolExpr> normalize_explicit(const std::vector<TaggedToken>& tokens,
                                           const std::vector<Condition>& conditions) {
  std::vector<size_t> connectives;
  bool only_or = true;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const IdKind k = tokens[i].kind();
    if (k != IdKind::And && k != IdKind::Or) continue;
    const bool inside = std::any_of(conditions.begin(), conditions.end(), [&](const Condition& c) {
      return c.tokens.first < i && i < c.tokens.second;
    });
    if (inside) continue;
    connectives.push_back(i);
    if (k != IdKind::Or) only_or = false;
  }
  if (connectives.empty() || !only_or) return std::nullopt;
  // each stretch between connectives must hold exactly one condition
  std::vector<size_t> per_segment(connectives.size() + 1, 0);
  for (const auto& c : conditions) {
    if (c.superlative) return std::nullopt;
    size_t seg = 0;
    while (seg < connectives.size() && connectives[seg] < c.tokens.first) ++seg;
    if (seg < connectives.size() && c.tokens.second > connectives[seg]) return std::nullopt;
    ++per_segment[seg];
  }
  for (size_t n : per_segment) {
    if (n != 1) return std::nullopt;
  }
  std::vector<BoolExpr> parts;
  for (const auto& c : conditions) parts.push_back(BoolExpr::from_condition(c));
  return BoolExpr::any_of(std::move(parts));
}

namespace {

struct Cluster {
  // each slot is ORed internally; slots are ANDed
  std::vector<std::vector<size_t>> slots;
  size_t first = 0;
  size_t last = 0;
  bool has_type2_group = false;
  bool has_type3_group = false;
  std::vector<size_t> groups;
};

struct Group {
  AttrType type = AttrType::TypeII;
  size_t first = 0;
  size_t last = 0;
};

// Type II: plain values of one attribute are ORed when mutually exclusive;
// everything else is ANDed. Type III: every merged bound is ANDed.
BoolExpr group_expr(const std::vector<Condition>& cs, const Group& g, const DomainSchema& schema) {
  std::vector<std::vector<size_t>> slots;
  for (size_t k = g.first; k <= g.last; ++k) {
    const Condition& c = cs[k];
    bool placed = false;
    if (!c.negated && g.type == AttrType::TypeII) {
      for (auto& slot : slots) {
        const Condition& head = cs[slot.front()];
        if (head.negated) continue;
        bool all_exclusive = std::all_of(slot.begin(), slot.end(),
                                         [&](size_t m) { return mutually_exclusive(cs[m], c, schema); });
        if (all_exclusive) {
          slot.push_back(k);
          placed = true;
          break;
        }
      }
    }
    if (!placed) slots.push_back({k});
  }
  std::vector<BoolExpr> parts;
  for (const auto& slot : slots) {
    std::vector<BoolExpr> alts;
    for (size_t m : slot) alts.push_back(BoolExpr::from_condition(cs[m]));
    parts.push_back(BoolExpr::any_of(std::move(alts)));
  }
  return BoolExpr::all_of(std::move(parts));
}

// Directly ANDed plain leaves that exclude each other become an OR.
void fold_exclusive(BoolExpr& e, const DomainSchema& schema) {
  for (auto& c : e.children) fold_exclusive(c, schema);
  if (e.kind != BoolExpr::Kind::And) return;
  std::vector<BoolExpr> kept;
  std::vector<std::vector<BoolExpr>> buckets;
  for (auto& c : e.children) {
    if (c.kind != BoolExpr::Kind::Leaf) {
      kept.push_back(std::move(c));
      continue;
    }
    bool placed = false;
    for (auto& b : buckets) {
      bool excl = std::all_of(b.begin(), b.end(), [&](const BoolExpr& x) {
        return mutually_exclusive(x.condition, c.condition, schema);
      });
      if (excl) {
        b.push_back(std::move(c));
        placed = true;
        break;
      }
    }
    if (!placed) buckets.push_back({});
    if (!placed) buckets.back().push_back(std::move(c));
  }
  for (auto& b : buckets) kept.push_back(BoolExpr::any_of(std::move(b)));
  e = BoolExpr::all_of(std::move(kept));
}

}  // namespace

BoolExpr interpret_implicit(const std::vector<Condition>& cs, const DomainSchema& schema) {
  if (cs.empty()) throw AnalysisError("no conditions extracted");

  std::vector<Cluster> clusters;
  std::vector<Group> groups;
  std::vector<size_t> superlatives;
  for (size_t k = 0; k < cs.size(); ++k) {
    const Condition& c = cs[k];
    if (c.superlative) {
      superlatives.push_back(k);
      continue;
    }
    if (c.attr_type == AttrType::TypeI) {
      if (!clusters.empty()) {
        Cluster& cur = clusters.back();
        auto& last_slot = cur.slots.back();
        const Condition& prev = cs[last_slot.back()];
        const bool adjacent = cur.last + 1 == k;
        if (!c.negated && !prev.negated && adjacent && prev.attribute == c.attribute &&
            mutually_exclusive(prev, c, schema)) {
          last_slot.push_back(k);
          cur.last = k;
          continue;
        }
        const bool attribute_taken =
            std::any_of(cur.slots.begin(), cur.slots.end(),
                        [&](const std::vector<size_t>& s) { return cs[s.front()].attribute == c.attribute; });
        if (!attribute_taken) {
          cur.slots.push_back({k});
          cur.last = k;
          continue;
        }
      }
      Cluster fresh;
      fresh.slots.push_back({k});
      fresh.first = fresh.last = k;
      clusters.push_back(std::move(fresh));
      continue;
    }
    if (!groups.empty() && groups.back().type == c.attr_type && groups.back().last + 1 == k) {
      groups.back().last = k;
    } else {
      groups.push_back({c.attr_type, k, k});
    }
  }

  std::vector<BoolExpr> unattached;
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    const Group& g = groups[gi];
    std::vector<std::pair<std::pair<size_t, int>, size_t>> order;  // ((distance, side), cluster)
    for (size_t ci = 0; ci < clusters.size(); ++ci) {
      const Cluster& cl = clusters[ci];
      if (cl.first > g.last) {
        order.push_back({{cl.first - g.last, 0}, ci});
      } else {
        order.push_back({{g.first - cl.last, 1}, ci});
      }
    }
    std::sort(order.begin(), order.end());
    bool attached = false;
    for (const auto& [key, ci] : order) {
      Cluster& cl = clusters[ci];
      bool& taken = g.type == AttrType::TypeII ? cl.has_type2_group : cl.has_type3_group;
      if (taken) continue;
      taken = true;
      cl.groups.push_back(gi);
      attached = true;
      break;
    }
    if (!attached) unattached.push_back(group_expr(cs, g, schema));
  }

  std::vector<BoolExpr> subexpressions;
  for (const auto& cl : clusters) {
    std::vector<BoolExpr> parts;
    for (const auto& slot : cl.slots) {
      std::vector<BoolExpr> alts;
      for (size_t m : slot) alts.push_back(BoolExpr::from_condition(cs[m]));
      parts.push_back(BoolExpr::any_of(std::move(alts)));
    }
    for (size_t gi : cl.groups) parts.push_back(group_expr(cs, groups[gi], schema));
    subexpressions.push_back(BoolExpr::all_of(std::move(parts)));
  }

  std::vector<BoolExpr> root;
  if (!subexpressions.empty()) root.push_back(BoolExpr::any_of(std::move(subexpressions)));
  for (auto& u : unattached) root.push_back(std::move(u));
  for (size_t k : superlatives) root.push_back(BoolExpr::from_condition(cs[k]));
  BoolExpr out = BoolExpr::all_of(std::move(root));
  fold_exclusive(out, schema);
  return out;
}

BoolExpr interpret(const std::vector<TaggedToken>& tokens, const std::vector<Condition>& conditions,
                   const DomainSchema& schema) {
  if (conditions.empty()) throw AnalysisError("no conditions extracted");
  if (auto flat = normalize_explicit(tokens, conditions)) return *flat;
  return interpret_implicit(merge_type3(conditions), schema);
}

}  // namespace adsqa
