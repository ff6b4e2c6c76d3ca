#include "adsqa/lexicon.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>
#include <json.hpp>

#include "adsqa/errors.hpp"

namespace adsqa {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<IdKind, std::string_view>, 15> kKindNames{{
    {IdKind::None, "None"},
    {IdKind::TypeIValue, "TypeIValue"},
    {IdKind::TypeIIValue, "TypeIIValue"},
    {IdKind::TypeIIIAttribute, "TypeIIIAttribute"},
    {IdKind::TypeIIINumber, "TypeIIINumber"},
    {IdKind::Unit, "Unit"},
    {IdKind::ComparatorLess, "ComparatorLess"},
    {IdKind::ComparatorGreater, "ComparatorGreater"},
    {IdKind::ComparatorEqual, "ComparatorEqual"},
    {IdKind::Between, "Between"},
    {IdKind::SuperlativeComplete, "SuperlativeComplete"},
    {IdKind::SuperlativePartial, "SuperlativePartial"},
    {IdKind::Negation, "Negation"},
    {IdKind::And, "And"},
    {IdKind::Or, "Or"},
}};

// Phrases are stored with single spaces between words.
std::string canonical_phrase(std::string_view s) { return normalize_value(s); }

bool word_char(char c) { return is_alnum(c) || c == '-' || c == '\'' || c == '/'; }

// Characters that can open a keyword or a number even though they are not
// alphanumeric ("$7000", "<", ">=").
bool symbol_start(char c) { return c == '$' || c == '<' || c == '>' || c == '=' || c == '&'; }

// A keyword ending in an alphanumeric character must not run into another one.
bool ends_on_boundary(std::string_view text, size_t end, char last) {
  if (!is_alnum(last)) return true;
  return end >= text.size() || !is_alnum(text[end]);
}

struct Word {
  size_t start = 0;
  size_t end = 0;
};

Word word_at(std::string_view text, size_t pos) {
  size_t e = pos;
  while (e < text.size() && (word_char(text[e]) || text[e] == '$' || text[e] == ',' ||
                             text[e] == '.')) {
    // keep "2,000" and "7.5k" together but not a trailing "." or ","
    if ((text[e] == ',' || text[e] == '.') &&
        (e + 1 >= text.size() || !is_digit(text[e + 1]) || e == pos)) {
      break;
    }
    ++e;
  }
  return {pos, e};
}

// Number literal starting at pos: optional '$', digits with ',' / '.', optional
// k/K, ending at a non-alphanumeric.
std::optional<std::pair<size_t, double>> scan_number(std::string_view text, size_t pos) {
  size_t i = pos;
  if (i < text.size() && text[i] == '$') ++i;
  if (i >= text.size() || !is_digit(text[i])) return std::nullopt;
  while (i < text.size() && (is_digit(text[i]) ||
                             ((text[i] == ',' || text[i] == '.') && i + 1 < text.size() &&
                              is_digit(text[i + 1])))) {
    ++i;
  }
  if (i < text.size() && (text[i] == 'k' || text[i] == 'K')) ++i;
  if (i < text.size() && is_alnum(text[i])) return std::nullopt;
  auto v = parse_number_literal(text.substr(pos, i - pos));
  if (!v) return std::nullopt;
  return std::make_pair(i - pos, *v);
}

size_t skip_spaces(std::string_view text, size_t pos) {
  while (pos < text.size() && is_space(text[pos])) ++pos;
  return pos;
}

// Words starting at `pos` (at most `limit`), as spans.
std::vector<Word> words_from(std::string_view text, size_t pos, size_t limit) {
  std::vector<Word> out;
  size_t p = pos;
  while (out.size() < limit && p < text.size()) {
    Word w = word_at(text, p);
    if (w.end == w.start) break;
    out.push_back(w);
    size_t next = skip_spaces(text, w.end);
    if (next == w.end) break;  // punctuation follows: the phrase cannot continue
    p = next;
  }
  return out;
}

bool has_letter(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return is_alnum(c) && !is_digit(c); });
}

bool has_digit_or_number_word(std::string_view first_word) {
  if (std::any_of(first_word.begin(), first_word.end(), is_digit)) return true;
  return number_word_value(to_lower(first_word)).has_value();
}

// Shorthand acceptance used while tagging free text: the normalized forms
// must start alike, and a candidate longer than the value may only add a
// short suffix ("4 doors" for "4 door").
bool shorthand_tag_match(const std::string& cand_key, const std::string& value_key) {
  if (cand_key.empty() || value_key.empty() || cand_key[0] != value_key[0]) return false;
  if (is_subsequence(cand_key, value_key)) return true;
  return cand_key.size() <= value_key.size() + 2 && is_subsequence(value_key, cand_key);
}

size_t common_chars(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return 0;
  size_t best = 0, pa = 0, pb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < b.size(); ++j) {
      size_t k = 0;
      while (i + k < a.size() && j + k < b.size() && a[i + k] == b[j + k]) ++k;
      if (k > best) {
        best = k;
        pa = i;
        pb = j;
      }
    }
  }
  if (best == 0) return 0;
  return best + common_chars(a.substr(0, pa), b.substr(0, pb)) +
         common_chars(a.substr(pa + best), b.substr(pb + best));
}

}  // namespace

std::string_view to_string(IdKind k) {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "None";
}

std::optional<IdKind> id_kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kKindNames) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

std::string tag_label(const Identifier& id) {
  switch (id.kind) {
    case IdKind::TypeIValue: return "TI";
    case IdKind::TypeIIValue: return "TII";
    case IdKind::TypeIIIAttribute: return "TIII";
    case IdKind::TypeIIINumber: return id.attribute ? "TIII-CB" : "TIII-N";
    case IdKind::Unit: return "TIII-U";
    case IdKind::ComparatorLess:
    case IdKind::ComparatorGreater:
    case IdKind::ComparatorEqual: return id.attribute ? "TIII-CB" : "TIII-PB";
    case IdKind::Between: return "TIII-PB";
    case IdKind::SuperlativeComplete: return "TIII-CS";
    case IdKind::SuperlativePartial: return "TIII-PS";
    case IdKind::Negation: return "NOT";
    case IdKind::And: return "AND";
    case IdKind::Or: return "OR";
    case IdKind::None: break;
  }
  return "NONE";
}

IdentifierTable IdentifierTable::parse(std::string_view json_text) {
  IdentifierTable table;
  try {
    json j = json::parse(json_text);
    for (const auto& rj : j.at("rows")) {
      IdentifierRow row;
      auto kind_name = rj.at("kind").get<std::string>();
      auto kind = id_kind_from_string(kind_name);
      if (!kind || *kind == IdKind::None || *kind == IdKind::TypeIValue ||
          *kind == IdKind::TypeIIValue || *kind == IdKind::TypeIIINumber) {
        throw LexiconError(fmt::format("identifier table: unsupported kind '{}'", kind_name));
      }
      row.kind = *kind;
      for (const auto& k : rj.at("keywords")) row.keywords.push_back(canonical_phrase(k.get<std::string>()));
      if (rj.contains("attribute")) row.attribute = rj["attribute"].get<std::string>();
      if (rj.contains("extreme")) {
        auto e = rj["extreme"].get<std::string>();
        if (e == "min") {
          row.extreme = Extreme::Min;
        } else if (e == "max") {
          row.extreme = Extreme::Max;
        } else {
          throw LexiconError(fmt::format("identifier table: bad extreme '{}'", e));
        }
      }
      if ((row.kind == IdKind::SuperlativeComplete || row.kind == IdKind::SuperlativePartial) &&
          !row.extreme) {
        throw LexiconError(fmt::format("identifier table: superlative row '{}' needs an extreme",
                                       row.keywords.empty() ? "" : row.keywords.front()));
      }
      row.inclusive = rj.value("inclusive", false);
      table.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw LexiconError(fmt::format("identifier table: {}", e.what()));
  }
  return table;
}

IdentifierTable IdentifierTable::load(const std::filesystem::path& file) {
  return parse(read_file(file));
}

void Trie::insert(const std::string& phrase, Identifier id) {
  if (phrase.empty()) throw LexiconError("empty keyword");
  TrieNode* node = root_.get();
  for (char c : phrase) {
    auto& slot = node->children[c];
    if (!slot) {
      slot = std::make_unique<TrieNode>();
      slot->value = c;
      slot->label = node->label + c;
      ++node_count_;
    }
    node = slot.get();
  }
  if (node->is_keyword) {
    if (!node->identifier->same_meaning(id)) {
      throw LexiconError(fmt::format("keyword '{}' mapped to both {} and {}", phrase,
                                     to_string(node->identifier->kind), to_string(id.kind)));
    }
    return;
  }
  id.literal = phrase;
  node->identifier = std::move(id);
  node->is_keyword = true;
  ++keyword_count_;
}

Trie Trie::build(const DomainLexicon& lexicon, const DomainSchema& schema,
                 const IdentifierTable& identifiers, StopwordList stopwords,
                 StopwordList dictionary) {
  if (lexicon.values.empty()) throw LexiconError("lexicon has no values");
  Trie trie;
  trie.stopwords_ = std::move(stopwords);
  trie.dictionary_ = std::move(dictionary);

  auto add_entry = [&](const LexiconEntry& e, IdKind kind) {
    Identifier id;
    id.kind = kind;
    id.attribute = e.attribute;
    id.display = e.display;
    trie.insert(canonical_phrase(e.phrase), std::move(id));
  };
  for (const auto& e : lexicon.values) {
    add_entry(e, e.type == AttrType::TypeI ? IdKind::TypeIValue : IdKind::TypeIIValue);
    trie.values_.push_back(e);
  }
  for (const auto& e : lexicon.type3_attributes) add_entry(e, IdKind::TypeIIIAttribute);
  for (const auto& e : lexicon.type3_units) add_entry(e, IdKind::Unit);

  for (const auto& row : identifiers.rows) {
    Identifier id;
    id.kind = row.kind;
    id.extreme = row.extreme;
    id.inclusive = row.inclusive;
    if (row.attribute) {
      const AttributeDecl* a = schema.find(*row.attribute);
      if (a && a->type == AttrType::TypeIII) {
        id.attribute = a->name;
      } else if (row.kind == IdKind::SuperlativeComplete) {
        // target attribute absent from this domain: the keyword still asks
        // for an extreme but needs context to find its attribute
        id.kind = IdKind::SuperlativePartial;
      }
    }
    for (const auto& k : row.keywords) {
      Identifier copy = id;
      copy.display = k;
      trie.insert(k, std::move(copy));
    }
  }
  return trie;
}

const TrieNode* Trie::find_node(std::string_view phrase) const {
  const TrieNode* node = root_.get();
  for (char c : canonical_phrase(phrase)) {
    node = node->child(c);
    if (!node) return nullptr;
  }
  return node;
}

const Identifier* Trie::lookup(std::string_view phrase) const {
  const TrieNode* node = find_node(phrase);
  if (!node || !node->is_keyword) return nullptr;
  return &*node->identifier;
}

std::optional<Trie::Match> Trie::longest_match(std::string_view text, size_t pos) const {
  std::optional<Match> best;
  const TrieNode* node = root_.get();
  size_t i = pos;
  while (true) {
    if (node != root_.get() && node->is_keyword && ends_on_boundary(text, i, node->value)) {
      best = Match{i - pos, node};
    }
    if (i >= text.size()) break;
    const char c = text[i];
    if (is_space(c)) {
      const TrieNode* next = node->child(' ');
      if (!next || node == root_.get()) break;
      node = next;
      i = skip_spaces(text, i);
      continue;
    }
    const TrieNode* next = node->child(lower_char(c));
    if (!next) break;
    node = next;
    ++i;
  }
  return best;
}

std::vector<const TrieNode*> Trie::keywords_under(const TrieNode* node) const {
  std::vector<const TrieNode*> out;
  if (!node) return out;
  std::vector<const TrieNode*> stack{node};
  while (!stack.empty()) {
    const TrieNode* n = stack.back();
    stack.pop_back();
    if (n->is_keyword) out.push_back(n);
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) stack.push_back(it->second.get());
  }
  return out;
}

namespace {

// Longest trie match at `pos`, also trying the text with a leading number word
// replaced by its digits ("four door" -> "4 door"). Returns consumed length in
// the original text.
std::optional<Trie::Match> match_with_number_words(const Trie& trie, std::string_view text,
                                                   size_t pos) {
  auto direct = trie.longest_match(text, pos);
  Word w = word_at(text, pos);
  auto nv = number_word_value(to_lower(text.substr(w.start, w.end - w.start)));
  if (!nv) return direct;
  std::string digits = std::to_string(*nv);
  std::string rewritten = digits + std::string(text.substr(w.end));
  auto alt = trie.longest_match(rewritten, 0);
  if (!alt || alt->length <= digits.size()) return direct;
  Trie::Match m{alt->length - digits.size() + (w.end - w.start), alt->node};
  if (!direct || m.length > direct->length) return m;
  return direct;
}

struct ShorthandHit {
  size_t end = 0;
  const LexiconEntry* entry = nullptr;
};

// Best Type I/II value for which the 1-3 word window at `pos` is a shorthand.
std::optional<ShorthandHit> match_shorthand(const Trie& trie, std::string_view text, size_t pos) {
  auto words = words_from(text, pos, 3);
  if (words.empty()) return std::nullopt;
  if (!has_digit_or_number_word(text.substr(words[0].start, words[0].end - words[0].start))) {
    return std::nullopt;
  }
  for (size_t n = words.size(); n >= 1; --n) {
    std::string_view window = text.substr(pos, words[n - 1].end - pos);
    if (!has_letter(window)) continue;
    if (n == 1 && parse_number_literal(window)) continue;  // "20k" is a number
    const std::string key = shorthand_key(window);
    const LexiconEntry* best = nullptr;
    double best_sim = -1;
    bool ambiguous = false;
    for (const auto& e : trie.values()) {
      const std::string vkey = shorthand_key(e.phrase);
      if (!shorthand_tag_match(key, vkey)) continue;
      double sim = text_similarity(key, vkey);
      if (sim > best_sim) {
        best = &e;
        best_sim = sim;
        ambiguous = false;
      } else if (sim == best_sim && best && e.attribute != best->attribute) {
        ambiguous = true;
      }
    }
    if (best && !ambiguous) return ShorthandHit{words[n - 1].end, best};
  }
  return std::nullopt;
}

}  // namespace

std::vector<TaggedToken> tag(std::string_view question, const Trie& trie) {
  std::vector<TaggedToken> out;
  size_t pos = 0;
  const size_t n = question.size();
  auto emit = [&](size_t start, size_t end, Identifier id, bool stop = false) {
    TaggedToken t;
    t.surface = std::string(question.substr(start, end - start));
    t.identifier = std::move(id);
    t.span = {start, end};
    t.stopword = stop;
    out.push_back(std::move(t));
  };

  while (pos < n) {
    const char c = question[pos];
    if (!is_alnum(c) && !symbol_start(c)) {
      ++pos;
      continue;
    }
    auto num = scan_number(question, pos);
    auto m = match_with_number_words(trie, question, pos);
    if (m && (!num || m->length >= num->first)) {
      emit(pos, pos + m->length, *m->node->identifier);
      pos += m->length;
      continue;
    }
    if (auto sh = match_shorthand(trie, question, pos)) {
      Identifier id;
      id.kind = sh->entry->type == AttrType::TypeI ? IdKind::TypeIValue : IdKind::TypeIIValue;
      id.attribute = sh->entry->attribute;
      id.literal = sh->entry->phrase;
      id.display = sh->entry->display;
      emit(pos, sh->end, std::move(id));
      pos = sh->end;
      continue;
    }
    if (num) {
      Identifier id;
      id.kind = IdKind::TypeIIINumber;
      id.number = num->second;
      size_t end = pos + num->first;
      if (question[pos] == '$') {
        if (const Identifier* unit = trie.lookup("$"); unit && unit->kind == IdKind::Unit) {
          id.attribute = unit->attribute;
        }
      }
      const size_t after = skip_spaces(question, end);
      if (after < n) {
        auto u = trie.longest_match(question, after);
        if (u && u->node->identifier->kind == IdKind::Unit) {
          if (!id.attribute) id.attribute = u->node->identifier->attribute;
          if (id.attribute == u->node->identifier->attribute) end = after + u->length;
        }
      }
      id.literal = to_lower(question.substr(pos, num->first));
      id.display = std::string(question.substr(pos, end - pos));
      emit(pos, end, std::move(id));
      pos = end;
      continue;
    }
    Word w = word_at(question, pos);
    size_t end = std::max(w.end, pos + 1);
    std::string lowered = to_lower(question.substr(pos, end - pos));
    Identifier none;
    none.literal = lowered;
    emit(pos, end, std::move(none), trie.stopwords().contains(lowered));
    pos = end;
  }
  return out;
}

std::vector<TaggedToken> strip_nonessential(const std::vector<TaggedToken>& tokens) {
  std::vector<TaggedToken> out;
  for (const auto& t : tokens) {
    if (t.kind() == IdKind::None || t.stopword) continue;
    out.push_back(t);
  }
  return out;
}

std::string simplified_text(const std::vector<TaggedToken>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.kind() == IdKind::TypeIIINumber ? to_lower(t.surface) : t.surface;
  }
  return out;
}

double text_similarity(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 0.0;
  if (b < a) std::swap(a, b);
  return 200.0 * static_cast<double>(common_chars(a, b)) / static_cast<double>(a.size() + b.size());
}

namespace {

struct Correction {
  std::string replacement;
  double similarity = 0;
};

// Minimum trie depth reached before a misspelling is attempted. Words that
// diverge from every keyword within their first letters are left alone
// rather than forced onto an unrelated keyword.
constexpr size_t kMinCorrectionDepth = 3;
constexpr size_t kMinCorrectableLength = 4;

std::optional<Correction> best_substitute(const Trie& trie, const std::string& word, double threshold) {
  const TrieNode* node = &trie.root();
  size_t depth = 0;
  for (char c : word) {
    const TrieNode* next = node->child(c);
    if (!next) break;
    node = next;
    ++depth;
  }
  if (depth < kMinCorrectionDepth || word.size() < kMinCorrectableLength) return std::nullopt;
  std::optional<Correction> best;
  for (const TrieNode* k : trie.keywords_under(node)) {
    if (k->label == word) continue;
    double sim = text_similarity(word, k->label);
    if (!best || sim > best->similarity) best = Correction{k->label, sim};
  }
  if (best && best->similarity >= threshold) return best;
  return std::nullopt;
}

bool single_keyword(const Trie& trie, std::string_view piece) {
  const TrieNode* n = trie.find_node(piece);
  return n && n->is_keyword;
}

// Splits a lowercase word into keywords, longest prefix first. The last piece
// may instead be a correctable misspelling.
bool segment(const Trie& trie, const std::string& word, double threshold,
             std::vector<std::string>& pieces, std::vector<double>& sims) {
  for (size_t len = word.size() - 1; len >= 1; --len) {
    std::string head = word.substr(0, len);
    if (!single_keyword(trie, head)) continue;
    std::string rest = word.substr(len);
    pieces.push_back(head);
    sims.push_back(100.0);
    if (single_keyword(trie, rest)) {
      pieces.push_back(rest);
      sims.push_back(100.0);
      return true;
    }
    if (segment(trie, rest, threshold, pieces, sims)) return true;
    if (auto fix = best_substitute(trie, rest, threshold)) {
      pieces.push_back(fix->replacement);
      sims.push_back(fix->similarity);
      return true;
    }
    pieces.pop_back();
    sims.pop_back();
  }
  return false;
}

}  // namespace

CorrectionReport correct(std::string_view question, const Trie& trie, double threshold) {
  CorrectionReport report;
  std::string& out = report.text;
  size_t pos = 0;
  const size_t n = question.size();
  while (pos < n) {
    const char c = question[pos];
    if (!is_alnum(c) && !symbol_start(c)) {
      out += c;
      ++pos;
      continue;
    }
    if (auto m = match_with_number_words(trie, question, pos)) {
      out.append(question.substr(pos, m->length));
      pos += m->length;
      continue;
    }
    if (auto num = scan_number(question, pos)) {
      out.append(question.substr(pos, num->first));
      pos += num->first;
      continue;
    }
    Word w = word_at(question, pos);
    const size_t end = std::max(w.end, pos + 1);
    const std::string original(question.substr(pos, end - pos));
    const std::string lowered = to_lower(original);
    const bool alphabetic = std::all_of(lowered.begin(), lowered.end(),
                                        [](char ch) { return is_alnum(ch); });
    if (!alphabetic || lowered.size() < 2 || trie.stopwords().contains(lowered) ||
        trie.dictionary().contains(lowered) ||
        number_word_value(lowered) || std::any_of(lowered.begin(), lowered.end(), is_digit)) {
      out += original;
      pos = end;
      continue;
    }

    std::vector<std::string> pieces;
    std::vector<double> sims;
    if (segment(trie, lowered, threshold, pieces, sims)) {
      // keep the user's casing for the parts that matched verbatim
      std::string replacement;
      size_t offset = 0;
      for (size_t i = 0; i < pieces.size(); ++i) {
        if (i) replacement += ' ';
        const bool verbatim = sims[i] == 100.0;
        if (verbatim) {
          replacement += original.substr(offset, pieces[i].size());
          offset += pieces[i].size();
        } else {
          replacement += pieces[i];
          offset = original.size();
        }
      }
      out += replacement;
      CorrectionEdit edit;
      edit.kind = CorrectionEdit::Kind::SpaceInserted;
      edit.original = original;
      edit.replacement = replacement;
      edit.position = pos;
      edit.similarity = *std::min_element(sims.begin(), sims.end());
      report.edits.push_back(std::move(edit));
    } else if (auto fix = best_substitute(trie, lowered, threshold)) {
      out += fix->replacement;
      CorrectionEdit edit;
      edit.kind = CorrectionEdit::Kind::Substituted;
      edit.original = original;
      edit.replacement = fix->replacement;
      edit.position = pos;
      edit.similarity = fix->similarity;
      report.edits.push_back(std::move(edit));
    } else {
      out += original;
      report.unrecognized.push_back(original);
    }
    pos = end;
  }
  return report;
}

std::string shorthand_key(std::string_view s) {
  std::string out;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    if (auto v = number_word_value(word)) {
      out += std::to_string(*v);
    } else {
      out += word;
    }
    word.clear();
  };
  for (char c : s) {
    if (is_space(c) || c == '-') {
      flush();
    } else if (is_alnum(c)) {
      // a number word glued to digits or letters is not a word of its own
      if (!word.empty() && is_digit(word.back()) != is_digit(c)) flush();
      word += lower_char(c);
    } else {
      flush();
      out += c;
    }
  }
  flush();
  return out;
}

bool is_subsequence(std::string_view needle, std::string_view haystack) {
  size_t j = 0;
  for (size_t i = 0; i < haystack.size() && j < needle.size(); ++i) {
    if (haystack[i] == needle[j]) ++j;
  }
  return j == needle.size();
}

bool is_shorthand(std::string_view candidate, std::string_view value) {
  const std::string a = shorthand_key(candidate);
  const std::string b = shorthand_key(value);
  if (a.empty() || b.empty()) return false;
  return is_subsequence(a, b) || is_subsequence(b, a);
}

}  // namespace adsqa
