#include "adsqa/corpus.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "adsqa/errors.hpp"
#include "adsqa/text.hpp"

namespace adsqa {

using nlohmann::json;

std::string_view to_string(AttrType t) {
  switch (t) {
    case AttrType::TypeI:
      return "I";
    case AttrType::TypeII:
      return "II";
    case AttrType::TypeIII:
      return "III";
  }
  return "?";
}

std::optional<size_t> DomainSchema::index_of(std::string_view name) const {
  std::string lname = to_lower(name);
  for (size_t i = 0; i < attributes.size(); ++i) {
    if (to_lower(attributes[i].name) == lname) return i;
  }
  return std::nullopt;
}

const AttributeDecl* DomainSchema::find(std::string_view name) const {
  auto idx = index_of(name);
  return idx ? &attributes[*idx] : nullptr;
}

std::vector<std::string> DomainSchema::names_of(AttrType t) const {
  std::vector<std::string> out;
  for (const auto& a : attributes) {
    if (a.type == t) out.push_back(a.name);
  }
  return out;
}

void DomainSchema::validate() const {
  if (domain.empty()) throw CorpusError("schema: empty domain name");
  bool has_type1 = false;
  std::set<std::string> seen;
  for (const auto& a : attributes) {
    if (a.name.empty()) throw CorpusError("schema: attribute with empty name");
    if (!seen.insert(to_lower(a.name)).second) {
      throw CorpusError(fmt::format("schema: duplicate attribute '{}'", a.name));
    }
    if (a.type == AttrType::TypeI) has_type1 = true;
    if (a.type == AttrType::TypeIII && a.kind != ValueKind::Numeric) {
      throw CorpusError(fmt::format("schema: Type III attribute '{}' must be numeric", a.name));
    }
    if (a.type != AttrType::TypeIII && a.kind != ValueKind::Categorical) {
      throw CorpusError(
          fmt::format("schema: Type {} attribute '{}' must be categorical", to_string(a.type), a.name));
    }
  }
  if (!has_type1) throw CorpusError(fmt::format("schema '{}': no Type I attribute", domain));
}

const Scalar* AdRecord::get(std::string_view attribute) const {
  auto it = values.find(std::string(attribute));
  if (it != values.end()) return &it->second;
  std::string lname = to_lower(attribute);
  for (const auto& [k, v] : values) {
    if (to_lower(k) == lname) return &v;
  }
  return nullptr;
}

namespace {

AttrType parse_attr_type(const std::string& s) {
  if (s == "I" || s == "1" || s == "TypeI") return AttrType::TypeI;
  if (s == "II" || s == "2" || s == "TypeII") return AttrType::TypeII;
  if (s == "III" || s == "3" || s == "TypeIII") return AttrType::TypeIII;
  throw CorpusError(fmt::format("schema: unknown attribute type '{}'", s));
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw CorpusError(fmt::format("{}: {}", what, e.what()));
  }
}

}  // namespace

DomainSchema parse_schema(std::string_view json_text) {
  json j = parse_json(json_text, "schema");
  DomainSchema s;
  try {
    s.domain = j.at("domain").get<std::string>();
    s.table = j.value("table", s.domain + "_ads");
    s.id_column = j.value("id_column", std::string("id"));
    for (const auto& a : j.at("attributes")) {
      AttributeDecl d;
      d.name = a.at("name").get<std::string>();
      d.type = parse_attr_type(a.at("type").get<std::string>());
      std::string kind = a.value("kind", d.type == AttrType::TypeIII ? "numeric" : "categorical");
      if (kind == "numeric") {
        d.kind = ValueKind::Numeric;
      } else if (kind == "categorical") {
        d.kind = ValueKind::Categorical;
      } else {
        throw CorpusError(fmt::format("schema: unknown kind '{}' for '{}'", kind, d.name));
      }
      if (a.contains("unit")) d.unit = a.at("unit").get<std::string>();
      s.attributes.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw CorpusError(fmt::format("schema: {}", e.what()));
  }
  s.validate();
  return s;
}

std::string serialize_schema(const DomainSchema& schema) {
  json attrs = json::array();
  for (const auto& a : schema.attributes) {
    json o = {{"name", a.name},
              {"type", std::string(to_string(a.type))},
              {"kind", a.kind == ValueKind::Numeric ? "numeric" : "categorical"}};
    if (a.unit) o["unit"] = *a.unit;
    attrs.push_back(std::move(o));
  }
  json j = {{"domain", schema.domain},
            {"table", schema.table},
            {"id_column", schema.id_column},
            {"attributes", attrs}};
  return j.dump(2);
}

DomainLexicon parse_lexicon(std::string_view json_text, const DomainSchema& schema) {
  json j = parse_json(json_text, "lexicon");
  DomainLexicon lex;
  lex.domain = j.value("domain", schema.domain);
  // phrase -> (attribute, type, section) to enforce one mapping per phrase
  std::map<std::string, std::string> owner;

  auto add = [&](std::vector<LexiconEntry>& dst, const char* section, AttrType expected_type,
                 bool check_type) {
    if (!j.contains(section)) return;
    for (const auto& [attr_name, phrases] : j.at(section).items()) {
      const AttributeDecl* decl = schema.find(attr_name);
      if (!decl) {
        throw CorpusError(fmt::format("lexicon: section '{}' names unknown attribute '{}'", section,
                                      attr_name));
      }
      if (check_type && decl->type != expected_type) {
        throw CorpusError(fmt::format("lexicon: attribute '{}' in section '{}' is Type {}", attr_name,
                                      section, to_string(decl->type)));
      }
      for (const auto& p : phrases) {
        std::string display = p.get<std::string>();
        std::string phrase = normalize_value(display);
        if (phrase.empty()) continue;
        std::string key = fmt::format("{}:{}", decl->name, section);
        auto [it, inserted] = owner.emplace(phrase, key);
        if (!inserted) {
          if (it->second == key) continue;
          throw CorpusError(fmt::format("lexicon: phrase '{}' mapped to both {} and {}", phrase,
                                        it->second, key));
        }
        dst.push_back({phrase, display, decl->name, decl->type});
      }
    }
  };
  try {
    add(lex.values, "type1", AttrType::TypeI, true);
    add(lex.values, "type2", AttrType::TypeII, true);
    add(lex.type3_units, "type3_units", AttrType::TypeIII, true);
    add(lex.type3_attributes, "type3_attributes", AttrType::TypeIII, true);
  } catch (const json::exception& e) {
    throw CorpusError(fmt::format("lexicon: {}", e.what()));
  }
  return lex;
}

AdRecord parse_ad_line(std::string_view line, const DomainSchema& schema, size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw CorpusError(fmt::format("ads line {}: unparseable record: {}", line_number, e.what()));
  }
  AdRecord r;
  r.domain = schema.domain;
  if (!j.is_object() || !j.contains("id") || !j.contains("values") || !j.at("values").is_object()) {
    throw CorpusError(fmt::format("ads line {}: record needs 'id' and 'values'", line_number));
  }
  const json& id = j.at("id");
  r.id = id.is_string() ? id.get<std::string>() : id.dump();
  if (r.id.empty()) throw CorpusError(fmt::format("ads line {}: empty record id", line_number));

  for (const auto& [name, v] : j.at("values").items()) {
    const AttributeDecl* decl = schema.find(name);
    if (!decl) {
      throw CorpusError(fmt::format("record '{}': unknown attribute '{}'", r.id, name));
    }
    if (v.is_null()) continue;
    if (decl->kind == ValueKind::Numeric) {
      std::optional<double> num;
      if (v.is_number()) {
        num = v.get<double>();
      } else if (v.is_string()) {
        num = parse_number_literal(v.get<std::string>());
      }
      if (!num || !std::isfinite(*num)) {
        throw CorpusError(
            fmt::format("record '{}': field '{}' is not a finite number", r.id, decl->name));
      }
      r.values[decl->name] = *num;
    } else {
      std::string text = v.is_string() ? v.get<std::string>() : v.dump();
      std::string collapsed;
      bool pending = false;
      for (char c : text) {
        if (is_space(c)) {
          pending = !collapsed.empty();
          continue;
        }
        if (pending) collapsed.push_back(' ');
        pending = false;
        collapsed.push_back(c);
      }
      if (collapsed.empty()) {
        throw CorpusError(fmt::format("record '{}': field '{}' is empty", r.id, decl->name));
      }
      r.values[decl->name] = collapsed;
    }
  }
  for (const auto& a : schema.attributes) {
    if (a.type == AttrType::TypeI && !r.values.count(a.name)) {
      throw CorpusError(fmt::format("record '{}': missing Type I value '{}'", r.id, a.name));
    }
  }
  return r;
}

std::vector<AdRecord> parse_ads(std::string_view jsonl, const DomainSchema& schema) {
  std::vector<AdRecord> out;
  std::set<std::string> ids;
  size_t line_number = 0;
  size_t start = 0;
  while (start <= jsonl.size()) {
    size_t end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(start, end - start);
    ++line_number;
    start = end + 1;
    if (normalize_value(line).empty()) {
      if (end == jsonl.size()) break;
      continue;
    }
    AdRecord r = parse_ad_line(line, schema, line_number);
    if (!ids.insert(r.id).second) {
      throw CorpusError(fmt::format("ads line {}: duplicate record id '{}'", line_number, r.id));
    }
    out.push_back(std::move(r));
    if (end == jsonl.size()) break;
  }
  return out;
}

std::string serialize_ads(const std::vector<AdRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json values = json::object();
    for (const auto& [k, v] : r.values) {
      if (const auto* s = std::get_if<std::string>(&v)) {
        values[k] = *s;
      } else {
        values[k] = std::get<double>(v);
      }
    }
    out += json{{"id", r.id}, {"values", values}}.dump();
    out += '\n';
  }
  return out;
}

Corpus::Corpus(DomainSchema schema, DomainLexicon lexicon, std::vector<AdRecord> records)
    : schema_(std::move(schema)), lexicon_(std::move(lexicon)), records_(std::move(records)) {
  const size_t n_attr = schema_.attributes.size();
  categorical_.assign(n_attr, {});
  numeric_.assign(n_attr, {});
  ranges_.assign(n_attr, std::nullopt);
  display_.assign(n_attr, {});
  for (size_t a = 0; a < n_attr; ++a) {
    if (schema_.attributes[a].kind == ValueKind::Categorical) {
      categorical_[a].resize(records_.size());
    } else {
      numeric_[a].resize(records_.size());
    }
  }
  for (size_t i = 0; i < records_.size(); ++i) {
    const AdRecord& r = records_[i];
    if (!by_id_.emplace(r.id, i).second) {
      throw CorpusError(fmt::format("duplicate record id '{}'", r.id));
    }
    for (const auto& [name, value] : r.values) {
      auto a = schema_.index_of(name);
      if (!a) throw CorpusError(fmt::format("record '{}': unknown attribute '{}'", r.id, name));
      if (schema_.attributes[*a].kind == ValueKind::Categorical) {
        const auto* s = std::get_if<std::string>(&value);
        if (!s) throw CorpusError(fmt::format("record '{}': field '{}' must be text", r.id, name));
        std::string norm = normalize_value(*s);
        std::istringstream words(*s);
        std::string shown;
        for (std::string w; words >> w;) shown += (shown.empty() ? "" : " ") + w;
        display_[*a].emplace(norm, std::move(shown));
        categorical_[*a][i] = std::move(norm);
      } else {
        const auto* d = std::get_if<double>(&value);
        if (!d) throw CorpusError(fmt::format("record '{}': field '{}' must be numeric", r.id, name));
        numeric_[*a][i] = *d;
        auto& range = ranges_[*a];
        if (!range) {
          range = ValueRange{*d, *d};
        } else {
          range->min = std::min(range->min, *d);
          range->max = std::max(range->max, *d);
        }
      }
    }
  }
}

const AdRecord* Corpus::find(std::string_view record_id) const {
  auto pos = position_of(record_id);
  return pos ? &records_[*pos] : nullptr;
}

std::optional<size_t> Corpus::position_of(std::string_view record_id) const {
  auto it = by_id_.find(std::string(record_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const std::string* Corpus::categorical(size_t attr, size_t record) const {
  if (attr >= categorical_.size() || categorical_[attr].empty()) return nullptr;
  const auto& v = categorical_[attr][record];
  return v ? &*v : nullptr;
}

std::optional<double> Corpus::numeric(size_t attr, size_t record) const {
  if (attr >= numeric_.size() || numeric_[attr].empty()) return std::nullopt;
  return numeric_[attr][record];
}

std::optional<ValueRange> Corpus::try_valid_range(std::string_view attribute) const {
  auto a = schema_.index_of(attribute);
  if (!a) return std::nullopt;
  return ranges_[*a];
}

ValueRange Corpus::valid_range(std::string_view attribute) const {
  auto a = schema_.index_of(attribute);
  if (!a) throw CorpusError(fmt::format("unknown attribute '{}'", attribute));
  if (schema_.attributes[*a].type != AttrType::TypeIII) {
    throw CorpusError(fmt::format("attribute '{}' is not Type III", attribute));
  }
  if (!ranges_[*a]) throw CorpusError(fmt::format("range unavailable for '{}'", attribute));
  return *ranges_[*a];
}

std::optional<std::string> Corpus::display_value(std::string_view attribute,
                                                 std::string_view normalized) const {
  auto a = schema_.index_of(attribute);
  if (!a) return std::nullopt;
  auto it = display_[*a].find(std::string(normalized));
  if (it == display_[*a].end()) return std::nullopt;
  return it->second;
}

Corpus load_domain(const std::filesystem::path& schema_file,
                   const std::filesystem::path& lexicon_file,
                   const std::filesystem::path& ads_file) {
  DomainSchema schema = parse_schema(read_file(schema_file));
  DomainLexicon lexicon = parse_lexicon(read_file(lexicon_file), schema);
  std::vector<AdRecord> records = parse_ads(read_file(ads_file), schema);
  return Corpus(std::move(schema), std::move(lexicon), std::move(records));
}

QueryLog parse_query_log(std::string_view jsonl) {
  QueryLog log;
  std::set<std::string> users;
  size_t line_number = 0;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_number;
    if (normalize_value(line).empty()) continue;
    auto reject = [&](std::string reason) { log.rejected.push_back({line_number, std::move(reason)}); };
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      reject("malformed JSON");
      continue;
    }
    try {
      QueryLogSession s;
      s.user_id = j.at("user_id").is_string() ? j.at("user_id").get<std::string>()
                                              : j.at("user_id").dump();
      bool ok = true;
      for (const auto& e : j.at("entries")) {
        QueryLogEntry entry;
        entry.query_text = e.at("query_text").get<std::string>();
        entry.timestamp = e.at("timestamp").get<double>();
        if (e.contains("clicked_ads")) {
          for (const auto& c : e.at("clicked_ads")) {
            ClickedAd ad;
            ad.ad_id = c.at("ad_id").is_string() ? c.at("ad_id").get<std::string>()
                                                 : c.at("ad_id").dump();
            ad.rank_position = c.at("rank_position").get<int>();
            ad.dwell_seconds = c.value("dwell_seconds", 0.0);
            if (ad.rank_position < 1) {
              reject(fmt::format("rank_position {} < 1", ad.rank_position));
              ok = false;
              break;
            }
            if (ad.dwell_seconds < 0) {
              reject(fmt::format("negative dwell {}", format_number(ad.dwell_seconds)));
              ok = false;
              break;
            }
            entry.clicked_ads.push_back(std::move(ad));
          }
        }
        if (!ok) break;
        if (!s.entries.empty() && entry.timestamp < s.entries.back().timestamp) {
          reject("timestamps not sorted within session");
          ok = false;
          break;
        }
        s.entries.push_back(std::move(entry));
      }
      if (!ok) continue;
      if (!users.insert(s.user_id).second) {
        reject(fmt::format("duplicate session for user '{}'", s.user_id));
        continue;
      }
      log.sessions.push_back(std::move(s));
    } catch (const json::exception& e) {
      reject(fmt::format("malformed session: {}", e.what()));
    }
  }
  return log;
}

QueryLog load_query_log(const std::filesystem::path& log_file) {
  return parse_query_log(read_file(log_file));
}

std::string serialize_query_log(const std::vector<QueryLogSession>& sessions) {
  std::string out;
  for (const auto& s : sessions) {
    json entries = json::array();
    for (const auto& e : s.entries) {
      json clicks = json::array();
      for (const auto& c : e.clicked_ads) {
        clicks.push_back(
            {{"ad_id", c.ad_id}, {"rank_position", c.rank_position}, {"dwell_seconds", c.dwell_seconds}});
      }
      entries.push_back(
          {{"query_text", e.query_text}, {"timestamp", e.timestamp}, {"clicked_ads", clicks}});
    }
    out += json{{"user_id", s.user_id}, {"entries", entries}}.dump();
    out += '\n';
  }
  return out;
}

}  // namespace adsqa
