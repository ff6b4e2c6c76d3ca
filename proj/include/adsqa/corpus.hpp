#pragma once

// Ads records, per-domain schemas and lexicons, query logs, and the file
// formats they are ingested from.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace adsqa {

enum class AttrType { TypeI, TypeII, TypeIII };
enum class ValueKind { Categorical, Numeric };

std::string_view to_string(AttrType t);

struct AttributeDecl {
  std::string name;
  AttrType type = AttrType::TypeI;
  ValueKind kind = ValueKind::Categorical;
  std::optional<std::string> unit;
};

struct DomainSchema {
  std::string domain;
  // SQL naming used when rendering structured queries.
  std::string table;
  std::string id_column;
  std::vector<AttributeDecl> attributes;

  // Case-insensitive lookup; returns the attribute index.
  std::optional<size_t> index_of(std::string_view name) const;
  const AttributeDecl* find(std::string_view name) const;
  std::vector<std::string> names_of(AttrType t) const;

  // Throws CorpusError when the invariants do not hold.
  void validate() const;
};

using Scalar = std::variant<std::string, double>;

struct AdRecord {
  std::string id;
  std::string domain;
  // Keyed by the schema's attribute name.
  std::map<std::string, Scalar> values;

  const Scalar* get(std::string_view attribute) const;
  bool operator==(const AdRecord&) const = default;
};

struct ClickedAd {
  std::string ad_id;
  int rank_position = 1;
  double dwell_seconds = 0;
};

struct QueryLogEntry {
  std::string query_text;
  double timestamp = 0;
  std::vector<ClickedAd> clicked_ads;
};

struct QueryLogSession {
  std::string user_id;
  std::vector<QueryLogEntry> entries;
};

struct RejectedLine {
  size_t line_number = 0;
  std::string reason;
};

struct QueryLog {
  std::vector<QueryLogSession> sessions;
  std::vector<RejectedLine> rejected;
};

// Phrases are stored lowercase; `display` keeps the spelling from the lexicon
// file for rendering.
struct LexiconEntry {
  std::string phrase;
  std::string display;
  std::string attribute;
  AttrType type = AttrType::TypeI;
};

struct DomainLexicon {
  std::string domain;
  std::vector<LexiconEntry> values;           // Type I and Type II values
  std::vector<LexiconEntry> type3_units;      // "usd", "$", "miles" -> attribute
  std::vector<LexiconEntry> type3_attributes;  // "price", "mileage" -> attribute
};

struct ValueRange {
  double min = 0;
  double max = 0;
  bool contains(double v) const { return v >= min && v <= max; }
};

// An ingested domain: records plus column views used by the executor. The
// object is immutable once constructed.
class Corpus {
 public:
  Corpus(DomainSchema schema, DomainLexicon lexicon, std::vector<AdRecord> records);

  const DomainSchema& schema() const { return schema_; }
  const DomainLexicon& lexicon() const { return lexicon_; }
  const std::vector<AdRecord>& records() const { return records_; }
  size_t size() const { return records_.size(); }

  const AdRecord* find(std::string_view record_id) const;
  std::optional<size_t> position_of(std::string_view record_id) const;

  // Normalized categorical value (lowercase, collapsed whitespace), or null.
  const std::string* categorical(size_t attr, size_t record) const;
  std::optional<double> numeric(size_t attr, size_t record) const;

  // Throws CorpusError("range unavailable") when no record has a value.
  ValueRange valid_range(std::string_view attribute) const;
  std::optional<ValueRange> try_valid_range(std::string_view attribute) const;

  // Original spelling of a normalized categorical value as first seen in the
  // records, if any.
  std::optional<std::string> display_value(std::string_view attribute,
                                           std::string_view normalized) const;

 private:
  DomainSchema schema_;
  DomainLexicon lexicon_;
  std::vector<AdRecord> records_;
  std::unordered_map<std::string, size_t> by_id_;
  std::vector<std::vector<std::optional<std::string>>> categorical_;
  std::vector<std::vector<std::optional<double>>> numeric_;
  std::vector<std::optional<ValueRange>> ranges_;
  std::vector<std::unordered_map<std::string, std::string>> display_;
};

DomainSchema parse_schema(std::string_view json_text);
DomainLexicon parse_lexicon(std::string_view json_text, const DomainSchema& schema);

// Validates one ads line against the schema. `line_number` is used in errors.
AdRecord parse_ad_line(std::string_view line, const DomainSchema& schema, size_t line_number);

std::vector<AdRecord> parse_ads(std::string_view jsonl, const DomainSchema& schema);
std::string serialize_ads(const std::vector<AdRecord>& records);
std::string serialize_schema(const DomainSchema& schema);

Corpus load_domain(const std::filesystem::path& schema_file,
                   const std::filesystem::path& lexicon_file,
                   const std::filesystem::path& ads_file);

QueryLog parse_query_log(std::string_view jsonl);
QueryLog load_query_log(const std::filesystem::path& log_file);
std::string serialize_query_log(const std::vector<QueryLogSession>& sessions);

}  // namespace adsqa
