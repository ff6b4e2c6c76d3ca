#pragma once

// Builders shared by the unit tests and the acceptance suite: small schemas,
// seeded synthetic corpora and hand-made conditions.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "adsqa/analyzer.hpp"
#include "adsqa/boolean.hpp"
#include "adsqa/corpus.hpp"
#include "adsqa/service.hpp"
#include "adsqa/text.hpp"

namespace fixtures {

using namespace adsqa;

inline std::filesystem::path data_dir() { return ADSQA_DATA_DIR; }

inline Corpus load_cars() {
  const auto dir = data_dir() / "cars";
  return load_domain(dir / "schema.json", dir / "lexicon.json", dir / "ads.jsonl");
}

inline const Service& cars_service() {
  static const Service s = Service::load(data_dir());
  return s;
}

// Make (I), Color (II), Doors (II), Price (III), Mileage (III).
inline DomainSchema small_schema() {
  DomainSchema s;
  s.domain = "toy";
  s.table = "Toy_Ads";
  s.id_column = "Toy_ID";
  s.attributes = {
      {"Make", AttrType::TypeI, ValueKind::Categorical, std::nullopt},
      {"Color", AttrType::TypeII, ValueKind::Categorical, std::nullopt},
      {"Doors", AttrType::TypeII, ValueKind::Categorical, std::nullopt},
      {"Price", AttrType::TypeIII, ValueKind::Numeric, std::string("usd")},
      {"Mileage", AttrType::TypeIII, ValueKind::Numeric, std::string("miles")},
  };
  return s;
}

// Values chosen so that no two share a first letter inside one attribute:
// plain equality and shorthand matching then agree.
inline const std::vector<std::string>& makes() {
  static const std::vector<std::string> v{"honda", "toyota", "ford", "mazda", "kia"};
  return v;
}
inline const std::vector<std::string>& colors() {
  static const std::vector<std::string> v{"red", "blue", "green", "white", "silver"};
  return v;
}
inline const std::vector<std::string>& doors() {
  static const std::vector<std::string> v{"2 door", "4 door"};
  return v;
}

inline std::string record_id(size_t i) {
  std::string s = std::to_string(i);
  return "R" + std::string(s.size() < 5 ? 5 - s.size() : 0, '0') + s;
}

// Prices and mileages are multiples of 500 and 1000 so ties happen.
inline Corpus random_corpus(std::mt19937_64& rng, size_t n, bool allow_missing = false) {
  std::vector<AdRecord> records;
  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
  };
  std::uniform_int_distribution<int> price(2, 40);
  std::uniform_int_distribution<int> miles(5, 200);
  std::bernoulli_distribution missing(0.1);
  for (size_t i = 0; i < n; ++i) {
    AdRecord r;
    r.id = record_id(i);
    r.domain = "toy";
    r.values["Make"] = pick(makes());
    if (!(allow_missing && missing(rng))) r.values["Color"] = pick(colors());
    if (!(allow_missing && missing(rng))) r.values["Doors"] = pick(doors());
    if (!(allow_missing && missing(rng))) r.values["Price"] = 500.0 * price(rng);
    r.values["Mileage"] = 1000.0 * miles(rng);
    records.push_back(std::move(r));
  }
  return Corpus(small_schema(), DomainLexicon{"toy", {}, {}, {}}, std::move(records));
}

inline Condition categorical(AttrType type, std::string attribute, std::string value, size_t pos) {
  Condition c;
  c.attr_type = type;
  c.attribute = std::move(attribute);
  c.text = normalize_value(value);
  c.display = std::move(value);
  c.tokens = {pos, pos};
  return c;
}

inline Condition numeric(std::string attribute, Comparator cmp, double value, size_t pos) {
  Condition c;
  c.attr_type = AttrType::TypeIII;
  c.attribute = std::move(attribute);
  c.comparator = cmp;
  c.number = value;
  c.display = format_number(value);
  c.tokens = {pos, pos};
  return c;
}

inline Condition between(std::string attribute, double low, double high, size_t pos) {
  Condition c = numeric(std::move(attribute), Comparator::Between, low, pos);
  c.range = {low, high, true, true};
  return c;
}

inline Condition superlative(std::string attribute, Extreme e, size_t pos) {
  Condition c;
  c.attr_type = AttrType::TypeIII;
  c.attribute = std::move(attribute);
  c.superlative = e;
  c.tokens = {pos, pos};
  return c;
}

// A random filter condition on the small schema at token position `pos`.
inline Condition random_condition(std::mt19937_64& rng, size_t pos) {
  auto pick = [&](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
  };
  switch (std::uniform_int_distribution<int>(0, 5)(rng)) {
    case 0: return categorical(AttrType::TypeI, "Make", pick(makes()), pos);
    case 1: return categorical(AttrType::TypeII, "Color", pick(colors()), pos);
    case 2: return categorical(AttrType::TypeII, "Doors", pick(doors()), pos);
    case 3: {
      const Comparator cmps[] = {Comparator::Lt, Comparator::Le, Comparator::Gt, Comparator::Ge, Comparator::Eq};
      return numeric("Price", cmps[std::uniform_int_distribution<int>(0, 4)(rng)],
                     500.0 * std::uniform_int_distribution<int>(2, 40)(rng), pos);
    }
    case 4: {
      const double a = 1000.0 * std::uniform_int_distribution<int>(5, 200)(rng);
      const double b = 1000.0 * std::uniform_int_distribution<int>(5, 200)(rng);
      return between("Mileage", std::min(a, b), std::max(a, b), pos);
    }
    default:
      return numeric("Mileage", Comparator::Lt, 1000.0 * std::uniform_int_distribution<int>(5, 200)(rng), pos);
  }
}

}  // namespace fixtures
