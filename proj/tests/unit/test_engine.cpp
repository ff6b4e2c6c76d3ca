#include <doctest.h>

#include "../support/fixtures.hpp"
#include "adsqa/engine.hpp"

using namespace adsqa;
using fixtures::categorical;
using fixtures::numeric;

namespace {

Corpus store(std::vector<AdRecord> recs) { return Corpus(fixtures::small_schema(), {}, std::move(recs)); }

AdRecord ad(std::string id, std::string make, std::string doors, double price) {
  return {std::move(id), "toy", {{"Make", make}, {"Doors", doors}, {"Price", price}}};
}

}  // namespace

TEST_CASE("plan buckets leaves by type and keeps superlatives last") {
  const auto e = BoolExpr::all_of({BoolExpr::leaf(numeric("Price", Comparator::Lt, 5000, 0)),
                                   BoolExpr::leaf(fixtures::superlative("Mileage", Extreme::Min, 1)),
                                   BoolExpr::leaf(categorical(AttrType::TypeII, "Color", "red", 2)),
                                   BoolExpr::leaf(categorical(AttrType::TypeI, "Make", "honda", 3))});
  const QueryPlan p = plan(e);
  CHECK(p.stage1.size() == 1);
  CHECK(p.stage2.size() == 1);
  CHECK(p.stage3.size() == 1);
  CHECK(p.stage4.size() == 1);
  CHECK(p.conjunctive);
  REQUIRE(p.overlay.has_value());
  CHECK(leaves(*p.overlay).size() == 3);

  const QueryPlan only = plan(BoolExpr::leaf(fixtures::superlative("Price", Extreme::Max, 0)));
  CHECK_FALSE(only.overlay.has_value());

  const QueryPlan either = plan(BoolExpr::any_of({BoolExpr::leaf(categorical(AttrType::TypeI, "Make", "kia", 0)),
                                                  BoolExpr::leaf(categorical(AttrType::TypeI, "Make", "ford", 1))}));
  CHECK_FALSE(either.conjunctive);
}

TEST_CASE("SQL rendering is deterministic and staged") {
  const auto& schema = fixtures::small_schema();
  const auto e = BoolExpr::all_of({BoolExpr::leaf(numeric("Price", Comparator::Lt, 5000, 0)),
                                   BoolExpr::leaf(categorical(AttrType::TypeI, "Make", "Honda", 1))});
  const std::string sql = to_sql(plan(e), schema);
  CHECK(sql == to_sql(plan(e), schema));
  CHECK(sql.find("C.Make = 'Honda'") < sql.find("C.Price < 5000"));
  CHECK(sql.rfind("SELECT * FROM Toy_Ads WHERE Toy_ID IN", 0) == 0);
  const std::string relaxed = to_sql(plan(e), schema, true);
  CHECK(relaxed.find(" OR ") != std::string::npos);

  const auto cheapest = BoolExpr::all_of({BoolExpr::leaf(fixtures::superlative("Price", Extreme::Min, 0)),
                                          BoolExpr::leaf(categorical(AttrType::TypeI, "Make", "Honda", 1))});
  const std::string s2 = to_sql(plan(cheapest), schema);
  CHECK(s2.find("ORDER BY Price ASC LIMIT 30") != std::string::npos);
}

TEST_CASE("shorthand values match stored spellings") {
  const Corpus c = store({ad("A", "Honda", "4dr", 1000), ad("B", "Honda", "2 door", 1000),
                          ad("C", "Kia", "4-door", 1000)});
  const QueryPlan p = plan(BoolExpr::leaf(categorical(AttrType::TypeII, "Doors", "4 doors", 0)));
  CHECK(matching_records(p, c) == std::vector<size_t>{0, 2});
  const SubstringIndex ix = SubstringIndex::build(c);
  CHECK(matching_records(p, c, &ix) == std::vector<size_t>{0, 2});
}

TEST_CASE("empty store and missing values") {
  const Corpus empty = store({});
  const QueryPlan p = plan(BoolExpr::leaf(categorical(AttrType::TypeI, "Make", "honda", 0)));
  CHECK(matching_records(p, empty).empty());
  CHECK(execute(p, empty).empty());
  CHECK(relax_n_minus_1(p, empty, {}).empty());

  const Corpus c = store({{"A", "toy", {{"Make", std::string("Honda")}}}, ad("B", "Honda", "2dr", 700)});
  const QueryPlan cheapest = plan(BoolExpr::leaf(fixtures::superlative("Price", Extreme::Min, 0)));
  CHECK(matching_records(cheapest, c) == std::vector<size_t>{1});
}

TEST_CASE("superlatives keep ties") {
  const Corpus c = store({ad("A", "Honda", "2dr", 500), ad("B", "Kia", "2dr", 500), ad("C", "Kia", "2dr", 900)});
  CHECK(matching_records(plan(BoolExpr::leaf(fixtures::superlative("Price", Extreme::Min, 0))), c) ==
        std::vector<size_t>{0, 1});
}

TEST_CASE("execute caps answers") {
  std::vector<AdRecord> recs;
  for (int i = 0; i < 50; ++i) recs.push_back(ad(fixtures::record_id(i), "Honda", "2dr", 1000));
  const Corpus c = store(recs);
  const auto r = execute(plan(BoolExpr::leaf(categorical(AttrType::TypeI, "Make", "honda", 0))), c);
  CHECK(r.size() == kDefaultAnswerCap);
  CHECK(r.front().kind == MatchKind::Exact);
  CHECK(r.front().conditions == 1);
}

TEST_CASE("conjunctive terms distribute AND over OR") {
  const auto a = BoolExpr::leaf(categorical(AttrType::TypeI, "Make", "honda", 0));
  const auto b = BoolExpr::leaf(categorical(AttrType::TypeI, "Make", "kia", 1));
  const auto c = BoolExpr::leaf(categorical(AttrType::TypeII, "Color", "red", 2));
  const auto d = BoolExpr::leaf(categorical(AttrType::TypeII, "Doors", "2 door", 3));
  const auto terms = conjunctive_terms(BoolExpr::any_of({BoolExpr::all_of({a, c}), BoolExpr::all_of({b, d})}));
  REQUIRE(terms.size() == 2);
  CHECK(terms[0].size() == 2);
  // an OR of literals inside an AND stays one unit
  const auto unit = conjunctive_terms(BoolExpr::all_of({BoolExpr::any_of({c, BoolExpr::leaf(categorical(
                                                                                 AttrType::TypeII, "Color", "blue", 4))}),
                                                        a}));
  REQUIRE(unit.size() == 1);
  CHECK(unit[0].size() == 2);
}

TEST_CASE("N-1 relaxation drops exactly one unit") {
  const Corpus c = store({ad("A", "Honda", "2dr", 1000), ad("B", "Honda", "4dr", 1000), ad("C", "Kia", "4dr", 1000),
                          ad("D", "Honda", "2dr", 9000)});
  const auto e = BoolExpr::all_of({BoolExpr::leaf(categorical(AttrType::TypeI, "Make", "honda", 0)),
                                   BoolExpr::leaf(categorical(AttrType::TypeII, "Doors", "2 door", 1)),
                                   BoolExpr::leaf(numeric("Price", Comparator::Lt, 5000, 2))});
  const QueryPlan p = plan(e);
  const auto exact = matching_records(p, c);
  CHECK(exact == std::vector<size_t>{0});
  const auto partial = relax_n_minus_1(p, c, exact);
  REQUIRE(partial.size() == 2);
  CHECK(partial[0].record_id == "B");
  CHECK(partial[0].satisfied == 2);
  CHECK(to_string(*partial[0].dropped) == "2 door");
  CHECK(partial[1].record_id == "D");
  CHECK(to_string(*partial[1].dropped) == "Price < 5000");
}

TEST_CASE("index keys") {
  CHECK(SubstringIndex::keys_of("blue") == std::vector<std::string>{"blu", "lue"});
  CHECK(SubstringIndex::keys_of("x5") == std::vector<std::string>{"x5"});
}
