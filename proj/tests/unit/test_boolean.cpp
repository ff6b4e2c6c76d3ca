#include <doctest.h>

#include "../support/fixtures.hpp"
#include "adsqa/errors.hpp"

using namespace adsqa;
using fixtures::categorical;
using fixtures::numeric;

namespace {

const DomainRuntime& cars() { return fixtures::cars_service().runtime("cars"); }

std::string interpretation(const std::string& q) {
  auto tokens = strip_nonessential(tag(q, cars().trie));
  detect_negation(tokens);
  const auto cs = extract_conditions(tokens, cars().corpus);
  return to_string(interpret(tokens, cs, cars().corpus.schema()));
}

}  // namespace

TEST_CASE("different attributes are joined by AND") {
  CHECK(interpretation("automatic blue") == "Automatic AND blue");
}

TEST_CASE("values of one attribute are joined by OR") {
  CHECK(interpretation("red or blue honda") == "(red OR blue) AND Honda");
}

TEST_CASE("a second make starts a new alternative") {
  CHECK(interpretation("Toyota Corolla or a silver Honda Accord") ==
        "(Toyota AND Corolla) OR (silver AND Honda AND Accord)");
}

TEST_CASE("numeric bounds on one attribute are merged") {
  CHECK(interpretation("priced below $7000 and not less than $2000") == "Price between [2000, 7000)");
  CHECK(interpretation("honda over 5000 dollars under 9000 dollars") == "Honda AND Price between (5000, 9000)");
  CHECK_THROWS_AS(interpretation("honda over 5000 dollars under 3000 dollars"), ContradictionError);
}

TEST_CASE("contradictory bounds") {
  const Condition a = numeric("Price", Comparator::Gt, 5000, 0);
  const Condition b = numeric("Price", Comparator::Lt, 3000, 1);
  Condition not_below = numeric("Price", Comparator::Lt, 5000, 0);
  not_below.negated = true;
  CHECK_THROWS_AS(combine_type3({not_below, b}), ContradictionError);
  const auto merged = combine_type3({a, numeric("Price", Comparator::Lt, 9000, 1)});
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].comparator == Comparator::Between);
  CHECK(merged[0].range == NumericRange{5000, 9000, false, false});
}

TEST_CASE("tree construction") {
  const auto a = BoolExpr::leaf(categorical(AttrType::TypeI, "Make", "honda", 0));
  const auto b = BoolExpr::leaf(categorical(AttrType::TypeII, "Color", "red", 1));
  const auto c = BoolExpr::negation(categorical(AttrType::TypeII, "Doors", "2 door", 2));
  const auto nested = BoolExpr::all_of({a, BoolExpr::all_of({b, c})});
  CHECK(nested.kind == BoolExpr::Kind::And);
  CHECK(nested.children.size() == 3);
  CHECK(BoolExpr::any_of({a}) == a);
  CHECK(to_string(BoolExpr::any_of({nested, a})) == "(honda AND red AND NOT 2 door) OR honda");
  CHECK_NOTHROW(validate(nested));
  BoolExpr bad;
  bad.kind = BoolExpr::Kind::And;
  bad.children = {a};
  CHECK_THROWS(validate(bad));
  CHECK(leaves(nested).size() == 3);
  CHECK(nested.position() == 0);
}

TEST_CASE("evaluate follows the connectives") {
  const auto a = BoolExpr::leaf(categorical(AttrType::TypeI, "Make", "honda", 0));
  const auto b = BoolExpr::negation(categorical(AttrType::TypeII, "Color", "red", 1));
  auto truth = [](bool ha, bool hb) {
    return [=](const Condition& c) { return c.text == "honda" ? ha : hb; };
  };
  const auto both = BoolExpr::all_of({a, b});
  CHECK(evaluate(both, truth(true, false)));
  CHECK_FALSE(evaluate(both, truth(true, true)));
  CHECK(evaluate(BoolExpr::any_of({a, b}), truth(false, false)));
}

TEST_CASE("mutual exclusion") {
  const auto& schema = cars().corpus.schema();
  CHECK(mutually_exclusive(categorical(AttrType::TypeII, "Color", "red", 0),
                           categorical(AttrType::TypeII, "Color", "blue", 1), schema));
  CHECK_FALSE(mutually_exclusive(categorical(AttrType::TypeII, "Color", "red", 0),
                                 categorical(AttrType::TypeII, "Doors", "2 door", 1), schema));
}

TEST_CASE("an empty condition list is rejected") {
  CHECK_THROWS_AS(interpret({}, {}, cars().corpus.schema()), AnalysisError);
}
