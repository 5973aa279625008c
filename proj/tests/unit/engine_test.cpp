#include <doctest.h>

#include <limits>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "neuroquery/engine.hpp"
#include "neuroquery/error.hpp"
#include "neuroquery/nql.hpp"
#include "neuroquery/session.hpp"
#include "oracles.hpp"
#include "stub_gateway.hpp"

using namespace neuroquery;

namespace {

Term T(const char* src) { return parse_term(src); }

std::vector<Frame> run(Session& s, const std::string& source) {
  const auto results = s.execute(source);
  REQUIRE_FALSE(results.empty());
  return results.back().frames;
}

std::set<std::pair<std::string, double>> asin_prices(const std::vector<Frame>& frames) {
  std::set<std::pair<std::string, double>> out;
  for (const auto& f : frames) out.emplace(f.lookup("asin")->str(), f.lookup("price")->number());
  return out;
}

Session catalog_session(std::unique_ptr<Gateway> gateway = std::make_unique<FallbackGateway>(),
                        EngineOptions options = {}) {
  Session s(options, std::move(gateway));
  fixtures::load_catalog(s.kb());
  return s;
}

bool passes(const char* expr, const Frame& f) { return filter_passes(parse_filter_expr(expr), f); }

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("properties of one product") {
    Session s = catalog_session();
    const auto frames = run(s, "search(B00001P4ZH.?property == ?value)");
    CHECK(frames.size() == 12);
    CHECK(render_record(frames[1]) == R"({"?property":"price","?value":39.36})");
  }

  TEST_CASE("headphones around 30 dollars") {
    Session s = catalog_session();
    const auto frames = run(s, fixtures::query("price_range.nql"));
    const std::set<std::pair<std::string, double>> expected{
        {"B00001P4ZH", 39.36}, {"B0007XJSQC", 24.95}, {"B000AJIF4E", 29.99}, {"B000065BP9", 39.0},
        {"B00HVLUR86", 22.5},  {"B004OA7DX0", 24.0},  {"B00NJ2M33I", 21.99}, {"B01DJH7U2M", 34.5},
        {"B00AQOPGEM", 31.2},  {"B07Q38NL4Y", 38.0}};
    CHECK(frames.size() == 10);
    CHECK(asin_prices(frames) == expected);
  }

  TEST_CASE("refined by review count and availability") {
    Session s = catalog_session();
    const auto frames = run(s, fixtures::query("refined_range.nql"));
    REQUIRE(frames.size() == 3);
    std::set<std::tuple<std::string, double, std::int64_t>> got;
    for (const auto& f : frames)
      got.emplace(f.lookup("asin")->str(), f.lookup("price")->number(), f.lookup("total_reviews")->as_integer());
    const std::set<std::tuple<std::string, double, std::int64_t>> expected{
        {"B00001P4ZH", 39.36, 14549}, {"B0007XJSQC", 24.95, 14980}, {"B000AJIF4E", 29.99, 22071}};
    CHECK(got == expected);
    for (const auto& f : frames) CHECK(f.size() == 4);
  }

  TEST_CASE("extracted answers for the full question") {
    Session s = catalog_session(std::make_unique<fixtures::PhraseGateway>(fixtures::bass_phrases()));
    const auto frames = run(s, fixtures::query("bass_answers.nql"));
    REQUIRE(frames.size() == 2);
    CHECK(frames[0].lookup("asin")->str() == "B000AJIF4E");
    CHECK(frames[0].lookup("review")->str() == "5e96b0052898fe667cf622888fc5af69");
    const Term& answer = *frames[0].lookup("answers");
    CHECK(answer.elements()[0] == Term::text("Bass is amazing"));
    CHECK(answer.elements()[2] == Term::integer(0));
    CHECK(answer.elements()[3] == Term::integer(15));
    CHECK(answer.elements()[4] == Term::identifier("5e96b0052898fe667cf622888fc5af69"));
    CHECK(frames[1].lookup("asin")->str() == "B00001P4ZH");
    CHECK(frames[1].lookup("review")->str() == "d040f2713caa2aff0ce95affb40e12c2");
    CHECK(frames[1].lookup("answers")->elements()[0] == Term::text("Bass is weak as expected"));
  }

  TEST_CASE("well ranked rule") {
    Session s = catalog_session(std::make_unique<fixtures::PhraseGateway>(fixtures::bass_phrases()));
    const auto frames = run(s, fixtures::query("well_ranked.nql"));
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].lookup("asin")->str() == "B000AJIF4E");
    CHECK(frames[0].lookup("answers")->elements()[0] == Term::text("Bass is amazing"));
    // rule-internal variables stay hidden
    for (const auto& [name, value] : frames[0].bindings()) {
      CHECK(name.find('~') == std::string::npos);
      CHECK(name != "stars");
    }
  }

  TEST_CASE("hermetic run of the full question") {
    Session s = catalog_session();
    const auto frames = run(s, fixtures::query("bass_answers.nql"));
    REQUIRE_FALSE(frames.empty());
    for (const auto& f : frames) {
      const Term& a = *f.lookup("answers");
      const std::string& text = f.lookup("review_text")->str();
      const auto start = static_cast<std::size_t>(a.elements()[2].as_integer());
      const auto end = static_cast<std::size_t>(a.elements()[3].as_integer());
      CHECK(start < end);
      CHECK(end <= utf8_length(text));
      CHECK(utf8_slice(text, start, end) == a.elements()[0].str());
    }
  }

  TEST_CASE("filters keep or drop frames") {
    const Frame near = Frame{}.extend("price", Term::real(39.36));
    const Frame far = Frame{}.extend("price", Term::real(49.0));
    CHECK(passes("abs(?price - 30) < 10", near));
    CHECK_FALSE(passes("abs(?price - 30) < 10", far));
    CHECK(passes("?total_reviews >= 14000", Frame{}.extend("total_reviews", Term::integer(14549))));
  }

  TEST_CASE("filter evaluation rules") {
    const Frame f = Frame{}
                        .extend("i", Term::integer(std::numeric_limits<std::int64_t>::max()))
                        .extend("s", Term::identifier("no"))
                        .extend("t", Term::tuple({Term::integer(1)}))
                        .extend("z", Term::integer(0));
    CHECK(evaluate_filter(parse_filter_expr("?i + 1"), f).term.kind() == Term::Kind::real);
    CHECK(evaluate_filter(parse_filter_expr("7 / 2"), f).term == Term::real(3.5));
    CHECK(evaluate_filter(parse_filter_expr("7 * 2"), f).term.kind() == Term::Kind::integer);
    CHECK_THROWS_AS(evaluate_filter(parse_filter_expr("1 / ?z"), f), FilterTypeError);
    CHECK_THROWS_AS(filter_passes(parse_filter_expr("?s < 3"), f), FilterTypeError);
    CHECK_THROWS_AS(filter_passes(parse_filter_expr("?s == 3"), f), FilterTypeError);
    CHECK_THROWS_AS(filter_passes(parse_filter_expr("?t == 3"), f), FilterTypeError);
    CHECK_THROWS_AS(filter_passes(parse_filter_expr("?s + 1 > 0"), f), FilterTypeError);
    CHECK_THROWS_AS(filter_passes(parse_filter_expr("?z + 1"), f), FilterTypeError);
    CHECK_THROWS_AS(filter_passes(parse_filter_expr("?missing > 1"), f), UnboundVariableInFilter);
    CHECK(passes("?s == \"no\"", f));
    CHECK(passes("?s != \"yes\"", f));
    CHECK(passes("?z == 0.0", f));
    // short-circuit: the right operand is never evaluated
    CHECK(passes("?z == 0 or ?missing > 1", f));
    CHECK_FALSE(passes("?z == 1 and ?missing > 1", f));
    CHECK(passes("not (?z > 0)", f));
  }

  TEST_CASE("top k counts distinct documents") {
    Session s;
    s.execute(R"(
      fact((p1, title, "bass heavy headphones"))
      fact((p1, color, red))
      fact((p1, color, blue))
      fact((p2, title, "plain speakers with bass"))
      fact((p3, title, "nothing relevant"))
    )");
    auto frames = run(s, R"(search((?p, color, ?c), bm25_match(?p.title == ?t, "bass headphones", 1)))");
    CHECK(frames.size() == 2);
    frames = run(s, R"(search(bm25_match(?p.title == ?t, "bass", 5), (?p, color, ?c)))");
    CHECK(frames.size() == 2);
    frames = run(s, R"(search(bm25_match(?p.title == ?t, "bass", 5)))");
    CHECK(frames.size() == 2);
    frames = run(s, R"(search(neural_match(?p.title == ?t, "bass", 2)))");
    CHECK(frames.size() == 2);
    CHECK_THROWS_AS(run(s, R"(search(bm25_match(?p.title == ?t, "bass", 0)))"), ParseError);
  }

  TEST_CASE("answer variable must be fresh") {
    Session s = catalog_session();
    CHECK_THROWS_AS(run(s, R"(search((?a, review, ?answers), neural_extract(?answers, ?answers.text == ?t, "bass?", 1)))"),
                    VariableAlreadyBound);
  }

  TEST_CASE("unanswered frames are dropped unless requested") {
    const std::string q = R"(search(?a.review == ?r, neural_extract(?ans, ?r.text == ?t, "how is the bass?", 1)))";
    Session strict = catalog_session(std::make_unique<fixtures::PhraseGateway>(fixtures::bass_phrases()));
    CHECK(run(strict, q).size() == 1);
    EngineOptions keep;
    keep.keep_unanswered = true;
    Session lenient = catalog_session(std::make_unique<fixtures::PhraseGateway>(fixtures::bass_phrases()), keep);
    const auto frames = run(lenient, q);
    CHECK(frames.size() == 5);
    CHECK(frames[0].binds("ans"));
    CHECK_FALSE(frames[4].binds("ans"));
  }

  TEST_CASE("neural clauses need a gateway") {
    KnowledgeBase kb;
    fixtures::load_catalog(kb);
    RuleStore rules;
    QueryEngine engine(kb, rules, nullptr);
    const auto p = parse_program(R"(search(neural_match(?r.text == ?t, "bass", 1)))");
    CHECK_THROWS_AS(engine.search(std::get<SearchStmt>(p.statements[0]).clauses), GatewayUnavailable);
  }

  TEST_CASE("recursive rules") {
    Session s;
    s.execute(R"(
      fact((a, parent, b))
      fact((b, parent, c))
      fact((c, parent, d))
      rule(?x.ancestor == ?y, ?x.parent == ?y)
      rule(?x.ancestor == ?y, ?x.parent == ?z, ?z.ancestor == ?y)
    )");
    std::set<std::string> got;
    for (const auto& f : run(s, "search(a.ancestor == ?who)")) got.insert(f.lookup("who")->str());
    CHECK(got == std::set<std::string>{"b", "c", "d"});
    CHECK(run(s, "search(?x.ancestor == d)").size() == 3);
  }

  TEST_CASE("rule depth is bounded") {
    EngineOptions options;
    options.max_rule_depth = 8;
    Session s(options);
    s.execute("fact((a, next, b))\nrule(?x.loop == ?y, ?x.loop == ?y)");
    CHECK_THROWS_AS(run(s, "search(a.loop == ?y)"), RuleDepthExceeded);
    Session deep(options);
    deep.execute("fact((n0, next, n1))");
    for (int i = 1; i < 12; ++i)
      deep.execute("fact((n" + std::to_string(i) + ", next, n" + std::to_string(i + 1) + "))");
    deep.execute("rule(?x.reach == ?y, ?x.next == ?y)\nrule(?x.reach == ?y, ?x.next == ?z, ?z.reach == ?y)");
    CHECK_THROWS_AS(run(deep, "search(n0.reach == ?y)"), RuleDepthExceeded);
    CHECK(run(deep, "search(n10.reach == ?y)").size() == 2);
  }

  TEST_CASE("invalid rules") {
    RuleStore rules;
    CHECK_THROWS_AS(rules.define(Rule{T("(a, b)"), {}}), InvalidRule);
    CHECK_THROWS_AS(rules.define(Rule{T("a"), {PatternClause{T("(a, b)")}}}), InvalidRule);
  }

  TEST_CASE("errors name the failing clause") {
    Session s;
    CHECK(run(s, "search((?a, b, ?c), op_filter(?q > 1))").empty());
    s.execute("fact((x, v, 1))");
    try {
      run(s, "search((?a, v, ?c), op_filter(?q > 1))");
      FAIL("expected an error");
    } catch (const UnboundVariableInFilter& e) {
      CHECK(e.name() == "q");
    }
    try {
      run(s, "search((?a, v, ?c), op_filter(?q > 1))");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.describe().find("clause 2") != std::string::npos);
    }
  }

  TEST_CASE("pattern and filter queries match brute-force enumeration") {
    std::mt19937_64 rng(5);
    for (int round = 0; round < 10; ++round) {
      const auto mini = oracles::random_mini_kb(rng, 120);
      KnowledgeBase kb;
      for (const auto& f : mini.facts)
        kb.assert_fact(Term::tuple({oracles::code_to_term(f[0]), oracles::code_to_term(f[1]), oracles::code_to_term(f[2])}));
      RuleStore rules;
      QueryEngine engine(kb, rules, nullptr);
      for (int q = 0; q < 10; ++q) {
        const auto query = oracles::random_mini_query(rng, 4);
        const auto expected = oracles::enumerate_answers(mini, query);
        std::multiset<std::vector<int>> got;
        for (const auto& f : engine.search(oracles::mini_clauses(query))) got.insert(oracles::frame_answer(f, query.n_vars));
        CHECK(got.size() == expected.size());
        CHECK(std::set<std::vector<int>>(got.begin(), got.end()) == expected);
      }
    }
  }
}
