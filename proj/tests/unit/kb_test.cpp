#include <doctest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "neuroquery/error.hpp"
#include "neuroquery/kb.hpp"
#include "neuroquery/nql.hpp"
#include "oracles.hpp"

using neuroquery::CsvKind;
using neuroquery::Frame;
using neuroquery::KnowledgeBase;
using neuroquery::Term;

namespace {
Term T(const char* src) { return neuroquery::parse_term(src); }
}  // namespace

TEST_SUITE("kb") {
  TEST_CASE("asserted facts are found by pattern") {
    KnowledgeBase kb;
    CHECK(kb.assert_fact(T("(B00001P4ZH, price, 39.36)")));
    CHECK_FALSE(kb.assert_fact(T("(B00001P4ZH, price, 39.36)")));
    const auto frames = kb.match(T("(B00001P4ZH, price, ?v)"), {});
    REQUIRE(frames.size() == 1);
    CHECK(*frames[0].lookup("v") == Term::real(39.36));
    CHECK_THROWS_AS(kb.assert_fact(T("(B00001P4ZH, price, ?v)")), neuroquery::NonGroundFact);
  }

  TEST_CASE("loading the catalog fixture") {
    KnowledgeBase kb;
    fixtures::load_catalog(kb);
    const auto frames = kb.match(T("(B00001P4ZH, ?p, ?v)"), {});
    CHECK(frames.size() == 12);
    CHECK(kb.facts_matching(T("(B00001P4ZH, stars, ?v)"), {}).at(0).elements()[2] == Term::real(4.7));
    const Term model = kb.facts_matching(T("(B00001P4ZH, item_model_number, ?v)"), {}).at(0).elements()[2];
    CHECK(model.kind() == Term::Kind::integer);
    CHECK(model.as_integer() == 6303157);
    const auto title = kb.facts_matching(T("(B00001P4ZH, title, ?v)"), {}).at(0).elements()[2];
    CHECK(title == Term::text("koss portapro headphones with case"));
  }

  TEST_CASE("review text stays text even when it looks like a word or number") {
    std::istringstream in("r1,text,Great\nr2,text,42\nB1,review,r1\n");
    KnowledgeBase kb;
    CHECK(kb.load_csv(in, CsvKind::reviews) == 3);
    CHECK(kb.facts()[0].elements()[2] == Term::text("Great"));
    CHECK(kb.facts()[1].elements()[2] == Term::text("42"));
    CHECK(kb.facts()[2].elements()[2] == Term::identifier("r1"));
  }

  TEST_CASE("quoted cells may hold commas, quotes and newlines") {
    std::istringstream in("r1,text,\"one, two \"\"three\"\"\nfour\"\r\nr2,text,plain\n");
    const auto rows = neuroquery::read_csv_facts(in, CsvKind::reviews);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].fact.elements()[2].str() == "one, two \"three\"\nfour");
    CHECK(rows[1].line == 3);
  }

  TEST_CASE("malformed rows report their line") {
    std::istringstream two_cells("a,b,c\nd,e\n");
    try {
      neuroquery::read_csv_facts(two_cells, CsvKind::properties);
      FAIL("expected MalformedRow");
    } catch (const neuroquery::MalformedRow& e) {
      CHECK(e.line() == 2);
    }
    std::istringstream unterminated("a,b,\"open\n");
    CHECK_THROWS_AS(neuroquery::read_csv_facts(unterminated, CsvKind::properties), neuroquery::MalformedRow);
    std::istringstream wrong_shape("B1,price,3\n");
    CHECK_THROWS_AS(neuroquery::read_csv_facts(wrong_shape, CsvKind::reviews), neuroquery::MalformedRow);
    CHECK_THROWS_AS(KnowledgeBase{}.load_csv(fixtures::data("missing.csv"), CsvKind::properties),
                    neuroquery::IoError);
  }

  TEST_CASE("index agrees with a full scan") {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 20; ++round) {
      KnowledgeBase kb;
      const auto mini = oracles::random_mini_kb(rng, 150);
      for (const auto& f : mini.facts)
        kb.assert_fact(Term::tuple({oracles::code_to_term(f[0]), oracles::code_to_term(f[1]), oracles::code_to_term(f[2])}));
      for (int q = 0; q < 30; ++q) {
        auto slot = [&](int lo, int hi) {
          const int r = std::uniform_int_distribution<int>(0, 3)(rng);
          if (r < 2) return Term::variable("v" + std::to_string(r));
          return oracles::code_to_term(std::uniform_int_distribution<int>(lo, hi)(rng));
        };
        const Term pattern = Term::tuple({slot(100, 107), slot(200, 202), slot(0, 9)});
        Frame frame;
        if (q % 3 == 0) frame = frame.extend("v0", oracles::code_to_term(100 + q % 8));
        CHECK(kb.facts_matching(pattern, frame) == kb.facts_matching_scan(pattern, frame));
      }
    }
  }

  TEST_CASE("numeric tower applies to lookups") {
    KnowledgeBase kb;
    kb.assert_fact(T("(B1, total_reviews, 14549)"));
    CHECK(kb.facts_matching(T("(B1, total_reviews, 14549.0)"), {}).size() == 1);
    CHECK_FALSE(kb.assert_fact(T("(B1, total_reviews, 14549.0)")));
  }
}
