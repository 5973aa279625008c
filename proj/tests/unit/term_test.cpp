#include <doctest.h>

#include <cmath>
#include <limits>
#include <unordered_set>

#include "neuroquery/term.hpp"

using neuroquery::Frame;
using neuroquery::Term;

TEST_SUITE("term") {
  TEST_CASE("csv cells follow integer, float, identifier, text precedence") {
    CHECK(Term::parse_atom("6303157").kind() == Term::Kind::integer);
    CHECK(Term::parse_atom("6303157").as_integer() == 6303157);
    CHECK(Term::parse_atom("4.7").kind() == Term::Kind::real);
    CHECK(Term::parse_atom("4.7").as_real() == 4.7);
    CHECK(Term::parse_atom("-12").as_integer() == -12);
    CHECK(Term::parse_atom("1e3").kind() == Term::Kind::real);
    CHECK(Term::parse_atom("B00001P4ZH").kind() == Term::Kind::identifier);
    CHECK(Term::parse_atom("no").kind() == Term::Kind::identifier);
    CHECK(Term::parse_atom("koss portapro headphones with case").kind() == Term::Kind::text);
    CHECK(Term::parse_atom("99999999999999999999").kind() == Term::Kind::real);
  }

  TEST_CASE("numbers compare across the numeric tower") {
    CHECK(Term::integer(14549) == Term::real(14549.0));
    CHECK(Term::integer(14549).hash() == Term::real(14549.0).hash());
    CHECK(Term::integer(1) != Term::real(1.5));
    CHECK_FALSE(neuroquery::identical(Term::integer(1), Term::real(1.0)));
    CHECK(neuroquery::identical(Term::real(2.5), Term::real(2.5)));
  }

  TEST_CASE("hash is consistent with equality for large integers") {
    const std::int64_t big = (std::int64_t{1} << 53) + 1;
    CHECK(Term::integer(big) != Term::real(static_cast<double>(big)));
    std::unordered_set<Term> set{Term::integer(3), Term::real(3.0), Term::integer(4)};
    CHECK(set.size() == 2);
  }

  TEST_CASE("text and identifiers never compare equal") {
    CHECK(Term::text("no") != Term::identifier("no"));
    CHECK(Term::string_literal("no").kind() == Term::Kind::identifier);
    CHECK(Term::string_literal("how is the bass?").kind() == Term::Kind::text);
    CHECK(Term::string_literal("x-1_a").kind() == Term::Kind::identifier);
    CHECK(Term::string_literal("").kind() == Term::Kind::text);
  }

  TEST_CASE("tuples compare elementwise") {
    const Term a = Term::tuple({Term::identifier("B00001P4ZH"), Term::identifier("price"), Term::real(39.36)});
    const Term b = Term::tuple({Term::identifier("B00001P4ZH"), Term::identifier("price"), Term::real(39.36)});
    CHECK(a == b);
    CHECK(a.hash() == b.hash());
    CHECK(a.arity() == 3);
    CHECK(a.is_ground());
    CHECK_FALSE(Term::tuple({Term::variable("x")}).is_ground());
    CHECK(a != Term::tuple({Term::identifier("B00001P4ZH"), Term::identifier("price")}));
  }

  TEST_CASE("plain forms") {
    CHECK(Term::real(39.36).plain() == "39.36");
    CHECK(Term::real(24.0).plain() == "24.0");
    CHECK(Term::integer(-3).plain() == "-3");
    CHECK(Term::variable("asin").plain() == "?asin");
    CHECK(Term::tuple({Term::identifier("a"), Term::integer(1)}).plain() == "(a, 1)");
  }

  TEST_CASE("format_real round-trips") {
    for (double v : {0.1, 39.36, 1e300, -2.5e-12, 14549.0, 1.0 / 3.0}) {
      const std::string s = neuroquery::format_real(v);
      CHECK(std::stod(s) == v);
      CHECK(s.find_first_of(".e") != std::string::npos);
    }
  }

  TEST_CASE("frames keep first-binding order and share structure") {
    Frame empty;
    const Frame one = empty.extend("asin", Term::identifier("B000AJIF4E"));
    const Frame two = one.extend("price", Term::real(29.99));
    CHECK(empty.empty());
    CHECK(one.size() == 1);
    CHECK(two.size() == 2);
    CHECK_FALSE(one.binds("price"));
    REQUIRE(two.lookup("price") != nullptr);
    CHECK(*two.lookup("price") == Term::real(29.99));
    const auto b = two.bindings();
    REQUIRE(b.size() == 2);
    CHECK(b[0].first == "asin");
    CHECK(b[1].first == "price");
  }
}
