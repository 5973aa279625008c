#include <doctest.h>

#include <cmath>
#include <random>

#include "neuroquery/error.hpp"
#include "neuroquery/metrics.hpp"

using namespace neuroquery;

TEST_SUITE("metrics") {
  TEST_CASE("answer normalization") {
    CHECK(normalize_answer("The Bass!") == "bass");
    CHECK(normalize_answer("  An   apple, a day ") == "apple day");
    CHECK(answer_tokens("Bass is weak as expected") == std::vector<std::string>{"bass", "is", "weak", "as", "expected"});
  }

  TEST_CASE("exact match") {
    CHECK(em_score("The Bass!", {"bass"}) == 1.0);
    CHECK(em_score("bass", {"treble", "Bass."}) == 1.0);
    CHECK(em_score("bass is", {"bass"}) == 0.0);
    CHECK(em_score("", {}) == 1.0);
    CHECK(em_score("x", {}) == 0.0);
  }

  TEST_CASE("token f1") {
    CHECK(f1_score("bass is weak", {"Bass is weak as expected"}) == 0.75);
    CHECK(f1_score("weak weak", {"weak"}) == doctest::Approx(2.0 / 3.0));
    CHECK(f1_score("nothing", {"bass"}) == 0.0);
    CHECK(f1_score("bass", {"treble", "bass"}) == 1.0);
    CHECK(f1_score("", {""}) == 1.0);
    CHECK(f1_score("the", {"bass"}) == 0.0);
  }

  TEST_CASE("bleu tokenizer") {
    CHECK(bleu_tokenize("op_filter(?x>=1)") ==
          std::vector<std::string>{"op_filter", "(", "?", "x", ">=", "1", ")"});
    CHECK(bleu_tokenize("a==b != c") == std::vector<std::string>{"a", "==", "b", "!=", "c"});
    CHECK(bleu_tokenize("'no',5") == std::vector<std::string>{"'", "no", "'", ",", "5"});
    CHECK(bleu_tokenize("").empty());
  }

  TEST_CASE("bleu hand counts") {
    const auto r = bleu_corpus({"the cat sat on the mat"}, {"the cat sat on a mat"});
    CHECK(r.matches == std::vector<std::size_t>{5, 3, 2, 1});
    CHECK(r.totals == std::vector<std::size_t>{6, 5, 4, 3});
    CHECK(r.brevity_penalty == 1.0);
    CHECK(r.bleu == doctest::Approx(std::pow(5.0 / 6 * 3.0 / 5 * 2.0 / 4 * 1.0 / 3, 0.25)).epsilon(1e-12));
    const auto s = bleu_corpus({"the cat sat on the mat"}, {"the cat sat on a mat"}, {4, true});
    CHECK(s.bleu == doctest::Approx(std::pow(5.0 / 6 * 4.0 / 6 * 3.0 / 5 * 2.0 / 4, 0.25)).epsilon(1e-12));
  }

  TEST_CASE("bleu brevity and short candidates") {
    const auto r = bleu_corpus({"the cat"}, {"the cat sat on the mat"});
    CHECK(r.brevity_penalty == doctest::Approx(std::exp(-2.0)));
    CHECK(r.bleu == doctest::Approx(std::exp(-2.0)));
    CHECK(bleu_corpus({"a b"}, {"c d"}).bleu == 0.0);
    CHECK(bleu_corpus({""}, {""}).bleu == 1.0);
    CHECK(bleu_corpus({""}, {"x"}).bleu == 0.0);
  }

  TEST_CASE("bleu of a corpus against itself is one") {
    const std::vector<std::string> corpus{
        "search(bm25_match(?asin.title == ?title, \"headphones\", 80), ?asin.price == ?price)",
        "search(?a.stars == ?s, op_filter(?s >= 4.0))", "x", "a b"};
    CHECK(bleu_corpus(corpus, corpus).bleu == 1.0);
    CHECK(bleu_corpus(corpus, corpus, {4, true}).bleu == 1.0);
  }

  TEST_CASE("bleu input checks") {
    CHECK_THROWS_AS(bleu_corpus({"a"}, {"a", "b"}), LengthMismatch);
    CHECK_THROWS_AS(bleu_corpus({}, {}), LengthMismatch);
  }

  TEST_CASE("recall at k") {
    const std::vector<QAExample> examples{{"q1", "A", "?", {"x"}, {"r1"}},
                                          {"q2", "A", "?", {"x"}, {"r2", "r3"}},
                                          {"q3", "B", "?", {}, {}}};
    const std::map<std::string, RetrievalRun> runs{{"q1", {"q1", {"r1", "r9"}, {1, 0.5}}},
                                                   {"q2", {"q2", {"r9", "r8", "r3"}, {1, 0.9, 0.8}}},
                                                   {"q3", {"q3", {}, {}}}};
    const auto r1 = recall_at_k(examples, runs, 1);
    CHECK(r1.value == 0.5);
    CHECK(r1.excluded == 1);
    CHECK(r1.per_example.size() == 2);
    CHECK(recall_at_k(examples, runs, 3).value == 1.0);
    CHECK_THROWS_AS(recall_at_k(examples, {}, 1), MissingRun);
  }

  TEST_CASE("recall at k never decreases") {
    std::mt19937_64 rng(3);
    std::vector<QAExample> examples;
    std::map<std::string, RetrievalRun> runs;
    for (int i = 0; i < 20; ++i) {
      const std::string qid = "q" + std::to_string(i);
      examples.push_back({qid, "A", "?", {"x"}, {"r" + std::to_string(i % 7)}});
      RetrievalRun run{qid, {}, {}};
      for (int j = 0; j < 25; ++j) {
        run.doc_ids.push_back("r" + std::to_string(std::uniform_int_distribution<int>(0, 30)(rng)));
        run.scores.push_back(25.0 - j);
      }
      runs[qid] = run;
    }
    double previous = 0;
    for (std::size_t k = 1; k <= 25; ++k) {
      const double v = recall_at_k(examples, runs, k).value;
      CHECK(v >= previous);
      previous = v;
    }
  }

  TEST_CASE("reader scores") {
    const std::vector<QAExample> examples{{"q1", "A", "?", {"Bass is weak as expected"}, {}},
                                          {"q2", "A", "?", {}, {}},
                                          {"q3", "A", "?", {"comfortable"}, {}}};
    const std::map<std::string, std::vector<std::string>> predictions{
        {"q1", {"bass is weak", "Bass is weak as expected"}}, {"q2", {}}, {"q3", {"loud"}}};
    const auto [em1, f11] = reader_scores(examples, predictions, 1);
    CHECK(em1.value == doctest::Approx(1.0 / 3));
    CHECK(f11.value == doctest::Approx((0.75 + 1.0 + 0.0) / 3));
    const auto [em2, f12] = reader_scores(examples, predictions, 2);
    CHECK(em2.value == doctest::Approx(2.0 / 3));
    CHECK(f12.value == doctest::Approx(2.0 / 3));
  }
}
