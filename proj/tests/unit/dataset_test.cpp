#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "neuroquery/dataset.hpp"
#include "neuroquery/error.hpp"
#include "neuroquery/evaluation.hpp"
#include "neuroquery/nql.hpp"
#include "stub_gateway.hpp"

using namespace neuroquery;

namespace {
const QAExample& example(const Dataset& ds, const std::string& qid) {
  for (const auto& ex : ds.examples)
    if (ex.qid == qid) return ex;
  FAIL("no example " << qid);
  throw;
}
}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("loading a dataset directory") {
    const Dataset ds = load_dataset(fixtures::data("mini"));
    CHECK(ds.counts.products == 12);
    CHECK(ds.counts.properties == 75);
    CHECK(ds.counts.reviews == 5);
    CHECK(ds.counts.questions == 4);
    CHECK(ds.counts.ground_truths == 4);
    CHECK(ds.examples.size() == 4);
    CHECK(ds.pairs.size() == 4);
    CHECK(ds.warnings.empty());
    CHECK(ds.kb.size() == 85);
    // questions are not facts
    CHECK(ds.kb.facts_matching(parse_term("(?q, question, ?x)"), {}).empty());
    CHECK(ds.reviews_by_asin.at("B00001P4ZH").size() == 3);
  }

  TEST_CASE("gold reviews") {
    const Dataset ds = load_dataset(fixtures::data("mini"));
    CHECK(example(ds, "q0001").gold_review_ids == std::vector<std::string>{"d040f2713caa2aff0ce95affb40e12c2"});
    CHECK(example(ds, "q0002").gold_review_ids == std::vector<std::string>{"5e96b0052898fe667cf622888fc5af69"});
    CHECK(example(ds, "q0003").gold_review_ids == std::vector<std::string>{"0f3b9e1c7a2d4e5f8a6b1c2d3e4f5a6b"});
    CHECK(example(ds, "q0004").gold_review_ids == std::vector<std::string>{"882b1e2745a47c1d9e0f3a6b5c4d2e10"});
    CHECK(example(ds, "q0001").question.rfind("How is the bass", 0) == 0);
  }

  TEST_CASE("published counts are checked on request") {
    const Dataset ds = load_dataset(fixtures::data("mini"), true);
    CHECK(ds.warnings.size() == 5);
    CHECK(kPublishedCounts.products == 500);
    CHECK(kPublishedCounts.properties == 4250);
    CHECK(kPublishedCounts.reviews == 1583);
    CHECK(kPublishedCounts.questions == 1505);
    CHECK(kPublishedCounts.ground_truths == 1627);
  }

  TEST_CASE("missing directory") {
    CHECK_THROWS_AS(load_dataset(fixtures::data("nope")), IoError);
  }

  TEST_CASE("splits are stable and roughly 80/10/10") {
    std::size_t counts[3] = {0, 0, 0};
    for (int i = 0; i < 5000; ++i) {
      const std::string asin = "B" + std::to_string(1000000 + i);
      const Split s = split_of(asin);
      CHECK(s == split_of(asin, kDefaultSplitSeed));
      ++counts[static_cast<int>(s)];
    }
    CHECK(counts[0] > 3800);
    CHECK(counts[0] < 4200);
    CHECK(counts[1] > 380);
    CHECK(counts[2] > 380);
    CHECK(parse_split("val") == Split::validation);
    CHECK_THROWS_AS(parse_split("dev"), ConfigError);
    bool differs = false;
    for (int i = 0; i < 50 && !differs; ++i) differs = split_of("B" + std::to_string(i), 13) != split_of("B" + std::to_string(i), 14);
    CHECK(differs);
  }

  TEST_CASE("retrieval pools") {
    const Dataset ds = load_dataset(fixtures::data("mini"));
    const auto& ex = example(ds, "q0001");
    const std::string& query = ds.pairs[0].reference_query;
    const auto q = candidate_documents(ds, ex, &query, RetrievalPool::query);
    CHECK(q.size() == 5);  // reviews of the three products left by the objective clauses
    CHECK(candidate_documents(ds, ex, nullptr, RetrievalPool::product).size() == 3);
    CHECK(candidate_documents(ds, ex, nullptr, RetrievalPool::corpus).size() == 5);
    CHECK(candidate_documents(ds, ex, nullptr, RetrievalPool::query).size() == 3);
  }

  TEST_CASE("query task with a scripted reader") {
    const Dataset ds = load_dataset(fixtures::data("mini"));
    fixtures::PhraseGateway gateway(fixtures::bass_phrases());
    QueryTaskOptions options;
    options.k_grid = {1, 5};
    const auto reports = run_query_task(ds, ds.examples, gateway, options);
    std::map<std::string, double> by_name;
    for (const auto& r : reports) by_name[r.metric + "@" + std::to_string(r.k)] = r.value;
    CHECK(by_name.count("recall@1"));
    CHECK(by_name.at("recall@5") == 1.0);
    CHECK(by_name.at("recall@1") <= by_name.at("recall@5"));
    CHECK(by_name.at("em@5") >= 0.5);
  }

  TEST_CASE("retrieval dumps round-trip") {
    const std::vector<RetrievalRun> runs{{"q1", {"a", "b"}, {0.5, 0.25}}, {"q2", {}, {}}};
    std::stringstream buf;
    write_retrieval_dump(buf, runs);
    const auto back = read_retrieval_dump(buf);
    REQUIRE(back.size() == 2);
    CHECK(back[0].doc_ids == runs[0].doc_ids);
    CHECK(back[0].scores == runs[0].scores);
    CHECK(back[1].qid == "q2");
    std::istringstream bad("{\"qid\": 3}\n");
    CHECK_THROWS_AS(read_retrieval_dump(bad), MalformedRow);
  }

  TEST_CASE("report formats") {
    std::vector<MetricReport> reports{{"recall", 2, 0.7, {}, 0}, {"bleu", 0, 0.123456789, {}, 0}};
    std::ostringstream csv;
    write_report_csv(csv, reports);
    CHECK(csv.str() == "metric,k,value\nrecall,2,0.7\nbleu,,0.123456789\n");
    std::ostringstream summary;
    write_report_summary(summary, reports, {"note"});
    CHECK(summary.str().find("recall@2") != std::string::npos);
    CHECK(parse_k_grid("20, 2,13,2") == std::vector<std::size_t>{2, 13, 20});
    CHECK_THROWS_AS(parse_k_grid("0"), ConfigError);
    CHECK_THROWS_AS(parse_k_grid("x"), ConfigError);
  }

  TEST_CASE("translation reports") {
    const auto reports = translation_reports({"a b c d"}, {"a b c d"}, {});
    REQUIRE_FALSE(reports.empty());
    CHECK(reports[0].metric == "bleu");
    CHECK(reports[0].value == 1.0);
  }
}
