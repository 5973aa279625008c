#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "neuroquery/bm25.hpp"
#include "neuroquery/engine.hpp"
#include "neuroquery/error.hpp"
#include "neuroquery/metrics.hpp"
#include "neuroquery/nql.hpp"
#include "neuroquery/session.hpp"
#include "neuroquery/text.hpp"
#include "neuroquery/unify.hpp"
#include "oracles.hpp"

using namespace neuroquery;

namespace {

struct Failure {
  std::string reason;
};

void require(bool ok, const std::string& reason) {
  if (!ok) throw Failure{reason};
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<Frame> last_result(Session& s, const std::string& source) {
  const auto results = s.execute(source);
  require(!results.empty(), "program has no search");
  return results.back().frames;
}

Session catalog_session() {
  Session s;
  fixtures::load_catalog(s.kb());
  return s;
}

// ---- criteria ---------------------------------------------------------------

std::string example_queries() {
  {
    Session s = catalog_session();
    const auto start = Clock::now();
    const auto frames = last_result(s, fixtures::query("price_range.nql"));
    const double elapsed = seconds_since(start);
    std::set<std::pair<std::string, double>> got;
    for (const auto& f : frames) got.emplace(f.lookup("asin")->str(), f.lookup("price")->number());
    const std::set<std::pair<std::string, double>> expected{
        {"B00001P4ZH", 39.36}, {"B0007XJSQC", 24.95}, {"B000AJIF4E", 29.99}, {"B000065BP9", 39.0},
        {"B00HVLUR86", 22.5},  {"B004OA7DX0", 24.0},  {"B00NJ2M33I", 21.99}, {"B01DJH7U2M", 34.5},
        {"B00AQOPGEM", 31.2},  {"B07Q38NL4Y", 38.0}};
    require(frames.size() == 10, "price query returned " + std::to_string(frames.size()) + " frames, expected 10");
    require(got == expected, "price query returned a different set of (asin, price) pairs");
    require(elapsed < 1.0, "price query took " + std::to_string(elapsed) + " s");
  }
  {
    Session s = catalog_session();
    const auto frames = last_result(s, fixtures::query("refined_range.nql"));
    std::set<std::tuple<std::string, double, std::int64_t>> got;
    for (const auto& f : frames)
      got.emplace(f.lookup("asin")->str(), f.lookup("price")->number(), f.lookup("total_reviews")->as_integer());
    const std::set<std::tuple<std::string, double, std::int64_t>> expected{
        {"B00001P4ZH", 39.36, 14549}, {"B0007XJSQC", 24.95, 14980}, {"B000AJIF4E", 29.99, 22071}};
    require(frames.size() == 3 && got == expected, "refined query did not return the three expected products");
  }
  {
    Session s = catalog_session();
    const auto frames = last_result(s, fixtures::query("well_ranked.nql"));
    std::set<std::string> asins;
    for (const auto& f : frames) asins.insert(f.lookup("asin")->str());
    require(asins == std::set<std::string>{"B000AJIF4E"},
            "rule query returned " + std::to_string(asins.size()) + " products, expected only B000AJIF4E");
  }
  return "price query 10/10, refined query 3/3, rule query {B000AJIF4E}";
}

std::string unification() {
  const auto start = Clock::now();
  const auto terms = oracles::mini_terms(2);
  const std::size_t n = terms.size();
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<std::pair<std::size_t, std::string>>> jobs;
  for (unsigned w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      std::size_t checked = 0;
      for (std::size_t i = w; i < n; i += workers) {
        const Term a = oracles::mini_to_term(terms[i]);
        for (std::size_t j = 0; j < n; ++j) {
          const auto r = unify(a, oracles::mini_to_term(terms[j]), {});
          std::string problem = oracles::check_mgu(terms[i], terms[j], r);
          if (!problem.empty()) return std::make_pair(checked, problem);
          ++checked;
        }
      }
      return std::make_pair(checked, std::string());
    }));
  std::size_t pairs = 0;
  for (auto& j : jobs) {
    auto [count, problem] = j.get();
    require(problem.empty(), problem);
    pairs += count;
  }

  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 10000; ++i) {
    const Term a = oracles::random_term(rng, 3);
    const Term b = oracles::random_term(rng, 3);
    const auto ab = unify(a, b, {});
    const auto ba = unify(b, a, {});
    require(ab.has_value() == ba.has_value(), "unify is not symmetric on " + render(a) + " and " + render(b));
    if (!ab) continue;
    const Term sa = substitute(a, *ab);
    require(sa == substitute(b, *ab), "result does not unify " + render(a) + " and " + render(b));
    require(substitute(sa, *ab) == sa, "result is not idempotent on " + render(a));
    for (const Term& t : {a, b}) {
      require(substitute(substitute(t, *ab), *ba) == substitute(t, *ba) &&
                  substitute(substitute(t, *ba), *ab) == substitute(t, *ab),
              "unify(a, b) and unify(b, a) are not equivalent on " + render(a) + " and " + render(b));
    }
  }
  const double elapsed = seconds_since(start);
  require(elapsed < 30.0, "took " + std::to_string(elapsed) + " s");
  return std::to_string(pairs) + " exhaustive pairs, 10000 random pairs";
}

std::string completeness() {
  const auto start = Clock::now();
  std::mt19937_64 rng(77);
  std::size_t queries = 0, answers = 0;
  for (int round = 0; round < 50; ++round) {
    const auto mini = oracles::random_mini_kb(rng, 200);
    KnowledgeBase kb;
    for (const auto& f : mini.facts)
      kb.assert_fact(Term::tuple({oracles::code_to_term(f[0]), oracles::code_to_term(f[1]), oracles::code_to_term(f[2])}));
    RuleStore rules;
    QueryEngine engine(kb, rules, nullptr);
    for (int q = 0; q < 20; ++q) {
      const auto query = oracles::random_mini_query(rng, 4);
      const auto expected = oracles::enumerate_answers(mini, query);
      std::multiset<std::vector<int>> got;
      for (const auto& f : engine.search(oracles::mini_clauses(query))) got.insert(oracles::frame_answer(f, query.n_vars));
      SearchStmt stmt{oracles::mini_clauses(query)};
      require(got.size() == expected.size() && std::set<std::vector<int>>(got.begin(), got.end()) == expected,
              "KB " + std::to_string(round) + ": engine and enumeration disagree on " + render(Statement{stmt}));
      ++queries;
      answers += expected.size();
    }
  }
  const double elapsed = seconds_since(start);
  require(elapsed < 60.0, "took " + std::to_string(elapsed) + " s");
  return std::to_string(queries) + " queries over 50 KBs, " + std::to_string(answers) + " answers";
}

std::string bm25() {
  std::mt19937_64 rng(31337);
  std::size_t corpora = 0;
  for (int round = 0; round < 100; ++round) {
    std::vector<std::pair<std::string, std::string>> docs;
    oracles::Bm25Reference reference;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string text = oracles::random_text(rng, 15);
      docs.emplace_back("d" + std::to_string(i), text);
      reference.docs.emplace_back("d" + std::to_string(i), tokenize_stem(text));
    }
    const auto index = Bm25Index::build(docs);
    const std::string query = oracles::random_text(rng, 4);
    const auto expected = reference.rank(tokenize_stem(query));
    for (std::size_t k = 1; k <= n; ++k) {
      const auto hits = index.top_k(query, k);
      require(hits.size() == std::min(k, expected.size()), "top_k size differs from the score-all oracle");
      for (std::size_t i = 0; i < hits.size(); ++i) {
        require(std::abs(hits[i].score - expected[i].second) <= 1e-9, "score differs from the score-all oracle");
        require(hits[i].doc_key == expected[i].first ||
                    std::abs(reference.score(tokenize_stem(query), std::stoul(hits[i].doc_key.substr(1))) -
                             expected[i].second) <= 1e-9,
                "ranking differs from the score-all oracle");
      }
    }
    ++corpora;
  }
  for (int round = 0; round < 20; ++round) {
    std::vector<std::pair<std::string, std::string>> docs;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(5, 50)(rng);
    for (std::size_t i = 0; i < n; ++i) docs.emplace_back("d" + std::to_string(i), oracles::random_text(rng, 15));
    const auto index = Bm25Index::build(docs);
    const std::string query = oracles::random_text(rng, 3);
    std::vector<ScoredHit> previous;
    for (std::size_t k = 1; k <= n; ++k) {
      const auto hits = index.top_k(query, k);
      require(hits.size() >= previous.size(), "top_k shrank as k grew");
      for (std::size_t i = 0; i < previous.size(); ++i)
        require(hits[i].doc_key == previous[i].doc_key, "top_k(k) is not a prefix of top_k(k+1)");
      previous = hits;
    }
  }
  return std::to_string(corpora) + " oracle corpora, 20 monotonicity corpora";
}

std::string metrics() {
  require(f1_score("bass is weak", {"Bass is weak as expected"}) == 0.75, "F1 is not 0.75");
  require(em_score("The Bass!", {"bass"}) == 1.0, "EM of 'The Bass!' against 'bass' is not 1");
  const std::vector<std::string> corpus{fixtures::query("price_range.nql"), fixtures::query("refined_range.nql"),
                                        fixtures::query("bass_answers.nql"), fixtures::query("well_ranked.nql")};
  require(bleu_corpus(corpus, corpus).bleu == 1.0, "bleu_corpus(c, c) is not 1");

  std::mt19937_64 rng(8);
  std::vector<QAExample> examples;
  std::map<std::string, RetrievalRun> runs;
  for (int i = 0; i < 20; ++i) {
    const std::string qid = "q" + std::to_string(i);
    examples.push_back({qid, "A", "?", {"x"}, {"r" + std::to_string(i % 5)}});
    RetrievalRun run{qid, {}, {}};
    for (int j = 0; j < 20; ++j) {
      run.doc_ids.push_back("r" + std::to_string(std::uniform_int_distribution<int>(0, 19)(rng)));
      run.scores.push_back(20.0 - j);
    }
    runs[qid] = run;
  }
  double previous = 0;
  for (std::size_t k = 1; k <= 20; ++k) {
    const double v = recall_at_k(examples, runs, k).value;
    require(v >= previous, "recall@" + std::to_string(k) + " decreased");
    previous = v;
  }
  return "F1 0.75, EM 1, BLEU 1.0, recall@1..20 monotone";
}

std::string parser() {
  for (const char* name : {"price_range.nql", "refined_range.nql", "bass_answers.nql", "well_ranked.nql"}) {
    try {
      parse_program(fixtures::query(name));
    } catch (const ParseError& e) {
      throw Failure{std::string(name) + ": " + e.what()};
    }
  }
  oracles::ProgramGenerator gen(1234);
  for (int i = 0; i < 1000; ++i) {
    const Program p = gen.program();
    const std::string text = render(p);
    Program back;
    try {
      back = parse_program(text);
    } catch (const ParseError& e) {
      throw Failure{"rendered program does not parse: " + std::string(e.what()) + "\n" + text};
    }
    require(back == p, "round trip changed the program:\n" + text);
  }
  return "4 example queries, 1000 round trips";
}

std::string end_to_end() {
  Session s = catalog_session();
  const auto frames = last_result(s, fixtures::query("bass_answers.nql"));
  require(!frames.empty(), "no frames");
  for (const auto& f : frames) {
    const Term* a = f.lookup("answers");
    require(a != nullptr && a->is_tuple() && a->arity() == 5, "frame without an answer record");
    const std::string& text = f.lookup("review_text")->str();
    const auto start = static_cast<std::size_t>(a->elements()[2].as_integer());
    const auto end = static_cast<std::size_t>(a->elements()[3].as_integer());
    require(start < end && end <= utf8_length(text), "span offsets out of range");
    require(utf8_slice(text, start, end) == a->elements()[0].str(), "span text does not match the review");
    require(render_record(f).find("\"?answers\":[") != std::string::npos, "record lacks ?answers");
  }
  return std::to_string(frames.size()) + " answered frames, offsets valid";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::string (*)()>> criteria{
      {"example queries", example_queries},
      {"unification oracle", unification},
      {"symbolic completeness", completeness},
      {"bm25 oracle and monotonicity", bm25},
      {"metrics", metrics},
      {"parser", parser},
      {"end-to-end fallback", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = Clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = check();
    } catch (const Failure& f) {
      ok = false;
      detail = f.reason;
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    std::ostringstream line;
    line << (ok ? "PASS" : "FAIL") << "  " << std::left << std::setw(30) << name << std::right << std::fixed
         << std::setprecision(2) << std::setw(7) << seconds_since(start) << " s  " << detail;
    std::cout << line.str() << std::endl;
    failed += ok ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
