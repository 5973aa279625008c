#include "neuroquery/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>

#include "neuroquery/error.hpp"
#include "neuroquery/nql.hpp"
#include "neuroquery/text.hpp"

namespace neuroquery {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void check_count(std::vector<std::string>& warnings, const char* what, std::size_t actual, std::size_t expected) {
  if (actual != expected)
    warnings.push_back("CountMismatch: " + std::string(what) + " " + std::to_string(actual) + ", published " +
                       std::to_string(expected));
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir, bool expect_published) {
  const auto properties = dir / "asin_key_properties.csv";
  const auto reviews = dir / "asin_reviews.csv";
  const auto questions = dir / "asin_questions.csv";
  if (!std::filesystem::is_directory(dir)) throw IoError("dataset directory not found: " + dir.string());

  Dataset ds;
  std::set<std::string> products;
  for (const auto& row : read_csv_facts(properties, CsvKind::properties)) {
    ++ds.counts.properties;
    products.insert(row.fact.elements()[0].plain());
    ds.kb.assert_fact(row.fact);
  }
  ds.counts.products = products.size();

  if (std::filesystem::exists(reviews)) {
    std::set<std::string> review_ids;
    for (const auto& row : read_csv_facts(reviews, CsvKind::reviews)) {
      const auto& e = row.fact.elements();
      const std::string subject = e[0].plain();
      const std::string predicate = e[1].plain();
      if (predicate == "review") {
        const std::string id = e[2].plain();
        ds.reviews_by_asin[subject].push_back(id);
        review_ids.insert(id);
      } else {
        ds.review_text[subject] = e[2].str();
      }
      ds.kb.assert_fact(row.fact);
    }
    ds.counts.reviews = review_ids.size();
  }

  if (std::filesystem::exists(questions)) {
    struct Pending {
      std::string asin;
      std::string text;
      std::string query;
      bool has_query = false;
      std::vector<std::string> answers;
      std::vector<std::string> gold_reviews;
    };
    std::vector<std::string> order;
    std::unordered_map<std::string, Pending> by_qid;
    for (const auto& row : read_csv_facts(questions, CsvKind::questions)) {
      const auto& e = row.fact.elements();
      const std::string predicate = e[1].plain();
      if (predicate == "question") {
        const std::string qid = e[2].plain();
        auto [it, inserted] = by_qid.try_emplace(qid);
        if (inserted || it->second.asin.empty()) order.push_back(qid);
        it->second.asin = e[0].plain();
        ++ds.counts.questions;
        continue;
      }
      auto& p = by_qid[e[0].plain()];
      const std::string value = e[2].is_string() ? e[2].str() : e[2].plain();
      if (predicate == "text") {
        p.text = value;
      } else if (predicate == "query") {
        p.query = value;
        p.has_query = true;
      } else if (predicate == "answer") {
        p.answers.push_back(value);
        ++ds.counts.ground_truths;
      } else {
        p.gold_reviews.push_back(value);
      }
    }

    for (const auto& qid : order) {
      auto& p = by_qid[qid];
      QAExample ex{qid, p.asin, p.text, p.answers, p.gold_reviews};
      if (ex.gold_review_ids.empty() && !ex.gold_answers.empty()) {
        // reviews of the product that contain a gold answer
        auto it = ds.reviews_by_asin.find(p.asin);
        if (it != ds.reviews_by_asin.end()) {
          for (const auto& rid : it->second) {
            auto text = ds.review_text.find(rid);
            if (text == ds.review_text.end()) continue;
            const std::string haystack = lower(text->second);
            const bool contains = std::any_of(p.answers.begin(), p.answers.end(), [&](const std::string& a) {
              return !a.empty() && haystack.find(lower(a)) != std::string::npos;
            });
            if (contains) ex.gold_review_ids.push_back(rid);
          }
        }
      }
      ds.examples.push_back(std::move(ex));
      if (p.has_query) {
        try {
          parse_program(p.query);
          ds.pairs.push_back({qid, p.text, p.query});
        } catch (const ParseError& e) {
          ds.warnings.push_back("reference query of " + qid + " does not parse: " + e.what());
        }
      }
    }
  }

  if (expect_published) {
    check_count(ds.warnings, "questions", ds.counts.questions, kPublishedCounts.questions);
    check_count(ds.warnings, "properties", ds.counts.properties, kPublishedCounts.properties);
    check_count(ds.warnings, "products", ds.counts.products, kPublishedCounts.products);
    check_count(ds.warnings, "reviews", ds.counts.reviews, kPublishedCounts.reviews);
    check_count(ds.warnings, "ground truths", ds.counts.ground_truths, kPublishedCounts.ground_truths);
  }
  return ds;
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "validation" || name == "val") return Split::validation;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train, validation or test)");
}

const char* to_string(Split split) noexcept {
  switch (split) {
    case Split::train:
      return "train";
    case Split::validation:
      return "validation";
    default:
      return "test";
  }
}

Split split_of(std::string_view asin, std::uint64_t seed) {
  const std::uint64_t bucket = fnv1a64(asin, fnv1a64(std::to_string(seed))) % 10;
  if (bucket < 8) return Split::train;
  return bucket == 8 ? Split::validation : Split::test;
}

std::vector<QAExample> select_split(const std::vector<QAExample>& examples, Split split, std::uint64_t seed) {
  std::vector<QAExample> out;
  for (const auto& ex : examples)
    if (split_of(ex.asin, seed) == split) out.push_back(ex);
  return out;
}

}  // namespace neuroquery
