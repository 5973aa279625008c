#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "neuroquery/kb.hpp"
#include "neuroquery/metrics.hpp"

namespace neuroquery {

struct DatasetCounts {
  std::size_t products = 0;       // distinct subjects of the properties file
  std::size_t properties = 0;     // property rows
  std::size_t reviews = 0;        // distinct review ids
  std::size_t questions = 0;      // question rows
  std::size_t ground_truths = 0;  // answer rows
};

/// Sizes of the published dataset.
inline constexpr DatasetCounts kPublishedCounts{500, 4250, 1583, 1505, 1627};

/// A loaded dataset directory.
///
/// Files: `asin_key_properties.csv`, `asin_reviews.csv` and, optionally,
/// `asin_questions.csv`. Properties and reviews populate the knowledge base;
/// question rows become examples and translation pairs only.
struct Dataset {
  KnowledgeBase kb;
  std::vector<QAExample> examples;
  std::vector<TranslationPair> pairs;
  DatasetCounts counts;
  std::vector<std::string> warnings;  // count mismatches, unparsable reference queries

  std::map<std::string, std::vector<std::string>> reviews_by_asin;  // review ids in file order
  std::map<std::string, std::string> review_text;                   // review id -> text
};

/// Loads a dataset directory. With `expect_published`, counts that differ from
/// kPublishedCounts are reported as warnings. Throws MalformedRow, IoError.
Dataset load_dataset(const std::filesystem::path& dir, bool expect_published = false);

enum class Split { train, validation, test };

Split parse_split(std::string_view name);
const char* to_string(Split split) noexcept;

inline constexpr std::uint64_t kDefaultSplitSeed = 13;

/// 80/10/10 partition by product id, stable for a given seed.
Split split_of(std::string_view asin, std::uint64_t seed = kDefaultSplitSeed);

std::vector<QAExample> select_split(const std::vector<QAExample>& examples, Split split,
                                    std::uint64_t seed = kDefaultSplitSeed);

}  // namespace neuroquery
