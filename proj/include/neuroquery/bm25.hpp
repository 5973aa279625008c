#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "neuroquery/hit.hpp"

namespace neuroquery {

/// BM25+ parameters: term-frequency saturation `k1`, length normalisation `b`,
/// and the lower-bound shift `delta` granted to every matched term.
struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;
  double delta = 1.0;

  /// Throws ConfigError unless k1 >= 0, 0 <= b <= 1, delta >= 0.
  void validate() const;
};

/// Inverted index over stemmed tokens.
class Bm25Index {
 public:
  struct Posting {
    std::size_t doc;  // position in keys()
    std::size_t tf;
  };

  /// Builds from (doc-key, text) pairs. Throws DuplicateDocKey.
  static Bm25Index build(const std::vector<std::pair<std::string, std::string>>& docs, Bm25Params params = {});

  /// BM25+ score of `doc_key` for already-tokenized query terms. Throws UnknownDocKey.
  double score(const std::vector<std::string>& query_tokens, std::string_view doc_key) const;

  /// Highest-scoring documents with score > 0, at most k of them.
  std::vector<ScoredHit> top_k(std::string_view query_text, std::size_t k) const;

  /// Inverse document frequency, ln(1 + (N - df + 0.5) / (df + 0.5)).
  double idf(std::string_view token) const;

  std::size_t size() const noexcept { return keys_.size(); }
  double average_length() const noexcept { return avgdl_; }
  std::size_t doc_length(std::string_view doc_key) const;
  const std::vector<std::string>& keys() const noexcept { return keys_; }
  const std::vector<Posting>* postings(std::string_view token) const;
  const Bm25Params& params() const noexcept { return params_; }

 private:
  double score_doc(const std::vector<std::string>& query_tokens, std::size_t doc) const;

  Bm25Params params_;
  std::vector<std::string> keys_;
  std::vector<std::size_t> lengths_;
  std::unordered_map<std::string, std::size_t> key_pos_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  double avgdl_ = 0.0;
};

}  // namespace neuroquery
