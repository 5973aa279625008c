#include "neuroquery/bm25.hpp"

#include <algorithm>
#include <cmath>

#include "neuroquery/error.hpp"
#include "neuroquery/text.hpp"

namespace neuroquery {

void sort_hits(std::vector<ScoredHit>& hits) {
  std::stable_sort(hits.begin(), hits.end(), [](const ScoredHit& a, const ScoredHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_key < b.doc_key;
  });
}

void Bm25Params::validate() const {
  if (!(k1 >= 0)) throw ConfigError("bm25 k1 must be >= 0");
  if (!(b >= 0 && b <= 1)) throw ConfigError("bm25 b must be in [0, 1]");
  if (!(delta >= 0)) throw ConfigError("bm25 delta must be >= 0");
}

Bm25Index Bm25Index::build(const std::vector<std::pair<std::string, std::string>>& docs, Bm25Params params) {
  params.validate();
  Bm25Index index;
  index.params_ = params;
  index.keys_.reserve(docs.size());
  index.lengths_.reserve(docs.size());
  std::size_t total = 0;
  for (const auto& [key, text] : docs) {
    const std::size_t doc = index.keys_.size();
    if (!index.key_pos_.emplace(key, doc).second) throw DuplicateDocKey(key);
    index.keys_.push_back(key);
    const auto tokens = tokenize_stem(text);
    index.lengths_.push_back(tokens.size());
    total += tokens.size();
    // term frequencies in first-occurrence order keep postings deterministic
    std::vector<std::pair<std::string, std::size_t>> counts;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto& t : tokens) {
      auto [it, inserted] = slot.emplace(t, counts.size());
      if (inserted) counts.emplace_back(t, 0);
      ++counts[it->second].second;
    }
    for (auto& [token, tf] : counts) index.postings_[token].push_back({doc, tf});
  }
  index.avgdl_ = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
  return index;
}

double Bm25Index::idf(std::string_view token) const {
  const auto* list = postings(token);
  const double df = list == nullptr ? 0.0 : static_cast<double>(list->size());
  const double n = static_cast<double>(keys_.size());
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

const std::vector<Bm25Index::Posting>* Bm25Index::postings(std::string_view token) const {
  auto it = postings_.find(std::string(token));
  return it == postings_.end() ? nullptr : &it->second;
}

std::size_t Bm25Index::doc_length(std::string_view doc_key) const {
  auto it = key_pos_.find(std::string(doc_key));
  if (it == key_pos_.end()) throw UnknownDocKey(std::string(doc_key));
  return lengths_[it->second];
}

double Bm25Index::score_doc(const std::vector<std::string>& query_tokens, std::size_t doc) const {
  const double len_ratio = avgdl_ > 0 ? static_cast<double>(lengths_[doc]) / avgdl_ : 1.0;
  const double norm = params_.k1 * (1.0 - params_.b + params_.b * len_ratio);
  double total = 0.0;
  for (const auto& token : query_tokens) {
    const auto* list = postings(token);
    if (list == nullptr) continue;
    auto it = std::lower_bound(list->begin(), list->end(), doc,
                               [](const Posting& p, std::size_t d) { return p.doc < d; });
    if (it == list->end() || it->doc != doc) continue;
    const double tf = static_cast<double>(it->tf);
    total += idf(token) * (params_.delta + tf * (params_.k1 + 1.0) / (tf + norm));
  }
  return total;
}

double Bm25Index::score(const std::vector<std::string>& query_tokens, std::string_view doc_key) const {
  auto it = key_pos_.find(std::string(doc_key));
  if (it == key_pos_.end()) throw UnknownDocKey(std::string(doc_key));
  return score_doc(query_tokens, it->second);
}

std::vector<ScoredHit> Bm25Index::top_k(std::string_view query_text, std::size_t k) const {
  const auto tokens = tokenize_stem(query_text);
  std::vector<bool> seen(keys_.size(), false);
  std::vector<ScoredHit> hits;
  for (const auto& token : tokens) {
    const auto* list = postings(token);
    if (list == nullptr) continue;
    for (const auto& p : *list) {
      if (seen[p.doc]) continue;
      seen[p.doc] = true;
      const double s = score_doc(tokens, p.doc);
      if (s > 0) hits.push_back({keys_[p.doc], s});
    }
  }
  sort_hits(hits);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

}  // namespace neuroquery
