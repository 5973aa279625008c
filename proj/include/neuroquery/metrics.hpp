#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace neuroquery {

/// A question with its gold answers and the reviews that contain them.
struct QAExample {
  std::string qid;
  std::string asin;
  std::string question;
  std::vector<std::string> gold_answers;     // empty when unanswerable
  std::vector<std::string> gold_review_ids;
};

/// A question paired with its reference query.
struct TranslationPair {
  std::string qid;
  std::string question;
  std::string reference_query;
};

/// Ranked documents retrieved for one question.
struct RetrievalRun {
  std::string qid;
  std::vector<std::string> doc_ids;
  std::vector<double> scores;
};

/// Aggregate of a metric over examples. `k` is 0 when the metric has no cutoff.
struct MetricReport {
  std::string metric;
  std::size_t k = 0;
  double value = 0.0;
  std::vector<std::pair<std::string, double>> per_example;  // (qid, value)
  std::size_t excluded = 0;                                  // examples skipped as ineligible
};

// ---- answer metrics -------------------------------------------------------

/// Lowercase, drop ASCII punctuation and the articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view text);
std::vector<std::string> answer_tokens(std::string_view text);

/// 1 when the normalized prediction equals some normalized gold answer.
double em_score(std::string_view prediction, const std::vector<std::string>& golds);
/// Best token-overlap F1 against the gold answers; empty against empty scores 1.
double f1_score(std::string_view prediction, const std::vector<std::string>& golds);

// ---- BLEU -----------------------------------------------------------------

struct BleuOptions {
  std::size_t max_n = 4;
  /// Adds one to matched and total counts for n >= 2.
  bool smooth = false;
};

struct BleuReport {
  double bleu = 0.0;  // in [0, 1]
  double brevity_penalty = 0.0;
  std::vector<double> precisions;  // index n-1
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
};

/// Whitespace split after isolating ASCII punctuation (`_` excepted); the
/// operators `==`, `!=`, `<=`, `>=` stay single tokens.
std::vector<std::string> bleu_tokenize(std::string_view text);

/// Corpus BLEU: geometric mean of clipped n-gram precisions times
/// exp(min(0, 1 - ref_len / cand_len)). Orders with no candidate n-grams are
/// left out of the mean. Throws LengthMismatch.
BleuReport bleu_corpus(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
                       const BleuOptions& options = {});

// ---- retrieval ------------------------------------------------------------

/// Per example 1 when a gold review is among the first k retrieved ids.
/// Examples without gold reviews are excluded and counted. Throws MissingRun.
MetricReport recall_at_k(const std::vector<QAExample>& examples, const std::map<std::string, RetrievalRun>& runs,
                         std::size_t k);

/// EM and F1 at k: per example, the best score over the first k predictions.
/// An unanswerable example scores 1 exactly when there are no predictions.
std::pair<MetricReport, MetricReport> reader_scores(const std::vector<QAExample>& examples,
                                                    const std::map<std::string, std::vector<std::string>>& predictions,
                                                    std::size_t k);

}  // namespace neuroquery
