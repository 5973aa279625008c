#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "neuroquery/dataset.hpp"
#include "neuroquery/engine.hpp"
#include "neuroquery/gateway.hpp"
#include "neuroquery/metrics.hpp"

namespace neuroquery {

/// Which reviews the retriever ranks for a question.
enum class RetrievalPool {
  query,    // documents reaching the first neural clause of the reference query
  product,  // reviews of the question's product
  corpus,   // every review
};

RetrievalPool parse_pool(std::string_view name);
const char* to_string(RetrievalPool pool) noexcept;

struct QueryTaskOptions {
  std::vector<std::size_t> k_grid{2, 13, 20};
  RetrievalPool pool = RetrievalPool::query;
  std::size_t reader_docs = 20;  // retrieved documents handed to the reader
  EngineOptions engine;
};

/// Reviews considered for `example` under `pool`.
std::vector<Document> candidate_documents(const Dataset& dataset, const QAExample& example,
                                          const std::string* reference_query, RetrievalPool pool,
                                          const EngineOptions& engine = {});

/// Ranks candidate documents for every example; `depth` hits are kept.
std::vector<RetrievalRun> run_retriever(const Dataset& dataset, const std::vector<QAExample>& examples,
                                        Gateway& gateway, const QueryTaskOptions& options, std::size_t depth);

/// recall@k for every k of the grid.
std::vector<MetricReport> retrieval_reports(const std::vector<QAExample>& examples,
                                            const std::vector<RetrievalRun>& runs, const std::vector<std::size_t>& k_grid);

/// Extracts answers from the top `reader_docs` retrieved documents of each run.
std::map<std::string, std::vector<std::string>> run_reader(const Dataset& dataset,
                                                           const std::vector<QAExample>& examples,
                                                           const std::vector<RetrievalRun>& runs, Gateway& gateway,
                                                           const QueryTaskOptions& options);

/// EM and F1 for every k of the grid.
std::vector<MetricReport> reader_reports(const std::vector<QAExample>& examples,
                                         const std::map<std::string, std::vector<std::string>>& predictions,
                                         const std::vector<std::size_t>& k_grid);

/// Retrieval then extraction: recall, EM and F1 at every k of the grid.
std::vector<MetricReport> run_query_task(const Dataset& dataset, const std::vector<QAExample>& examples,
                                         Gateway& gateway, const QueryTaskOptions& options);

/// Translation task: BLEU of candidate queries against the references.
std::vector<MetricReport> translation_reports(const std::vector<std::string>& candidates,
                                              const std::vector<std::string>& references, const BleuOptions& options);

/// One JSON object per line: {"qid", "k", "doc_ids", "scores"}.
void write_retrieval_dump(std::ostream& out, const std::vector<RetrievalRun>& runs);
std::vector<RetrievalRun> read_retrieval_dump(std::istream& in);

/// `metric,k,value` rows, values printed with full precision.
void write_report_csv(std::ostream& out, const std::vector<MetricReport>& reports);
/// Aligned human-readable table.
void write_report_summary(std::ostream& out, const std::vector<MetricReport>& reports,
                          const std::vector<std::string>& notes = {});

/// Parses "2,13,20" into a sorted, duplicate-free list of positive values.
std::vector<std::size_t> parse_k_grid(std::string_view text);

}  // namespace neuroquery
