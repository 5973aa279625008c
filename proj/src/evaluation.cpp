#include "neuroquery/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "neuroquery/error.hpp"
#include "neuroquery/nql.hpp"

namespace neuroquery {

namespace {

std::string format_value(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::to_string(v);
}

const std::string* find_query(const Dataset& dataset, const std::string& qid) {
  for (const auto& p : dataset.pairs)
    if (p.qid == qid) return &p.reference_query;
  return nullptr;
}

std::vector<Document> product_documents(const Dataset& dataset, const std::string& asin) {
  std::vector<Document> docs;
  auto it = dataset.reviews_by_asin.find(asin);
  if (it == dataset.reviews_by_asin.end()) return docs;
  std::set<std::string> seen;
  for (const auto& rid : it->second) {
    auto text = dataset.review_text.find(rid);
    if (text != dataset.review_text.end() && seen.insert(rid).second) docs.push_back({rid, text->second});
  }
  return docs;
}

bool is_neural(const Clause& c) {
  return std::holds_alternative<NeuralMatchClause>(c) || std::holds_alternative<NeuralExtractClause>(c);
}

const Term& neural_pattern(const Clause& c) {
  if (const auto* m = std::get_if<NeuralMatchClause>(&c)) return m->pattern;
  return std::get<NeuralExtractClause>(c).pattern;
}

// Documents reaching the first neural clause of the reference query, or nullopt.
std::optional<std::vector<Document>> query_documents(const Dataset& dataset, const std::string& source,
                                                     const EngineOptions& engine) {
  Program program;
  try {
    program = parse_program(source);
  } catch (const ParseError&) {
    return std::nullopt;
  }
  RuleStore rules;
  const SearchStmt* search = nullptr;
  for (const auto& s : program.statements) {
    if (const auto* r = std::get_if<RuleStmt>(&s)) rules.define(r->rule);
    if (const auto* q = std::get_if<SearchStmt>(&s); q != nullptr && search == nullptr) search = q;
  }
  if (search == nullptr) return std::nullopt;
  auto first = std::find_if(search->clauses.begin(), search->clauses.end(), is_neural);
  if (first == search->clauses.end()) return std::nullopt;

  try {
    QueryEngine qe(dataset.kb, rules, nullptr, engine);
    std::vector<Clause> prefix(search->clauses.begin(), first);
    std::vector<Frame> frames{Frame{}};
    if (!prefix.empty()) frames = qe.search(prefix);
    const Term& pattern = neural_pattern(*first);
    std::vector<Document> docs;
    std::set<std::string> seen;
    for (const auto& frame : qe.search_from({PatternClause{pattern}}, std::move(frames))) {
      const Term key = substitute(pattern.elements()[0], frame);
      const Term text = substitute(pattern.elements()[2], frame);
      if (seen.insert(key.plain()).second) docs.push_back({key.plain(), text.is_string() ? text.str() : text.plain()});
    }
    return docs;
  } catch (const QueryError&) {
    return std::nullopt;
  }
}

}  // namespace

RetrievalPool parse_pool(std::string_view name) {
  if (name == "query") return RetrievalPool::query;
  if (name == "product") return RetrievalPool::product;
  if (name == "corpus") return RetrievalPool::corpus;
  throw ConfigError("unknown retrieval pool '" + std::string(name) + "' (expected query, product or corpus)");
}

const char* to_string(RetrievalPool pool) noexcept {
  switch (pool) {
    case RetrievalPool::query:
      return "query";
    case RetrievalPool::product:
      return "product";
    default:
      return "corpus";
  }
}

std::vector<Document> candidate_documents(const Dataset& dataset, const QAExample& example,
                                          const std::string* reference_query, RetrievalPool pool,
                                          const EngineOptions& engine) {
  switch (pool) {
    case RetrievalPool::corpus: {
      std::vector<Document> docs;
      docs.reserve(dataset.review_text.size());
      for (const auto& [id, text] : dataset.review_text) docs.push_back({id, text});
      return docs;
    }
    case RetrievalPool::query:
      if (reference_query != nullptr)
        if (auto docs = query_documents(dataset, *reference_query, engine)) return *docs;
      [[fallthrough]];
    default:
      return product_documents(dataset, example.asin);
  }
}

std::vector<RetrievalRun> run_retriever(const Dataset& dataset, const std::vector<QAExample>& examples,
                                        Gateway& gateway, const QueryTaskOptions& options, std::size_t depth) {
  std::vector<RetrievalRun> runs;
  runs.reserve(examples.size());
  for (const auto& ex : examples) {
    RetrievalRun run;
    run.qid = ex.qid;
    const auto docs = candidate_documents(dataset, ex, find_query(dataset, ex.qid), options.pool, options.engine);
    if (!docs.empty()) {
      for (const auto& hit : gateway.retrieve(ex.question, docs, depth)) {
        run.doc_ids.push_back(hit.doc_key);
        run.scores.push_back(hit.score);
      }
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

std::vector<MetricReport> retrieval_reports(const std::vector<QAExample>& examples,
                                            const std::vector<RetrievalRun>& runs,
                                            const std::vector<std::size_t>& k_grid) {
  std::map<std::string, RetrievalRun> by_qid;
  for (const auto& r : runs) by_qid.emplace(r.qid, r);
  std::vector<MetricReport> out;
  for (auto k : k_grid) out.push_back(recall_at_k(examples, by_qid, k));
  return out;
}

std::map<std::string, std::vector<std::string>> run_reader(const Dataset& dataset,
                                                           const std::vector<QAExample>& examples,
                                                           const std::vector<RetrievalRun>& runs, Gateway& gateway,
                                                           const QueryTaskOptions& options) {
  std::map<std::string, const RetrievalRun*> by_qid;
  for (const auto& r : runs) by_qid.emplace(r.qid, &r);
  const std::size_t k = options.k_grid.empty() ? 1 : *std::max_element(options.k_grid.begin(), options.k_grid.end());

  std::map<std::string, std::vector<std::string>> predictions;
  for (const auto& ex : examples) {
    auto it = by_qid.find(ex.qid);
    if (it == by_qid.end()) throw MissingRun(ex.qid);
    std::vector<Document> docs;
    for (const auto& id : it->second->doc_ids) {
      if (docs.size() >= options.reader_docs) break;
      auto text = dataset.review_text.find(id);
      if (text != dataset.review_text.end()) docs.push_back({id, text->second});
    }
    auto& preds = predictions[ex.qid];
    if (docs.empty()) continue;
    for (auto& span : gateway.extract(ex.question, docs, k)) preds.push_back(std::move(span.text));
  }
  return predictions;
}

std::vector<MetricReport> reader_reports(const std::vector<QAExample>& examples,
                                         const std::map<std::string, std::vector<std::string>>& predictions,
                                         const std::vector<std::size_t>& k_grid) {
  std::vector<MetricReport> ems, f1s;
  for (auto k : k_grid) {
    auto [em, f1] = reader_scores(examples, predictions, k);
    ems.push_back(std::move(em));
    f1s.push_back(std::move(f1));
  }
  ems.insert(ems.end(), std::make_move_iterator(f1s.begin()), std::make_move_iterator(f1s.end()));
  return ems;
}

std::vector<MetricReport> run_query_task(const Dataset& dataset, const std::vector<QAExample>& examples,
                                         Gateway& gateway, const QueryTaskOptions& options) {
  std::size_t depth = options.reader_docs;
  for (auto k : options.k_grid) depth = std::max(depth, k);
  const auto runs = run_retriever(dataset, examples, gateway, options, depth);
  auto reports = retrieval_reports(examples, runs, options.k_grid);
  auto reader = reader_reports(examples, run_reader(dataset, examples, runs, gateway, options), options.k_grid);
  reports.insert(reports.end(), std::make_move_iterator(reader.begin()), std::make_move_iterator(reader.end()));
  return reports;
}

std::vector<MetricReport> translation_reports(const std::vector<std::string>& candidates,
                                              const std::vector<std::string>& references,
                                              const BleuOptions& options) {
  const BleuReport bleu = bleu_corpus(candidates, references, options);
  std::vector<MetricReport> out;
  auto add = [&](std::string name, std::size_t k, double value) {
    MetricReport r;
    r.metric = std::move(name);
    r.k = k;
    r.value = value;
    out.push_back(std::move(r));
  };
  add("bleu", 0, bleu.bleu);
  add("bleu_x100", 0, bleu.bleu * 100.0);
  for (std::size_t n = 1; n <= bleu.precisions.size(); ++n) add("precision", n, bleu.precisions[n - 1]);
  add("brevity_penalty", 0, bleu.brevity_penalty);
  return out;
}

void write_retrieval_dump(std::ostream& out, const std::vector<RetrievalRun>& runs) {
  for (const auto& r : runs) {
    nlohmann::ordered_json line;
    line["qid"] = r.qid;
    line["k"] = r.doc_ids.size();
    line["doc_ids"] = r.doc_ids;
    line["scores"] = r.scores;
    out << line.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
  }
}

std::vector<RetrievalRun> read_retrieval_dump(std::istream& in) {
  std::vector<RetrievalRun> runs;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RetrievalRun r;
      r.qid = j.at("qid").get<std::string>();
      r.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
      r.scores = j.value("scores", std::vector<double>{});
      runs.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw MalformedRow(number, std::string("retrieval dump: ") + e.what());
    }
  }
  return runs;
}

void write_report_csv(std::ostream& out, const std::vector<MetricReport>& reports) {
  out << "metric,k,value\n";
  for (const auto& r : reports) out << r.metric << ',' << (r.k == 0 ? "" : std::to_string(r.k)) << ',' << format_value(r.value) << '\n';
}

void write_report_summary(std::ostream& out, const std::vector<MetricReport>& reports,
                          const std::vector<std::string>& notes) {
  for (const auto& note : notes) out << "# " << note << '\n';
  for (const auto& r : reports) {
    std::string label = r.metric + (r.k == 0 ? "" : "@" + std::to_string(r.k));
    out << std::left << std::setw(20) << label << ' ' << std::fixed << std::setprecision(4) << r.value;
    if (!r.per_example.empty()) out << "  (" << r.per_example.size() << " examples";
    if (!r.per_example.empty() && r.excluded > 0) out << ", " << r.excluded << " excluded";
    if (!r.per_example.empty()) out << ')';
    out << '\n';
  }
  out.unsetf(std::ios::fixed);
}

std::vector<std::size_t> parse_k_grid(std::string_view text) {
  std::set<std::size_t> ks;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string_view part = text.substr(pos, comma - pos);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    std::size_t k = 0;
    auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), k);
    if (part.empty() || ec != std::errc() || end != part.data() + part.size() || k == 0)
      throw ConfigError("bad k value '" + std::string(part) + "' in k grid '" + std::string(text) + "'");
    ks.insert(k);
    pos = comma + 1;
  }
  return {ks.begin(), ks.end()};
}

}  // namespace neuroquery
