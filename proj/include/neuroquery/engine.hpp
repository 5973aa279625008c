#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "neuroquery/ast.hpp"
#include "neuroquery/bm25.hpp"
#include "neuroquery/gateway.hpp"
#include "neuroquery/kb.hpp"
#include "neuroquery/term.hpp"
#include "neuroquery/unify.hpp"

namespace neuroquery {

struct EngineOptions {
  Bm25Params bm25;
  std::size_t max_rule_depth = 32;
  /// Keep frames whose documents yield no extracted span (answer variable left unbound).
  bool keep_unanswered = false;
};

/// Registered rules, looked up by head arity and constant second element.
class RuleStore {
 public:
  /// Throws InvalidRule for an empty body or a non-tuple head. Duplicates are kept.
  void define(Rule rule);

  /// Rules whose head could unify with `pattern` under `frame`, in definition order.
  std::vector<const Rule*> candidates(const Term& pattern, const Frame& frame) const;

  const std::vector<Rule>& rules() const noexcept { return rules_; }
  std::size_t size() const noexcept { return rules_.size(); }
  bool empty() const noexcept { return rules_.empty(); }

 private:
  std::vector<Rule> rules_;
  std::unordered_map<Term, std::map<std::size_t, std::vector<std::size_t>>, TermHash> by_second_;
  std::map<std::size_t, std::vector<std::size_t>> open_second_;  // heads whose second element is not constant
  std::map<std::size_t, std::vector<std::size_t>> by_arity_;
};

/// Value of a filter expression: a term or a boolean.
struct FilterValue {
  enum class Kind { term, boolean };
  Kind kind = Kind::boolean;
  Term term = Term::integer(0);
  bool boolean = false;
};

/// Evaluates `expr` under `frame`. Throws UnboundVariableInFilter or FilterTypeError.
FilterValue evaluate_filter(const FilterPtr& expr, const Frame& frame);

/// Evaluates `expr` and requires a boolean result.
bool filter_passes(const FilterPtr& expr, const Frame& frame);

/// Evaluates search conjunctions left to right over streams of frames.
///
/// The engine borrows the knowledge base, rules and gateway; all three must
/// outlive it and must not be modified while a search runs.
class QueryEngine {
 public:
  QueryEngine(const KnowledgeBase& kb, const RuleStore& rules, Gateway* gateway, EngineOptions options = {});

  /// Frames satisfying every clause, starting from the single empty frame.
  std::vector<Frame> search(const std::vector<Clause>& clauses) const;

  /// Same, starting from the given frames.
  std::vector<Frame> search_from(const std::vector<Clause>& clauses, std::vector<Frame> frames) const;

  const EngineOptions& options() const noexcept { return options_; }

 private:
  struct Run;
  struct Candidate {
    Frame frame;
    std::size_t doc;  // index into the collected documents
  };
  struct Collected {
    std::vector<Candidate> candidates;
    std::vector<Document> docs;
    std::vector<Term> keys;  // subject term of each document
  };

  std::vector<Frame> conjunction(const std::vector<Clause>& clauses, std::vector<Frame> frames, Run& run,
                                 std::size_t depth) const;
  std::vector<Frame> eval_clause(const Clause& clause, std::vector<Frame> frames, Run& run, std::size_t depth) const;
  std::vector<Frame> eval_pattern(const Term& pattern, const std::vector<Frame>& frames, Run& run,
                                  std::size_t depth) const;
  std::vector<Frame> eval_filter(const FilterPtr& expr, std::vector<Frame> frames) const;
  std::vector<Frame> eval_bm25(const Bm25Clause& clause, const std::vector<Frame>& frames, Run& run,
                               std::size_t depth) const;
  std::vector<Frame> eval_neural_match(const NeuralMatchClause& clause, const std::vector<Frame>& frames, Run& run,
                                       std::size_t depth) const;
  std::vector<Frame> eval_neural_extract(const NeuralExtractClause& clause, const std::vector<Frame>& frames,
                                         Run& run, std::size_t depth) const;
  std::vector<Frame> resolve_rules(const Term& pattern, const Frame& frame, Run& run, std::size_t depth) const;

  Collected collect_documents(const Term& pattern, const std::vector<Frame>& frames, Run& run,
                              std::size_t depth) const;
  std::vector<Frame> keep_ranked(const Collected& collected, const std::vector<ScoredHit>& hits) const;
  Gateway& gateway() const;

  const KnowledgeBase& kb_;
  const RuleStore& rules_;
  Gateway* gateway_;
  EngineOptions options_;
};

}  // namespace neuroquery
