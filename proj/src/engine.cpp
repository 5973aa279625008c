#include "neuroquery/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "neuroquery/error.hpp"

namespace neuroquery {

// ---- rules ----------------------------------------------------------------

void RuleStore::define(Rule rule) {
  if (!rule.head.is_tuple()) throw InvalidRule("rule head must be a tuple pattern");
  if (rule.body.empty()) throw InvalidRule("rule body must not be empty");
  const std::size_t id = rules_.size();
  const std::size_t arity = rule.head.arity();
  by_arity_[arity].push_back(id);
  if (arity >= 2 && rule.head.elements()[1].is_ground()) {
    by_second_[rule.head.elements()[1]][arity].push_back(id);
  } else {
    open_second_[arity].push_back(id);
  }
  rules_.push_back(std::move(rule));
}

std::vector<const Rule*> RuleStore::candidates(const Term& pattern, const Frame& frame) const {
  std::vector<const Rule*> out;
  if (!pattern.is_tuple()) return out;
  const std::size_t arity = pattern.arity();
  std::vector<std::size_t> ids;
  const Term second = arity >= 2 ? substitute(pattern.elements()[1], frame) : Term::integer(0);
  if (arity >= 2 && second.is_ground()) {
    if (auto it = by_second_.find(second); it != by_second_.end())
      if (auto jt = it->second.find(arity); jt != it->second.end()) ids = jt->second;
    if (auto it = open_second_.find(arity); it != open_second_.end())
      ids.insert(ids.end(), it->second.begin(), it->second.end());
    std::sort(ids.begin(), ids.end());
  } else if (auto it = by_arity_.find(arity); it != by_arity_.end()) {
    ids = it->second;
  }
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(&rules_[id]);
  return out;
}

// ---- filters --------------------------------------------------------------

namespace {

using Op = FilterExpr::Op;

FilterValue of_term(Term t) {
  FilterValue v;
  v.kind = FilterValue::Kind::term;
  v.term = std::move(t);
  return v;
}

FilterValue of_bool(bool b) {
  FilterValue v;
  v.boolean = b;
  return v;
}

const char* class_name(const FilterValue& v) {
  if (v.kind == FilterValue::Kind::boolean) return "boolean";
  if (v.term.is_number()) return "number";
  if (v.term.is_string()) return "string";
  if (v.term.is_tuple()) return "tuple";
  return "variable";
}

int class_of(const FilterValue& v) {
  if (v.kind == FilterValue::Kind::boolean) return 0;
  if (v.term.is_number()) return 1;
  if (v.term.is_string()) return 2;
  return 3;
}

const Term& number_operand(const FilterValue& v, const char* what) {
  if (v.kind != FilterValue::Kind::term || !v.term.is_number())
    throw FilterTypeError(std::string(what) + " needs numbers, got " + class_name(v));
  return v.term;
}

bool as_bool(const FilterValue& v, const char* what) {
  if (v.kind != FilterValue::Kind::boolean)
    throw FilterTypeError(std::string(what) + " needs booleans, got " + class_name(v));
  return v.boolean;
}

Term arithmetic(Op op, const Term& a, const Term& b) {
  if (op == Op::divide) {
    if (b.number() == 0) throw FilterTypeError("division by zero");
    return Term::real(a.number() / b.number());
  }
  if (a.kind() == Term::Kind::integer && b.kind() == Term::Kind::integer) {
    std::int64_t r = 0;
    bool overflow = false;
    switch (op) {
      case Op::add:
        overflow = __builtin_add_overflow(a.as_integer(), b.as_integer(), &r);
        break;
      case Op::subtract:
        overflow = __builtin_sub_overflow(a.as_integer(), b.as_integer(), &r);
        break;
      default:
        overflow = __builtin_mul_overflow(a.as_integer(), b.as_integer(), &r);
        break;
    }
    if (!overflow) return Term::integer(r);
  }
  const double x = a.number(), y = b.number();
  switch (op) {
    case Op::add:
      return Term::real(x + y);
    case Op::subtract:
      return Term::real(x - y);
    default:
      return Term::real(x * y);
  }
}

// Three-way numeric comparison exact for integer pairs.
int compare_numbers(const Term& a, const Term& b) {
  if (a.kind() == Term::Kind::integer && b.kind() == Term::Kind::integer)
    return a.as_integer() < b.as_integer() ? -1 : (a.as_integer() > b.as_integer() ? 1 : 0);
  const double x = a.number(), y = b.number();
  return x < y ? -1 : (x > y ? 1 : 0);
}

}  // namespace

FilterValue evaluate_filter(const FilterPtr& expr, const Frame& frame) {
  const FilterExpr& e = *expr;
  switch (e.op) {
    case Op::literal:
      return of_term(e.value);
    case Op::variable: {
      Term v = substitute(Term::variable(e.name), frame);
      if (v.is_variable()) throw UnboundVariableInFilter(e.name);
      return of_term(std::move(v));
    }
    case Op::negate:
    case Op::abs: {
      const Term x = number_operand(evaluate_filter(e.lhs, frame), e.op == Op::abs ? "abs" : "negation");
      if (x.kind() == Term::Kind::integer) {
        const std::int64_t i = x.as_integer();
        if (e.op == Op::abs && i >= 0) return of_term(x);
        if (i == std::numeric_limits<std::int64_t>::min()) return of_term(Term::real(-static_cast<double>(i)));
        return of_term(Term::integer(-i));
      }
      return of_term(Term::real(e.op == Op::abs ? std::fabs(x.as_real()) : -x.as_real()));
    }
    case Op::add:
    case Op::subtract:
    case Op::multiply:
    case Op::divide: {
      const Term a = number_operand(evaluate_filter(e.lhs, frame), "arithmetic");
      const Term b = number_operand(evaluate_filter(e.rhs, frame), "arithmetic");
      return of_term(arithmetic(e.op, a, b));
    }
    case Op::less:
    case Op::less_equal:
    case Op::greater:
    case Op::greater_equal: {
      const Term a = number_operand(evaluate_filter(e.lhs, frame), "ordering comparison");
      const Term b = number_operand(evaluate_filter(e.rhs, frame), "ordering comparison");
      if (std::isnan(a.number()) || std::isnan(b.number())) return of_bool(false);
      const int c = compare_numbers(a, b);
      switch (e.op) {
        case Op::less:
          return of_bool(c < 0);
        case Op::less_equal:
          return of_bool(c <= 0);
        case Op::greater:
          return of_bool(c > 0);
        default:
          return of_bool(c >= 0);
      }
    }
    case Op::equal:
    case Op::not_equal: {
      const FilterValue a = evaluate_filter(e.lhs, frame);
      const FilterValue b = evaluate_filter(e.rhs, frame);
      if (class_of(a) != class_of(b))
        throw FilterTypeError(std::string("cannot compare ") + class_name(a) + " with " + class_name(b));
      const bool same =
          a.kind == FilterValue::Kind::boolean ? a.boolean == b.boolean : a.term == b.term;
      return of_bool(e.op == Op::equal ? same : !same);
    }
    case Op::logical_and:
      if (!as_bool(evaluate_filter(e.lhs, frame), "'and'")) return of_bool(false);
      return of_bool(as_bool(evaluate_filter(e.rhs, frame), "'and'"));
    case Op::logical_or:
      if (as_bool(evaluate_filter(e.lhs, frame), "'or'")) return of_bool(true);
      return of_bool(as_bool(evaluate_filter(e.rhs, frame), "'or'"));
    case Op::logical_not:
      return of_bool(!as_bool(evaluate_filter(e.lhs, frame), "'not'"));
  }
  throw FilterTypeError("unknown filter operator");
}

bool filter_passes(const FilterPtr& expr, const Frame& frame) {
  const FilterValue v = evaluate_filter(expr, frame);
  if (v.kind != FilterValue::Kind::boolean)
    throw FilterTypeError(std::string("filter must produce a boolean, got ") + class_name(v));
  return v.boolean;
}

// ---- engine ---------------------------------------------------------------

struct QueryEngine::Run {
  FreshNames names;
};

QueryEngine::QueryEngine(const KnowledgeBase& kb, const RuleStore& rules, Gateway* gateway, EngineOptions options)
    : kb_(kb), rules_(rules), gateway_(gateway), options_(options) {
  options_.bm25.validate();
}

Gateway& QueryEngine::gateway() const {
  if (gateway_ == nullptr) throw GatewayUnavailable("no gateway configured for neural clauses");
  return *gateway_;
}

std::vector<Frame> QueryEngine::search(const std::vector<Clause>& clauses) const {
  return search_from(clauses, {Frame{}});
}

std::vector<Frame> QueryEngine::search_from(const std::vector<Clause>& clauses, std::vector<Frame> frames) const {
  if (clauses.empty()) throw QueryError("search needs at least one clause");
  Run run;
  return conjunction(clauses, std::move(frames), run, 0);
}

std::vector<Frame> QueryEngine::conjunction(const std::vector<Clause>& clauses, std::vector<Frame> frames, Run& run,
                                            std::size_t depth) const {
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (frames.empty()) break;
    try {
      frames = eval_clause(clauses[i], std::move(frames), run, depth);
    } catch (Error& e) {
      e.add_context("clause " + std::to_string(i + 1) + ", " + clause_name(clauses[i]) +
                    (depth > 0 ? ", rule depth " + std::to_string(depth) : ""));
      throw;
    }
  }
  return frames;
}

std::vector<Frame> QueryEngine::eval_clause(const Clause& clause, std::vector<Frame> frames, Run& run,
                                            std::size_t depth) const {
  return std::visit(
      [&](const auto& c) -> std::vector<Frame> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, PatternClause>) {
          return eval_pattern(c.pattern, frames, run, depth);
        } else if constexpr (std::is_same_v<T, FilterClause>) {
          return eval_filter(c.expr, std::move(frames));
        } else if constexpr (std::is_same_v<T, Bm25Clause>) {
          return eval_bm25(c, frames, run, depth);
        } else if constexpr (std::is_same_v<T, NeuralMatchClause>) {
          return eval_neural_match(c, frames, run, depth);
        } else {
          return eval_neural_extract(c, frames, run, depth);
        }
      },
      clause);
}

std::vector<Frame> QueryEngine::eval_pattern(const Term& pattern, const std::vector<Frame>& frames, Run& run,
                                             std::size_t depth) const {
  if (!pattern.is_tuple()) throw QueryError("pattern must be a tuple");
  std::vector<Frame> out;
  for (const auto& frame : frames) {
    auto facts = kb_.match(pattern, frame);
    out.insert(out.end(), std::make_move_iterator(facts.begin()), std::make_move_iterator(facts.end()));
    if (!rules_.empty()) {
      auto inferred = resolve_rules(pattern, frame, run, depth);
      out.insert(out.end(), std::make_move_iterator(inferred.begin()), std::make_move_iterator(inferred.end()));
    }
  }
  return out;
}

std::vector<Frame> QueryEngine::resolve_rules(const Term& pattern, const Frame& frame, Run& run,
                                              std::size_t depth) const {
  std::vector<Frame> out;
  std::vector<std::string> visible;
  collect_variables(substitute(pattern, frame), visible);

  for (const Rule* rule : rules_.candidates(pattern, frame)) {
    const Rule renamed = standardize_apart(*rule, run.names);
    auto unified = unify(pattern, renamed.head, frame);
    if (!unified) continue;
    if (depth + 1 > options_.max_rule_depth) throw RuleDepthExceeded(options_.max_rule_depth);
    for (const auto& solved : conjunction(renamed.body, {*unified}, run, depth + 1)) {
      Frame result = frame;
      for (const auto& name : visible) {
        Term value = substitute(Term::variable(name), solved);
        if (value.is_variable() && value.str() == name) continue;
        result = result.extend(name, std::move(value));
      }
      out.push_back(std::move(result));
    }
  }
  return out;
}

std::vector<Frame> QueryEngine::eval_filter(const FilterPtr& expr, std::vector<Frame> frames) const {
  std::vector<Frame> out;
  for (auto& frame : frames)
    if (filter_passes(expr, frame)) out.push_back(std::move(frame));
  return out;
}

QueryEngine::Collected QueryEngine::collect_documents(const Term& pattern, const std::vector<Frame>& frames, Run& run,
                                                      std::size_t depth) const {
  if (!pattern.is_tuple() || pattern.arity() != 3 || !pattern.elements()[2].is_variable())
    throw QueryError("scored clause pattern must be a 3-tuple ending in a variable");
  Collected c;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  std::set<std::string> ids;
  std::map<std::string, std::size_t> per_key;
  for (auto& frame : eval_pattern(pattern, frames, run, depth)) {
    const Term key = substitute(pattern.elements()[0], frame);
    const Term body = substitute(pattern.elements()[2], frame);
    std::string key_text = key.plain();
    std::string text = body.is_string() ? body.str() : body.plain();
    auto [it, inserted] = seen.emplace(std::make_pair(key_text, text), c.docs.size());
    if (inserted) {
      std::string id = key_text;
      std::size_t& n = per_key[key_text];
      while (!ids.insert(id).second) id = key_text + "#" + std::to_string(++n + 1);
      c.docs.push_back({std::move(id), std::move(text)});
      c.keys.push_back(key);
    }
    c.candidates.push_back({std::move(frame), it->second});
  }
  return c;
}

std::vector<Frame> QueryEngine::keep_ranked(const Collected& collected, const std::vector<ScoredHit>& hits) const {
  std::unordered_map<std::string, std::size_t> doc_of;
  for (std::size_t i = 0; i < collected.docs.size(); ++i) doc_of.emplace(collected.docs[i].id, i);
  std::vector<std::size_t> rank(collected.docs.size(), std::numeric_limits<std::size_t>::max());
  std::size_t next = 0;
  for (const auto& hit : hits) {
    auto it = doc_of.find(hit.doc_key);
    if (it == doc_of.end()) throw GatewayProtocolError("ranking returned unknown document id " + hit.doc_key);
    if (rank[it->second] == std::numeric_limits<std::size_t>::max()) rank[it->second] = next++;
  }
  std::vector<const Candidate*> kept;
  for (const auto& cand : collected.candidates)
    if (rank[cand.doc] != std::numeric_limits<std::size_t>::max()) kept.push_back(&cand);
  std::stable_sort(kept.begin(), kept.end(),
                   [&](const Candidate* a, const Candidate* b) { return rank[a->doc] < rank[b->doc]; });
  std::vector<Frame> out;
  out.reserve(kept.size());
  for (const auto* cand : kept) out.push_back(cand->frame);
  return out;
}

std::vector<Frame> QueryEngine::eval_bm25(const Bm25Clause& clause, const std::vector<Frame>& frames, Run& run,
                                          std::size_t depth) const {
  if (clause.k < 1) throw QueryError("bm25_match k must be >= 1");
  const Collected collected = collect_documents(clause.pattern, frames, run, depth);
  if (collected.docs.empty()) return {};
  std::vector<std::pair<std::string, std::string>> docs;
  docs.reserve(collected.docs.size());
  for (const auto& d : collected.docs) docs.emplace_back(d.id, d.text);
  const auto index = Bm25Index::build(docs, options_.bm25);
  return keep_ranked(collected, index.top_k(clause.query, static_cast<std::size_t>(clause.k)));
}

std::vector<Frame> QueryEngine::eval_neural_match(const NeuralMatchClause& clause, const std::vector<Frame>& frames,
                                                  Run& run, std::size_t depth) const {
  if (clause.k < 1) throw QueryError("neural_match k must be >= 1");
  const Collected collected = collect_documents(clause.pattern, frames, run, depth);
  if (collected.docs.empty()) return {};
  auto hits = gateway().retrieve(clause.query, collected.docs, static_cast<std::size_t>(clause.k));
  if (hits.size() > static_cast<std::size_t>(clause.k)) hits.resize(static_cast<std::size_t>(clause.k));
  return keep_ranked(collected, hits);
}

std::vector<Frame> QueryEngine::eval_neural_extract(const NeuralExtractClause& clause,
                                                    const std::vector<Frame>& frames, Run& run,
                                                    std::size_t depth) const {
  if (clause.k < 1) throw QueryError("neural_extract k must be >= 1");
  for (const auto& frame : frames)
    if (frame.binds(clause.answer_var)) throw VariableAlreadyBound(clause.answer_var);
  const Collected collected = collect_documents(clause.pattern, frames, run, depth);
  if (collected.docs.empty()) return {};

  auto spans = gateway().extract(clause.query, collected.docs, static_cast<std::size_t>(clause.k));
  sort_spans(spans);
  if (spans.size() > static_cast<std::size_t>(clause.k)) spans.resize(static_cast<std::size_t>(clause.k));

  std::unordered_map<std::string, std::size_t> doc_of;
  for (std::size_t i = 0; i < collected.docs.size(); ++i) doc_of.emplace(collected.docs[i].id, i);
  std::vector<std::vector<const Candidate*>> by_doc(collected.docs.size());
  for (const auto& cand : collected.candidates) by_doc[cand.doc].push_back(&cand);

  std::vector<Frame> out;
  std::vector<bool> answered(collected.docs.size(), false);
  for (const auto& span : spans) {
    auto it = doc_of.find(span.doc_key);
    if (it == doc_of.end()) throw GatewayProtocolError("reader returned unknown document id " + span.doc_key);
    answered[it->second] = true;
    const Term record = Term::tuple({Term::text(span.text), Term::real(span.score),
                                     Term::integer(static_cast<std::int64_t>(span.start)),
                                     Term::integer(static_cast<std::int64_t>(span.end)), collected.keys[it->second]});
    for (const auto* cand : by_doc[it->second]) out.push_back(cand->frame.extend(clause.answer_var, record));
  }
  if (options_.keep_unanswered)
    for (const auto& cand : collected.candidates)
      if (!answered[cand.doc]) out.push_back(cand.frame);
  return out;
}

}  // namespace neuroquery
