#include "neuroquery/ast.hpp"

#include <algorithm>

namespace neuroquery {

FilterPtr FilterExpr::literal(Term value) {
  auto node = std::make_shared<FilterExpr>();
  node->op = Op::literal;
  node->value = std::move(value);
  return node;
}

FilterPtr FilterExpr::variable(std::string name) {
  auto node = std::make_shared<FilterExpr>();
  node->op = Op::variable;
  node->name = std::move(name);
  return node;
}

FilterPtr FilterExpr::unary(Op op, FilterPtr operand) {
  auto node = std::make_shared<FilterExpr>();
  node->op = op;
  node->lhs = std::move(operand);
  return node;
}

FilterPtr FilterExpr::binary(Op op, FilterPtr lhs, FilterPtr rhs) {
  auto node = std::make_shared<FilterExpr>();
  node->op = op;
  node->lhs = std::move(lhs);
  node->rhs = std::move(rhs);
  return node;
}

bool same_expr(const FilterPtr& a, const FilterPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

bool operator==(const FilterExpr& a, const FilterExpr& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case FilterExpr::Op::literal:
      return identical(a.value, b.value);
    case FilterExpr::Op::variable:
      return a.name == b.name;
    default:
      return same_expr(a.lhs, b.lhs) && same_expr(a.rhs, b.rhs);
  }
}

bool operator==(const PatternClause& a, const PatternClause& b) { return identical(a.pattern, b.pattern); }
bool operator==(const FilterClause& a, const FilterClause& b) { return same_expr(a.expr, b.expr); }
bool operator==(const Bm25Clause& a, const Bm25Clause& b) {
  return identical(a.pattern, b.pattern) && a.query == b.query && a.k == b.k;
}
bool operator==(const NeuralMatchClause& a, const NeuralMatchClause& b) {
  return identical(a.pattern, b.pattern) && a.query == b.query && a.k == b.k;
}
bool operator==(const NeuralExtractClause& a, const NeuralExtractClause& b) {
  return a.answer_var == b.answer_var && identical(a.pattern, b.pattern) && a.query == b.query &&
         a.k == b.k;
}

const char* clause_name(const Clause& clause) {
  switch (clause.index()) {
    case 0:
      return "pattern";
    case 1:
      return "op_filter";
    case 2:
      return "bm25_match";
    case 3:
      return "neural_match";
    default:
      return "neural_extract";
  }
}

bool operator==(const Rule& a, const Rule& b) { return identical(a.head, b.head) && a.body == b.body; }
bool operator==(const FactStmt& a, const FactStmt& b) { return identical(a.fact, b.fact); }
bool operator==(const RuleStmt& a, const RuleStmt& b) { return a.rule == b.rule; }
bool operator==(const SearchStmt& a, const SearchStmt& b) { return a.clauses == b.clauses; }
bool operator==(const Program& a, const Program& b) { return a.statements == b.statements; }

Term rename_variables(const Term& term, const std::function<std::string(const std::string&)>& rename) {
  switch (term.kind()) {
    case Term::Kind::variable:
      return Term::variable(rename(term.str()));
    case Term::Kind::tuple: {
      TermList out;
      out.reserve(term.arity());
      for (const auto& e : term.elements()) out.push_back(rename_variables(e, rename));
      return Term::tuple(std::move(out));
    }
    default:
      return term;
  }
}

FilterPtr rename_variables(const FilterPtr& expr, const std::function<std::string(const std::string&)>& rename) {
  if (!expr) return expr;
  switch (expr->op) {
    case FilterExpr::Op::literal:
      return expr;
    case FilterExpr::Op::variable:
      return FilterExpr::variable(rename(expr->name));
    default:
      if (expr->is_unary()) return FilterExpr::unary(expr->op, rename_variables(expr->lhs, rename));
      return FilterExpr::binary(expr->op, rename_variables(expr->lhs, rename), rename_variables(expr->rhs, rename));
  }
}

Clause rename_variables(const Clause& clause, const std::function<std::string(const std::string&)>& rename) {
  return std::visit(
      [&](const auto& c) -> Clause {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, PatternClause>) {
          return PatternClause{rename_variables(c.pattern, rename)};
        } else if constexpr (std::is_same_v<T, FilterClause>) {
          return FilterClause{rename_variables(c.expr, rename)};
        } else if constexpr (std::is_same_v<T, NeuralExtractClause>) {
          return NeuralExtractClause{rename(c.answer_var), rename_variables(c.pattern, rename), c.query, c.k};
        } else {
          return T{rename_variables(c.pattern, rename), c.query, c.k};
        }
      },
      clause);
}

namespace {
void add_unique(std::vector<std::string>& out, const std::string& name) {
  if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
}
}  // namespace

void collect_variables(const Term& term, std::vector<std::string>& out) {
  if (term.is_variable()) {
    add_unique(out, term.str());
  } else if (term.is_tuple()) {
    for (const auto& e : term.elements()) collect_variables(e, out);
  }
}

void collect_variables(const FilterPtr& expr, std::vector<std::string>& out) {
  if (!expr) return;
  if (expr->op == FilterExpr::Op::variable) {
    add_unique(out, expr->name);
    return;
  }
  collect_variables(expr->lhs, out);
  collect_variables(expr->rhs, out);
}

void collect_variables(const Clause& clause, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, FilterClause>) {
          collect_variables(c.expr, out);
        } else if constexpr (std::is_same_v<T, NeuralExtractClause>) {
          add_unique(out, c.answer_var);
          collect_variables(c.pattern, out);
        } else {
          collect_variables(c.pattern, out);
        }
      },
      clause);
}

}  // namespace neuroquery
