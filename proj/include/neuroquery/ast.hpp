#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "neuroquery/term.hpp"

namespace neuroquery {

struct FilterExpr;
using FilterPtr = std::shared_ptr<const FilterExpr>;

/// Node of an `op_filter` expression tree.
struct FilterExpr {
  enum class Op {
    literal,   // value
    variable,  // name
    negate,
    abs,
    add,
    subtract,
    multiply,
    divide,
    less,
    less_equal,
    greater,
    greater_equal,
    equal,
    not_equal,
    logical_and,
    logical_or,
    logical_not,
  };

  Op op;
  Term value = Term::integer(0);  // literal payload
  std::string name;               // variable name, without `?`
  FilterPtr lhs;                  // operand of unary ops
  FilterPtr rhs;

  static FilterPtr literal(Term value);
  static FilterPtr variable(std::string name);
  static FilterPtr unary(Op op, FilterPtr operand);
  static FilterPtr binary(Op op, FilterPtr lhs, FilterPtr rhs);

  bool is_unary() const noexcept { return op == Op::negate || op == Op::abs || op == Op::logical_not; }
  bool is_binary() const noexcept { return lhs != nullptr && rhs != nullptr; }
};

bool operator==(const FilterExpr& a, const FilterExpr& b);
inline bool operator!=(const FilterExpr& a, const FilterExpr& b) { return !(a == b); }
bool same_expr(const FilterPtr& a, const FilterPtr& b);

/// `(s, p, o)` or any other tuple pattern matched against facts and rule heads.
struct PatternClause {
  Term pattern;
};

struct FilterClause {
  FilterPtr expr;
};

/// Sparse match of the pattern's third element (the document text) against `query`.
struct Bm25Clause {
  Term pattern;
  std::string query;
  std::int64_t k;
};

/// Dense-retriever match of the pattern's document text against `query`.
struct NeuralMatchClause {
  Term pattern;
  std::string query;
  std::int64_t k;
};

/// Reader extraction binding `answer_var` to the extracted span records.
struct NeuralExtractClause {
  std::string answer_var;
  Term pattern;
  std::string query;
  std::int64_t k;
};

using Clause = std::variant<PatternClause, FilterClause, Bm25Clause, NeuralMatchClause, NeuralExtractClause>;

bool operator==(const PatternClause& a, const PatternClause& b);
bool operator==(const FilterClause& a, const FilterClause& b);
bool operator==(const Bm25Clause& a, const Bm25Clause& b);
bool operator==(const NeuralMatchClause& a, const NeuralMatchClause& b);
bool operator==(const NeuralExtractClause& a, const NeuralExtractClause& b);

/// Short name of a clause form, as written in source (`pattern`, `op_filter`, ...).
const char* clause_name(const Clause& clause);

struct Rule {
  Term head = Term::integer(0);
  std::vector<Clause> body;
};

bool operator==(const Rule& a, const Rule& b);

struct FactStmt {
  Term fact;
};
struct RuleStmt {
  Rule rule;
};
struct SearchStmt {
  std::vector<Clause> clauses;
};

using Statement = std::variant<FactStmt, RuleStmt, SearchStmt>;

bool operator==(const FactStmt& a, const FactStmt& b);
bool operator==(const RuleStmt& a, const RuleStmt& b);
bool operator==(const SearchStmt& a, const SearchStmt& b);

struct Program {
  std::vector<Statement> statements;
};

bool operator==(const Program& a, const Program& b);

/// Rebuilds a term with every variable name passed through `rename`.
Term rename_variables(const Term& term, const std::function<std::string(const std::string&)>& rename);
FilterPtr rename_variables(const FilterPtr& expr, const std::function<std::string(const std::string&)>& rename);
Clause rename_variables(const Clause& clause, const std::function<std::string(const std::string&)>& rename);

/// Appends the names of variables in `term` to `out`, first occurrence first, without duplicates.
void collect_variables(const Term& term, std::vector<std::string>& out);
void collect_variables(const FilterPtr& expr, std::vector<std::string>& out);
void collect_variables(const Clause& clause, std::vector<std::string>& out);

}  // namespace neuroquery
