#pragma once

#include <string>
#include <string_view>

#include "neuroquery/ast.hpp"
#include "neuroquery/term.hpp"

namespace neuroquery {

/// Parses a sequence of `fact(...)`, `rule(...)` and `search(...)` statements.
///
/// Grammar (whitespace and `#` comments are ignored between tokens):
///
///     program := stmt*
///     stmt    := "fact" "(" pattern ")"
///              | "rule" "(" pattern ("," clause)* [","] ")"
///              | "search" "(" clause ("," clause)* [","] ")"
///     clause  := pattern
///              | "op_filter" "(" expr ")"
///              | "bm25_match" "(" pattern "," string "," int ")"
///              | "neural_match" "(" pattern "," string "," int ")"
///              | "neural_extract" "(" var "," pattern "," string "," int ")"
///     pattern := term "." (ident | var | string) "==" term
///              | "(" term ("," term)+ ")"
///     term    := var | string | ["-"] number | ident | "(" term ("," term)* ")"
///
/// Quoted strings matching `[A-Za-z0-9_-]+` are identifiers, like bare words;
/// other quoted strings are text. Throws ParseError (and TypeErrorStatic for
/// ill-typed filter literals).
Program parse_program(std::string_view source);

/// Parses a bare filter expression, e.g. `abs(?price - 30) < 10`.
///
/// Precedence, tightest first: unary `-` and `abs`, `* /`, `+ -`, comparisons
/// (non-associative), `not`, `and`, `or`.
FilterPtr parse_filter_expr(std::string_view source);

/// Parses a single term, e.g. `(B00001P4ZH, price, 39.36)`.
Term parse_term(std::string_view source);

/// Canonical source text; `parse_program(render(p)) == p`.
std::string render(const Program& program);
std::string render(const Statement& statement);
std::string render(const Clause& clause);
std::string render(const FilterPtr& expr);
std::string render(const Term& term);

/// One result frame as a single-line JSON object keyed `?name`, in binding order.
/// Values are substituted through the frame; tuples become arrays.
std::string render_record(const Frame& frame);

/// Rewrites the host-language (Python-style) syntax (`_x` variables, `lambda e: ...`
/// filters with `e['?x']` lookups) into this query language. Text inside string
/// literals is left alone.
std::string from_python_syntax(std::string_view source);

}  // namespace neuroquery
