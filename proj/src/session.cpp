#include "neuroquery/session.hpp"

#include <algorithm>

#include "neuroquery/error.hpp"

namespace neuroquery {

Session::Session(EngineOptions options, std::unique_ptr<Gateway> gateway)
    : options_(options), gateway_(std::move(gateway)) {
  options_.bm25.validate();
}

std::vector<Frame> Session::search(const SearchStmt& stmt) const {
  return QueryEngine(kb_, rules_, gateway_.get(), options_).search(stmt.clauses);
}

std::vector<SearchResult> Session::execute(const Program& program,
                                           const std::function<void(const SearchResult&)>& on_result) {
  std::vector<SearchResult> out;
  for (const auto& statement : program.statements) {
    if (const auto* fact = std::get_if<FactStmt>(&statement)) {
      kb_.assert_fact(fact->fact);
    } else if (const auto* rule = std::get_if<RuleStmt>(&statement)) {
      rules_.define(rule->rule);
    } else {
      const auto& stmt = std::get<SearchStmt>(statement);
      out.push_back({stmt, search(stmt)});
      if (on_result) on_result(out.back());
    }
  }
  return out;
}

std::vector<SearchResult> Session::execute(std::string_view source,
                                           const std::function<void(const SearchResult&)>& on_result) {
  return execute(parse_program(source), on_result);
}

Program Session::parse_translation(const std::string& raw) {
  Program program;
  try {
    program = parse_program(raw);
  } catch (const ParseError& first) {
    try {
      program = parse_program(from_python_syntax(raw));
    } catch (const ParseError&) {
      throw TranslationUnparsable(raw, first.what());
    }
  }
  const bool has_search = std::any_of(program.statements.begin(), program.statements.end(),
                                      [](const Statement& s) { return std::holds_alternative<SearchStmt>(s); });
  if (!has_search) throw TranslationUnparsable(raw, "no search statement");
  return program;
}

AnswerResult Session::answer(std::string_view question) {
  if (!gateway_) throw GatewayUnavailable("no gateway configured for translation");
  AnswerResult result;
  result.raw_query = gateway_->translate(question);
  result.program = parse_translation(result.raw_query);
  result.results = execute(result.program);
  return result;
}

}  // namespace neuroquery
