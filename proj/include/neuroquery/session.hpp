#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "neuroquery/engine.hpp"
#include "neuroquery/gateway.hpp"
#include "neuroquery/kb.hpp"
#include "neuroquery/nql.hpp"

namespace neuroquery {

/// Frames produced by one `search` statement.
struct SearchResult {
  SearchStmt query;
  std::vector<Frame> frames;
};

/// Outcome of translating and running a question.
struct AnswerResult {
  std::string raw_query;  // text returned by the translator
  Program program;
  std::vector<SearchResult> results;
};

/// A knowledge base, its rules and a gateway, driven by query-language programs.
class Session {
 public:
  explicit Session(EngineOptions options = {}, std::unique_ptr<Gateway> gateway = std::make_unique<FallbackGateway>());

  KnowledgeBase& kb() noexcept { return kb_; }
  const KnowledgeBase& kb() const noexcept { return kb_; }
  RuleStore& rules() noexcept { return rules_; }
  const RuleStore& rules() const noexcept { return rules_; }
  Gateway* gateway() const noexcept { return gateway_.get(); }
  const EngineOptions& options() const noexcept { return options_; }

  /// Asserts facts, defines rules and runs searches in order.
  /// `on_result` sees each search's frames as soon as they are ready.
  std::vector<SearchResult> execute(const Program& program,
                                    const std::function<void(const SearchResult&)>& on_result = {});
  std::vector<SearchResult> execute(std::string_view source,
                                    const std::function<void(const SearchResult&)>& on_result = {});

  std::vector<Frame> search(const SearchStmt& stmt) const;

  /// Translates `question` with the gateway, parses the result and runs it.
  /// Throws TranslationUnparsable (carrying the raw text) when it does not parse.
  AnswerResult answer(std::string_view question);

  /// Parses translator output; also accepts the host-language (Python-style) syntax.
  static Program parse_translation(const std::string& raw);

 private:
  EngineOptions options_;
  std::unique_ptr<Gateway> gateway_;
  KnowledgeBase kb_;
  RuleStore rules_;
};

}  // namespace neuroquery
