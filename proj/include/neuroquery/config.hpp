#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "neuroquery/engine.hpp"
#include "neuroquery/gateway.hpp"

namespace neuroquery {

enum class OutputFormat { records, csv };

OutputFormat parse_output_format(std::string_view name);
const char* to_string(OutputFormat format) noexcept;

/// Effective settings of a command-line run.
///
/// Config files hold `key = value` lines; `#` starts a comment. Keys:
///
///     kb.properties  kb.reviews  kb.questions  dataset
///     gateway.backend  gateway.endpoint  gateway.timeout_ms
///     gateway.batch_size  gateway.max_in_flight
///     bm25.k1  bm25.b  bm25.delta
///     engine.max_rule_depth  engine.keep_unanswered
///     output.format
struct EngineConfig {
  std::string kb_properties;
  std::string kb_reviews;
  std::string kb_questions;
  std::string dataset;
  GatewayConfig gateway;
  EngineOptions engine;
  OutputFormat output = OutputFormat::records;

  /// Sets one key. Throws ConfigError for unknown keys or bad values.
  /// A non-empty gateway.endpoint selects the remote backend unless gateway.backend was set.
  void set(std::string_view key, std::string_view value);

  /// Applies every line of a config file. Throws IoError, ConfigError.
  void load_file(const std::filesystem::path& path);
  void load(std::istream& in, const std::string& origin = "config");

  /// NEUROQUERY_ENDPOINT selects the remote backend unless a backend was set explicitly.
  void apply_environment(const std::function<const char*(const char*)>& getenv);

  /// Throws ConfigError when settings are inconsistent.
  void validate() const;

  /// Every key with its effective value, one `key = value` per line.
  std::string to_text() const;

  static const std::set<std::string>& keys();

 private:
  bool backend_set_ = false;
};

}  // namespace neuroquery
