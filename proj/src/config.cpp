#include "neuroquery/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "neuroquery/error.hpp"
#include "neuroquery/term.hpp"

namespace neuroquery {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() || end != value.data() + value.size())
    throw ConfigError("bad value '" + std::string(value) + "' for " + std::string(key));
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("bad boolean '" + std::string(value) + "' for " + std::string(key));
}

}  // namespace

OutputFormat parse_output_format(std::string_view name) {
  if (name == "records") return OutputFormat::records;
  if (name == "csv") return OutputFormat::csv;
  throw ConfigError("unknown output format '" + std::string(name) + "' (expected records or csv)");
}

const char* to_string(OutputFormat format) noexcept { return format == OutputFormat::csv ? "csv" : "records"; }

const std::set<std::string>& EngineConfig::keys() {
  static const std::set<std::string> all = {
      "kb.properties",      "kb.reviews",        "kb.questions",           "dataset",
      "gateway.backend",    "gateway.endpoint",  "gateway.timeout_ms",     "gateway.batch_size",
      "gateway.max_in_flight", "bm25.k1",        "bm25.b",                 "bm25.delta",
      "engine.max_rule_depth", "engine.keep_unanswered", "output.format",
  };
  return all;
}

void EngineConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "kb.properties") {
    kb_properties = value;
  } else if (key == "kb.reviews") {
    kb_reviews = value;
  } else if (key == "kb.questions") {
    kb_questions = value;
  } else if (key == "dataset") {
    dataset = value;
  } else if (key == "gateway.backend") {
    gateway.backend = parse_backend(value);
    backend_set_ = true;
  } else if (key == "gateway.endpoint") {
    gateway.endpoint = value;
    if (!backend_set_ && !value.empty()) gateway.backend = Backend::remote;
  } else if (key == "gateway.timeout_ms") {
    gateway.timeout_ms = parse_number<int>(key, value);
  } else if (key == "gateway.batch_size") {
    gateway.batch_size = parse_number<std::size_t>(key, value);
  } else if (key == "gateway.max_in_flight") {
    gateway.max_in_flight = parse_number<std::size_t>(key, value);
  } else if (key == "bm25.k1") {
    engine.bm25.k1 = parse_number<double>(key, value);
  } else if (key == "bm25.b") {
    engine.bm25.b = parse_number<double>(key, value);
  } else if (key == "bm25.delta") {
    engine.bm25.delta = parse_number<double>(key, value);
  } else if (key == "engine.max_rule_depth") {
    engine.max_rule_depth = parse_number<std::size_t>(key, value);
  } else if (key == "engine.keep_unanswered") {
    engine.keep_unanswered = parse_bool(key, value);
  } else if (key == "output.format") {
    output = parse_output_format(value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

void EngineConfig::load(std::istream& in, const std::string& origin) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
    try {
      set(trim(view.substr(0, eq)), view.substr(eq + 1));
    } catch (ConfigError& e) {
      e.add_context(origin + ":" + std::to_string(number));
      throw;
    }
  }
}

void EngineConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  load(in, path.string());
}

void EngineConfig::apply_environment(const std::function<const char*(const char*)>& getenv) {
  if (const char* endpoint = getenv("NEUROQUERY_ENDPOINT"); endpoint != nullptr && *endpoint != '\0') {
    set("gateway.endpoint", endpoint);
  }
}

void EngineConfig::validate() const {
  gateway.validate();
  engine.bm25.validate();
  if (engine.max_rule_depth == 0) throw ConfigError("engine.max_rule_depth must be >= 1");
}

std::string EngineConfig::to_text() const {
  std::ostringstream out;
  out << "kb.properties = " << kb_properties << '\n'
      << "kb.reviews = " << kb_reviews << '\n'
      << "kb.questions = " << kb_questions << '\n'
      << "dataset = " << dataset << '\n'
      << "gateway.backend = " << to_string(gateway.backend) << '\n'
      << "gateway.endpoint = " << gateway.endpoint << '\n'
      << "gateway.timeout_ms = " << gateway.timeout_ms << '\n'
      << "gateway.batch_size = " << gateway.batch_size << '\n'
      << "gateway.max_in_flight = " << gateway.max_in_flight << '\n'
      << "bm25.k1 = " << format_real(engine.bm25.k1) << '\n'
      << "bm25.b = " << format_real(engine.bm25.b) << '\n'
      << "bm25.delta = " << format_real(engine.bm25.delta) << '\n'
      << "engine.max_rule_depth = " << engine.max_rule_depth << '\n'
      << "engine.keep_unanswered = " << (engine.keep_unanswered ? "true" : "false") << '\n'
      << "output.format = " << to_string(output) << '\n';
  return out.str();
}

}  // namespace neuroquery
