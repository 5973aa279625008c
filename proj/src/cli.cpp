#include "neuroquery/cli.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "neuroquery/config.hpp"
#include "neuroquery/dataset.hpp"
#include "neuroquery/error.hpp"
#include "neuroquery/evaluation.hpp"
#include "neuroquery/nql.hpp"
#include "neuroquery/session.hpp"
#include "neuroquery/unify.hpp"

namespace neuroquery {

namespace {

struct Streams {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

// ---- result output --------------------------------------------------------

std::string csv_cell(const Term& t) {
  std::string s = t.is_string() ? t.str() : (t.is_tuple() ? render(t) : t.plain());
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

void print_frames(std::ostream& out, const std::vector<Frame>& frames, OutputFormat format) {
  if (format == OutputFormat::records) {
    for (const auto& f : frames) out << render_record(f) << '\n';
    return;
  }
  std::vector<std::string> columns;
  for (const auto& f : frames)
    for (const auto& [name, value] : f.bindings())
      if (std::find(columns.begin(), columns.end(), name) == columns.end()) columns.push_back(name);
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << '?' << columns[i];
  out << '\n';
  for (const auto& f : frames) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out << ',';
      if (f.binds(columns[i])) out << csv_cell(substitute(Term::variable(columns[i]), f));
    }
    out << '\n';
  }
}

void print_results(std::ostream& out, const std::vector<SearchResult>& results, OutputFormat format) {
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (i > 0 && format == OutputFormat::csv) out << '\n';
    print_frames(out, results[i].frames, format);
  }
}

// ---- error reporting ------------------------------------------------------

int report(const std::exception_ptr& error, std::ostream& err, int fallback) {
  try {
    std::rethrow_exception(error);
  } catch (const TranslationUnparsable& e) {
    err << "error: " << e.describe() << "\n--- translated query ---\n" << e.raw() << "\n------------------------\n";
    return kExitParse;
  } catch (const ParseError& e) {
    err << "parse error: " << e.describe() << '\n';
    return kExitParse;
  } catch (const GatewayUnavailable& e) {
    err << "gateway unavailable: " << e.describe() << '\n';
    return kExitGateway;
  } catch (const ConfigError& e) {
    err << "config error: " << e.describe() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "io error: " << e.describe() << '\n';
    return kExitUsage;
  } catch (const MalformedRow& e) {
    err << "malformed row: " << e.describe() << '\n';
    return fallback == kExitEval ? kExitEval : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.describe() << '\n';
    return fallback;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return fallback;
  }
}

// ---- shared setup ---------------------------------------------------------

void load_kb(KnowledgeBase& kb, const EngineConfig& config) {
  if (!config.dataset.empty()) {
    const std::filesystem::path dir = config.dataset;
    kb.load_csv(dir / "asin_key_properties.csv", CsvKind::properties);
    if (std::filesystem::exists(dir / "asin_reviews.csv")) kb.load_csv(dir / "asin_reviews.csv", CsvKind::reviews);
  }
  if (!config.kb_properties.empty()) kb.load_csv(config.kb_properties, CsvKind::properties);
  if (!config.kb_reviews.empty()) kb.load_csv(config.kb_reviews, CsvKind::reviews);
  if (!config.kb_questions.empty()) kb.load_csv(config.kb_questions, CsvKind::questions);
}

std::unique_ptr<Session> make_session(const EngineConfig& config) {
  auto session = std::make_unique<Session>(config.engine, make_gateway(config.gateway));
  load_kb(session->kb(), config);
  return session;
}

std::string read_all(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_all(in);
}

// ---- commands -------------------------------------------------------------

int cmd_load(const EngineConfig& config, bool expect_published, Streams io) {
  if (!config.dataset.empty()) {
    const Dataset ds = load_dataset(config.dataset, expect_published);
    io.out << "products: " << ds.counts.products << '\n'
           << "properties: " << ds.counts.properties << '\n'
           << "reviews: " << ds.counts.reviews << '\n'
           << "questions: " << ds.counts.questions << '\n'
           << "ground_truths: " << ds.counts.ground_truths << '\n'
           << "translation_pairs: " << ds.pairs.size() << '\n'
           << "facts: " << ds.kb.size() << '\n';
    for (const auto& w : ds.warnings) io.err << "warning: " << w << '\n';
    if (config.kb_properties.empty() && config.kb_reviews.empty() && config.kb_questions.empty()) return kExitOk;
  }
  KnowledgeBase kb;
  auto load = [&](const std::string& path, CsvKind kind) {
    if (path.empty()) return;
    io.out << to_string(kind) << ' ' << path << ": " << kb.load_csv(path, kind) << " facts\n";
  };
  load(config.kb_properties, CsvKind::properties);
  load(config.kb_reviews, CsvKind::reviews);
  load(config.kb_questions, CsvKind::questions);
  if (config.dataset.empty()) io.out << "facts: " << kb.size() << '\n';
  return kExitOk;
}

int cmd_query(const EngineConfig& config, const std::string& file, const std::string& inline_query, Streams io) {
  std::string source;
  if (!inline_query.empty()) {
    source = inline_query;
  } else if (file.empty() || file == "-") {
    source = read_all(io.in);
  } else {
    source = read_file(file);
  }
  const Program program = parse_program(source);
  auto session = make_session(config);
  session->execute(program, [&](const SearchResult& r) { print_results(io.out, {r}, config.output); });
  return kExitOk;
}

int cmd_answer(const EngineConfig& config, const std::string& question, bool show_query, Streams io) {
  auto session = make_session(config);
  const std::string raw = session->gateway()->translate(question);
  const Program program = Session::parse_translation(raw);
  if (show_query) io.err << render(program);
  session->execute(program, [&](const SearchResult& r) { print_results(io.out, {r}, config.output); });
  return kExitOk;
}

// Parenthesis depth of `text`, ignoring strings and comments.
int paren_balance(const std::string& text) {
  int depth = 0;
  char quote = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quote != 0) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')') {
      --depth;
    }
  }
  return depth;
}

bool repl_meta(Session& session, const std::string& line, Streams io, bool& quit) {
  std::istringstream words(line);
  std::string command;
  words >> command;
  if (command == ":quit" || command == ":q" || command == ":exit") {
    quit = true;
  } else if (command == ":rules") {
    for (const auto& rule : session.rules().rules()) io.out << render(Statement{RuleStmt{rule}}) << '\n';
  } else if (command == ":facts") {
    io.out << session.kb().size() << " facts\n";
  } else if (command == ":load") {
    std::string kind, path;
    words >> kind >> path;
    if (path.empty()) {
      io.err << "usage: :load properties|reviews|questions <path>\n";
    } else {
      const auto added = session.kb().load_csv(path, parse_csv_kind(kind));
      io.out << added << " facts added\n";
    }
  } else if (command == ":help") {
    io.out << ":load <kind> <path>   load a CSV file (properties, reviews, questions)\n"
              ":rules                list defined rules\n"
              ":facts                count facts\n"
              ":quit                 leave\n";
  } else {
    io.err << "unknown command " << command << " (try :help)\n";
  }
  return true;
}

int cmd_repl(const EngineConfig& config, bool interactive, Streams io) {
  auto session = make_session(config);
  std::string buffer;
  std::string line;
  bool quit = false;
  auto prompt = [&] {
    if (interactive) io.out << (buffer.empty() ? "nq> " : "... ") << std::flush;
  };
  prompt();
  while (!quit && std::getline(io.in, line)) {
    if (buffer.empty()) {
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos) {
        prompt();
        continue;
      }
      if (line[first] == ':') {
        try {
          repl_meta(*session, line.substr(first), io, quit);
        } catch (...) {
          report(std::current_exception(), io.err, kExitQuery);
        }
        if (!quit) prompt();
        continue;
      }
    }
    buffer += line;
    buffer += '\n';
    if (paren_balance(buffer) > 0) {
      prompt();
      continue;
    }
    try {
      session->execute(buffer, [&](const SearchResult& r) { print_results(io.out, {r}, config.output); });
    } catch (...) {
      report(std::current_exception(), io.err, kExitQuery);
    }
    buffer.clear();
    prompt();
  }
  if (!buffer.empty() && !quit) {
    try {
      session->execute(buffer, [&](const SearchResult& r) { print_results(io.out, {r}, config.output); });
    } catch (...) {
      report(std::current_exception(), io.err, kExitQuery);
    }
  }
  if (interactive) io.out << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string task;
  std::string k_grid = "2,13,20";
  std::string split = "all";
  std::uint64_t seed = kDefaultSplitSeed;
  std::string pool = "query";
  std::size_t reader_docs = 20;
  std::string out_dir;
  std::string dump;
  std::string replay;
  std::string candidates;
  bool smooth = false;
  std::size_t max_n = 4;
  bool expect_published = false;
};

std::vector<std::string> read_candidates(const std::string& path, const std::vector<TranslationPair>& pairs) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open candidates file " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  // JSON lines keyed by qid, or one candidate per line in reference order
  std::map<std::string, std::string> by_qid;
  bool keyed = !lines.empty();
  for (const auto& l : lines) {
    if (l.empty() || l.front() != '{') {
      keyed = false;
      break;
    }
    try {
      const auto j = nlohmann::json::parse(l);
      by_qid[j.at("qid").get<std::string>()] = j.at("query").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      keyed = false;
      break;
    }
  }
  if (!keyed) return lines;
  std::vector<std::string> out;
  for (const auto& p : pairs) {
    auto it = by_qid.find(p.qid);
    if (it == by_qid.end()) throw MissingRun(p.qid);
    out.push_back(it->second);
  }
  return out;
}

int cmd_eval(const EngineConfig& config, const EvalArgs& args, Streams io) {
  if (config.dataset.empty()) throw ConfigError("eval needs a dataset directory (--dataset or dataset key)");
  const auto k_grid = parse_k_grid(args.k_grid);
  const Dataset ds = load_dataset(config.dataset, args.expect_published);
  for (const auto& w : ds.warnings) io.err << "warning: " << w << '\n';

  std::vector<QAExample> examples = ds.examples;
  std::vector<TranslationPair> pairs = ds.pairs;
  std::vector<std::string> notes{"dataset " + config.dataset, "split " + args.split + " (seed " + std::to_string(args.seed) + ")"};
  if (args.split != "all") {
    const Split split = parse_split(args.split);
    examples = select_split(ds.examples, split, args.seed);
    std::map<std::string, std::string> asin_of;
    for (const auto& ex : ds.examples) asin_of[ex.qid] = ex.asin;
    pairs.clear();
    for (const auto& p : ds.pairs)
      if (split_of(asin_of[p.qid], args.seed) == split) pairs.push_back(p);
  }

  std::vector<MetricReport> reports;
  if (args.task == "translation") {
    std::vector<std::string> refs, cands;
    for (const auto& p : pairs) refs.push_back(p.reference_query);
    if (!args.candidates.empty()) {
      cands = read_candidates(args.candidates, pairs);
    } else {
      auto gateway = make_gateway(config.gateway);
      for (const auto& p : pairs) cands.push_back(gateway->translate(p.question));
    }
    reports = translation_reports(cands, refs, BleuOptions{args.max_n, args.smooth});
    notes.push_back(std::to_string(refs.size()) + " translation pairs, smoothing " + (args.smooth ? "on" : "off"));
  } else {
    QueryTaskOptions options;
    options.k_grid = k_grid;
    options.pool = parse_pool(args.pool);
    options.reader_docs = args.reader_docs;
    options.engine = config.engine;
    notes.push_back(std::to_string(examples.size()) + " examples, retrieval pool " + args.pool + ", backend " +
                    to_string(config.gateway.backend));

    std::vector<RetrievalRun> runs;
    std::unique_ptr<Gateway> gateway;
    if (!args.replay.empty()) {
      std::ifstream in(args.replay);
      if (!in) throw IoError("cannot open retrieval dump " + args.replay);
      runs = read_retrieval_dump(in);
      notes.push_back("replayed retrieval from " + args.replay);
    } else {
      gateway = make_gateway(config.gateway);
      std::size_t depth = options.reader_docs;
      for (auto k : k_grid) depth = std::max(depth, k);
      runs = run_retriever(ds, examples, *gateway, options, depth);
    }
    if (!args.dump.empty()) {
      std::ofstream out(args.dump);
      if (!out) throw IoError("cannot write retrieval dump " + args.dump);
      write_retrieval_dump(out, runs);
    }
    if (args.task == "retriever") {
      reports = retrieval_reports(examples, runs, k_grid);
      if (!reports.empty() && reports.front().excluded > 0)
        notes.push_back(std::to_string(reports.front().excluded) + " examples without gold reviews excluded");
    } else {
      if (!gateway) gateway = make_gateway(config.gateway);
      reports = reader_reports(examples, run_reader(ds, examples, runs, *gateway, options), k_grid);
    }
  }

  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    const auto base = std::filesystem::path(args.out_dir) / args.task;
    std::ofstream csv(base.string() + "_report.csv");
    std::ofstream summary(base.string() + "_summary.txt");
    if (!csv || !summary) throw IoError("cannot write reports under " + args.out_dir);
    write_report_csv(csv, reports);
    write_report_summary(summary, reports, notes);
  }
  write_report_csv(io.out, reports);
  write_report_summary(io.err, reports, notes);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  Streams io{in, out, err};
  CLI::App app{"neuroquery: neuro-symbolic queries over an n-tuple knowledge base", "neuroquery"};
  app.require_subcommand(0, 1);

  std::string config_file;
  bool print_config = false;
  std::vector<std::string> overrides;
  std::map<std::string, std::string> flag_values;
  app.add_option("--config", config_file, "key = value config file (default: $NEUROQUERY_CONFIG)");
  app.add_flag("--print-config", print_config, "print the effective configuration");
  app.add_option("--set", overrides, "override a config key, KEY=VALUE")->take_all();

  const std::vector<std::pair<const char*, const char*>> key_flags = {
      {"--properties", "kb.properties"}, {"--reviews", "kb.reviews"},
      {"--questions", "kb.questions"},   {"--dataset", "dataset"},
      {"--backend", "gateway.backend"},  {"--endpoint", "gateway.endpoint"},
      {"--timeout-ms", "gateway.timeout_ms"}, {"--format", "output.format"},
      {"--max-rule-depth", "engine.max_rule_depth"}, {"--bm25-k1", "bm25.k1"},
      {"--bm25-b", "bm25.b"},            {"--bm25-delta", "bm25.delta"},
  };
  for (const auto& [flag, key] : key_flags)
    app.add_option_function<std::string>(
        flag, [&flag_values, key = std::string(key)](const std::string& v) { flag_values[key] = v; },
        "sets " + std::string(key));
  bool keep_unanswered = false;
  app.add_flag("--keep-unanswered", keep_unanswered, "keep frames without extracted answers");

  auto* load = app.add_subcommand("load", "load CSV files (or a dataset directory) and report counts");
  bool expect_published = false;
  load->add_flag("--expect-published", expect_published, "warn when dataset counts differ from the published ones");

  auto* query = app.add_subcommand("query", "run a query program from a file or stdin");
  std::string query_file, inline_query;
  query->add_option("file", query_file, "program file ('-' or omitted: stdin)");
  query->add_option("-e,--expr", inline_query, "program text");

  auto* answer = app.add_subcommand("answer", "translate a question, run it and print the results");
  std::string question;
  bool show_query = false;
  answer->add_option("question", question, "natural-language question")->required();
  answer->add_flag("--show-query", show_query, "print the translated query to stderr");

  auto* repl = app.add_subcommand("repl", "interactive session");

  auto* eval = app.add_subcommand("eval", "evaluation runs");
  eval->require_subcommand(1);
  EvalArgs eval_args;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--split", eval_args.split, "all, train, validation or test");
    sub->add_option("--seed", eval_args.seed, "split seed");
    sub->add_option("--out-dir", eval_args.out_dir, "write <task>_report.csv and <task>_summary.txt here");
    sub->add_flag("--expect-published", eval_args.expect_published, "warn on count mismatches");
    sub->fallthrough();
  };
  auto add_query_task = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_option("--k", eval_args.k_grid, "comma-separated cutoffs");
    sub->add_option("--pool", eval_args.pool, "retrieval pool: query, product or corpus");
    sub->add_option("--reader-docs", eval_args.reader_docs, "retrieved documents passed to the reader");
    sub->add_option("--dump", eval_args.dump, "write the retrieval run as JSON lines");
    sub->add_option("--replay", eval_args.replay, "reuse a retrieval dump instead of retrieving");
  };
  auto* retriever = eval->add_subcommand("retriever", "recall@k of the retriever");
  add_query_task(retriever);
  auto* reader = eval->add_subcommand("reader", "EM and F1 of extracted answers");
  add_query_task(reader);
  eval_args.reader_docs = 20;
  auto* translation = eval->add_subcommand("translation", "BLEU of candidate queries");
  add_common(translation);
  translation->add_option("--candidates", eval_args.candidates, "candidate queries: one per line, or JSON lines");
  translation->add_flag("--smooth", eval_args.smooth, "add-one smoothing for n >= 2");
  translation->add_option("--max-n", eval_args.max_n, "largest n-gram order");

  for (auto* sub : {load, query, answer, repl, eval}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  EngineConfig config;
  try {
    if (config_file.empty())
      if (const char* env = std::getenv("NEUROQUERY_CONFIG"); env != nullptr && *env != '\0') config_file = env;
    if (!config_file.empty()) config.load_file(config_file);
    config.apply_environment([](const char* name) { return std::getenv(name); });
    for (const auto& [key, value] : flag_values) config.set(key, value);
    if (keep_unanswered) config.set("engine.keep_unanswered", "true");
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    config.validate();
  } catch (...) {
    return report(std::current_exception(), err, kExitUsage);
  }

  if (print_config) out << config.to_text();

  int fallback = kExitQuery;
  try {
    if (load->parsed()) {
      fallback = kExitUsage;
      return cmd_load(config, expect_published, io);
    }
    if (query->parsed()) return cmd_query(config, query_file, inline_query, io);
    if (answer->parsed()) return cmd_answer(config, question, show_query, io);
    if (repl->parsed()) {
      const bool interactive = &in == &std::cin && ::isatty(STDIN_FILENO) != 0;
      return cmd_repl(config, interactive, io);
    }
    if (eval->parsed()) {
      fallback = kExitEval;
      eval_args.task = retriever->parsed() ? "retriever" : (reader->parsed() ? "reader" : "translation");
      return cmd_eval(config, eval_args, io);
    }
  } catch (...) {
    const int code = report(std::current_exception(), err, fallback);
    // gateway and parse failures during evaluation are evaluation failures
    if (fallback == kExitEval && code != kExitUsage) return kExitEval;
    return code;
  }
  if (!print_config) {
    out << app.help();
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace neuroquery
