#pragma once

#include <iosfwd>

namespace neuroquery {

/// Exit codes of the command-line frontend.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,    // bad arguments, config or unreadable files
  kExitParse = 2,    // query does not parse, untranslatable question
  kExitQuery = 3,    // runtime query error
  kExitGateway = 4,  // gateway unavailable
  kExitEval = 5,     // evaluation failure
};

/// Runs the `neuroquery` command line with explicit streams.
///
/// Commands: load, query, answer, repl, eval {retriever|reader|translation}.
/// The REPL shows prompts only when `in` is an interactive terminal.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace neuroquery
