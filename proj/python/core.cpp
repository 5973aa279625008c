#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <string>

#include "neuroquery/bm25.hpp"
#include "neuroquery/error.hpp"
#include "neuroquery/metrics.hpp"
#include "neuroquery/nql.hpp"
#include "neuroquery/session.hpp"
#include "neuroquery/text.hpp"

namespace py = pybind11;
using namespace neuroquery;

namespace {

py::object to_python(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::integer:
      return py::int_(t.as_integer());
    case Term::Kind::real:
      return py::float_(t.as_real());
    case Term::Kind::text:
    case Term::Kind::identifier:
      return py::str(t.str());
    case Term::Kind::variable:
      return py::str("?" + t.str());
    case Term::Kind::tuple: {
      py::tuple out(t.arity());
      for (std::size_t i = 0; i < t.arity(); ++i) out[i] = to_python(t.elements()[i]);
      return out;
    }
  }
  return py::none();
}

py::dict to_python(const Frame& frame) {
  py::dict out;
  for (const auto& [name, value] : frame.bindings()) out[py::str("?" + name)] = to_python(value);
  return out;
}

py::list to_python(const std::vector<Frame>& frames) {
  py::list out;
  for (const auto& f : frames) out.append(to_python(f));
  return out;
}

std::unique_ptr<Session> make_session(const std::string& backend, const std::string& endpoint, int timeout_ms,
                                      std::size_t max_rule_depth, bool keep_unanswered, double k1, double b,
                                      double delta) {
  GatewayConfig gateway;
  gateway.backend = parse_backend(backend);
  gateway.endpoint = endpoint;
  gateway.timeout_ms = timeout_ms;
  gateway.validate();
  EngineOptions options;
  options.max_rule_depth = max_rule_depth;
  options.keep_unanswered = keep_unanswered;
  options.bm25 = {k1, b, delta};
  options.bm25.validate();
  return std::make_unique<Session>(options, make_gateway(gateway));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Neuro-symbolic query engine";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<QueryError>(m, "QueryError", error);
  py::register_exception<GatewayUnavailable>(m, "GatewayUnavailable", error);
  py::register_exception<GatewayProtocolError>(m, "GatewayProtocolError", error);
  py::register_exception<TranslationUnparsable>(m, "TranslationUnparsable", error);

  m.def(
      "canonicalize", [](const std::string& source) { return render(parse_program(source)); }, py::arg("source"),
      "Parse a program and render it in canonical form.");
  m.def("from_python_syntax", [](const std::string& source) { return from_python_syntax(source); },
        py::arg("source"), "Rewrite the host-language (Python-style) syntax into the query language.");
  m.def(
      "parse_term", [](const std::string& source) { return to_python(parse_term(source)); }, py::arg("source"));

  m.def("porter_stem", [](const std::string& word) { return porter_stem(word); }, py::arg("word"));
  m.def("tokenize", [](const std::string& text) { return tokenize_stem(text); }, py::arg("text"));

  m.def("normalize_answer", [](const std::string& text) { return normalize_answer(text); }, py::arg("text"));
  m.def(
      "em_score", [](const std::string& p, const std::vector<std::string>& golds) { return em_score(p, golds); },
      py::arg("prediction"), py::arg("golds"));
  m.def(
      "f1_score", [](const std::string& p, const std::vector<std::string>& golds) { return f1_score(p, golds); },
      py::arg("prediction"), py::arg("golds"));
  m.def(
      "bleu",
      [](const std::vector<std::string>& candidates, const std::vector<std::string>& references, std::size_t max_n,
         bool smooth) {
        const auto r = bleu_corpus(candidates, references, {max_n, smooth});
        py::dict out;
        out["bleu"] = r.bleu;
        out["brevity_penalty"] = r.brevity_penalty;
        out["precisions"] = r.precisions;
        out["matches"] = r.matches;
        out["totals"] = r.totals;
        return out;
      },
      py::arg("candidates"), py::arg("references"), py::arg("max_n") = 4, py::arg("smooth") = false);

  py::class_<Bm25Index>(m, "Bm25Index")
      .def(py::init([](const std::vector<std::pair<std::string, std::string>>& docs, double k1, double b,
                       double delta) {
             Bm25Params params{k1, b, delta};
             params.validate();
             return Bm25Index::build(docs, params);
           }),
           py::arg("docs"), py::arg("k1") = 1.5, py::arg("b") = 0.75, py::arg("delta") = 1.0)
      .def(
          "top_k",
          [](const Bm25Index& index, const std::string& query, std::size_t k) {
            std::vector<std::pair<std::string, double>> out;
            for (const auto& hit : index.top_k(query, k)) out.emplace_back(hit.doc_key, hit.score);
            return out;
          },
          py::arg("query"), py::arg("k"))
      .def(
          "score",
          [](const Bm25Index& index, const std::string& query, const std::string& key) {
            return index.score(tokenize_stem(query), key);
          },
          py::arg("query"), py::arg("doc_key"))
      .def("__len__", &Bm25Index::size);

  py::class_<Session>(m, "Session")
      .def(py::init(&make_session), py::arg("backend") = "fallback", py::arg("endpoint") = "",
           py::arg("timeout_ms") = 30000, py::arg("max_rule_depth") = 32, py::arg("keep_unanswered") = false,
           py::arg("k1") = 1.5, py::arg("b") = 0.75, py::arg("delta") = 1.0)
      .def(
          "load_csv",
          [](Session& s, const std::string& path, const std::string& kind) {
            return s.kb().load_csv(path, parse_csv_kind(kind));
          },
          py::arg("path"), py::arg("kind"), "Load a CSV file; returns the number of facts added.")
      .def(
          "execute",
          [](Session& s, const std::string& source) {
            py::list out;
            for (const auto& result : s.execute(source)) out.append(to_python(result.frames));
            return out;
          },
          py::arg("source"), "Run a program; returns one list of frames per search.")
      .def(
          "search",
          [](Session& s, const std::string& source) {
            const auto results = s.execute(source);
            return results.empty() ? py::list() : to_python(results.back().frames);
          },
          py::arg("source"), "Run a program and return the frames of its last search.")
      .def(
          "answer",
          [](Session& s, const std::string& question) {
            const auto r = s.answer(question);
            py::dict out;
            out["query"] = render(r.program);
            out["frames"] = r.results.empty() ? py::list() : to_python(r.results.back().frames);
            return out;
          },
          py::arg("question"))
      .def_property_readonly("fact_count", [](const Session& s) { return s.kb().size(); })
      .def_property_readonly("rule_count", [](const Session& s) { return s.rules().size(); });
}
