#include "neuroquery/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <regex>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "neuroquery/error.hpp"
#include "neuroquery/text.hpp"

namespace neuroquery {

using nlohmann::json;

void sort_spans(std::vector<AnswerSpan>& spans) {
  std::stable_sort(spans.begin(), spans.end(), [](const AnswerSpan& a, const AnswerSpan& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.doc_key != b.doc_key) return a.doc_key < b.doc_key;
    return a.start < b.start;
  });
}

Backend parse_backend(std::string_view name) {
  if (name == "fallback") return Backend::fallback;
  if (name == "remote") return Backend::remote;
  throw ConfigError("unknown gateway backend '" + std::string(name) + "' (expected fallback or remote)");
}

const char* to_string(Backend backend) noexcept { return backend == Backend::remote ? "remote" : "fallback"; }

void GatewayConfig::validate() const {
  if (backend == Backend::remote && endpoint.empty()) throw ConfigError("remote gateway requires an endpoint");
  if (timeout_ms <= 0) throw ConfigError("gateway timeout must be positive");
  if (batch_size == 0) throw ConfigError("gateway batch size must be positive");
  if (max_in_flight == 0) throw ConfigError("gateway max in-flight requests must be positive");
}

// ---- fallback -------------------------------------------------------------

std::vector<double> FallbackGateway::embed(std::string_view text) {
  std::vector<double> v(kDimensions, 0.0);
  for (const auto& token : tokenize_stem(text)) v[fnv1a64(token) % kDimensions] += 1.0;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

std::vector<ScoredHit> FallbackGateway::retrieve(std::string_view question, const std::vector<Document>& docs,
                                                 std::size_t k) {
  const auto q = embed(question);
  std::vector<ScoredHit> hits;
  hits.reserve(docs.size());
  for (const auto& doc : docs) {
    const auto d = embed(doc.text);
    double dot = 0.0;
    for (std::size_t i = 0; i < kDimensions; ++i) dot += q[i] * d[i];
    hits.push_back({doc.id, dot});
  }
  sort_hits(hits);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<AnswerSpan> FallbackGateway::extract(std::string_view question, const std::vector<Document>& docs,
                                                 std::size_t k) {
  std::unordered_set<std::string> wanted;
  for (auto& t : tokenize_stem(question)) wanted.insert(std::move(t));
  std::vector<AnswerSpan> spans;
  if (wanted.empty()) return spans;

  for (const auto& doc : docs) {
    const auto tokens = tokenize_with_offsets(doc.text);
    std::vector<bool> hit(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) hit[i] = wanted.count(tokens[i].token) > 0;

    std::size_t best_count = 0, best_i = 0, best_j = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!hit[i]) continue;
      std::size_t count = 0;
      for (std::size_t j = i; j < tokens.size() && j - i < kMaxSpanTokens; ++j) {
        if (!hit[j]) continue;
        ++count;
        const bool better = count > best_count || (count == best_count && j - i < best_j - best_i);
        if (better) {
          best_count = count;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (best_count == 0) continue;

    std::set<std::string> covered;
    for (std::size_t t = best_i; t <= best_j; ++t)
      if (hit[t]) covered.insert(tokens[t].token);
    AnswerSpan span;
    span.doc_key = doc.id;
    span.start = utf8_char_index(doc.text, tokens[best_i].begin);
    span.end = utf8_char_index(doc.text, tokens[best_j].end);
    span.text = doc.text.substr(tokens[best_i].begin, tokens[best_j].end - tokens[best_i].begin);
    span.score = static_cast<double>(covered.size()) / static_cast<double>(wanted.size());
    spans.push_back(std::move(span));
  }
  sort_spans(spans);
  if (spans.size() > k) spans.resize(k);
  return spans;
}

std::string FallbackGateway::translate(std::string_view) {
  throw GatewayUnavailable("question translation needs the remote gateway backend");
}

// ---- remote ---------------------------------------------------------------

namespace {

std::string encode(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

json parse_body(const std::string& body, const std::string& path) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw GatewayProtocolError(path + ": malformed JSON response: " + e.what());
  }
}

template <typename T>
T field(const json& obj, const char* name, const std::string& path) {
  if (!obj.is_object() || !obj.contains(name)) throw GatewayProtocolError(path + ": response lacks '" + name + "'");
  try {
    return obj.at(name).get<T>();
  } catch (const json::exception& e) {
    throw GatewayProtocolError(path + ": bad '" + name + "' field: " + e.what());
  }
}

// Runs fn(0..n-1) with at most `limit` calls in flight; results keep their index.
template <typename R, typename Fn>
std::vector<R> run_bounded(std::size_t n, std::size_t limit, Fn fn) {
  std::vector<R> out(n);
  for (std::size_t first = 0; first < n; first += limit) {
    const std::size_t last = std::min(n, first + limit);
    std::vector<std::future<R>> wave;
    for (std::size_t i = first; i < last; ++i) wave.push_back(std::async(std::launch::async, fn, i));
    for (std::size_t i = first; i < last; ++i) out[i] = wave[i - first].get();
  }
  return out;
}

}  // namespace

RemoteGateway::RemoteGateway(GatewayConfig config) : config_(std::move(config)) {
  config_.validate();
  static const std::regex url_re(R"(^(http://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, url_re))
    throw ConfigError("gateway endpoint must look like http://host:port[/prefix], got '" + config_.endpoint + "'");
  origin_ = m[1].str();
  prefix_ = m[2].str();
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

std::string RemoteGateway::post(const std::string& path, const std::string& body) const {
  const std::string target = prefix_ + path;
  httplib::Client client(origin_);
  const auto sec = config_.timeout_ms / 1000;
  const auto usec = (config_.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  auto result = client.Post(target, body, "application/json");
  if (!result) result = client.Post(target, body, "application/json");
  if (!result)
    throw GatewayUnavailable(origin_ + target + ": " + httplib::to_string(result.error()));

  const int status = result->status;
  if (status >= 200 && status < 300) return result->body;

  std::string detail;
  try {
    const auto err = json::parse(result->body);
    if (err.is_object() && err.contains("error") && err["error"].is_string()) detail = err["error"].get<std::string>();
  } catch (const json::exception&) {
  }
  const std::string message =
      origin_ + target + ": HTTP " + std::to_string(status) + (detail.empty() ? "" : " (" + detail + ")");
  if (status == 404 || status == 502 || status == 503 || status == 504) throw GatewayUnavailable(message);
  throw GatewayProtocolError(message);
}

std::vector<std::vector<double>> RemoteGateway::embed(const std::vector<std::string>& texts, const char* kind) const {
  const std::size_t batches = (texts.size() + config_.batch_size - 1) / config_.batch_size;
  auto parts = run_bounded<std::vector<std::vector<double>>>(batches, config_.max_in_flight, [&](std::size_t b) {
    const auto first = texts.begin() + static_cast<std::ptrdiff_t>(b * config_.batch_size);
    const auto last = texts.begin() + static_cast<std::ptrdiff_t>(std::min(texts.size(), (b + 1) * config_.batch_size));
    const json request = {{"texts", std::vector<std::string>(first, last)}, {"kind", kind}};
    const auto reply = parse_body(post("/v1/embed", encode(request)), "/v1/embed");
    auto vectors = field<std::vector<std::vector<double>>>(reply, "vectors", "/v1/embed");
    if (vectors.size() != static_cast<std::size_t>(last - first))
      throw GatewayProtocolError("/v1/embed: expected " + std::to_string(last - first) + " vectors, got " +
                                 std::to_string(vectors.size()));
    return vectors;
  });
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (auto& part : parts)
    for (auto& v : part) out.push_back(std::move(v));
  return out;
}

std::vector<ScoredHit> RemoteGateway::retrieve(std::string_view question, const std::vector<Document>& docs,
                                               std::size_t k) {
  if (docs.empty()) return {};
  const auto query = embed({std::string(question)}, "query");
  std::vector<std::string> texts;
  texts.reserve(docs.size());
  for (const auto& d : docs) texts.push_back(d.text);
  const auto passages = embed(texts, "passage");

  const auto& q = query.front();
  std::vector<ScoredHit> hits;
  hits.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (passages[i].size() != q.size())
      throw GatewayProtocolError("/v1/embed: passage vector dimension " + std::to_string(passages[i].size()) +
                                 " differs from query dimension " + std::to_string(q.size()));
    double dot = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) dot += q[j] * passages[i][j];
    hits.push_back({docs[i].id, dot});
  }
  sort_hits(hits);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<AnswerSpan> RemoteGateway::extract(std::string_view question, const std::vector<Document>& docs,
                                               std::size_t k) {
  if (docs.empty()) return {};
  std::unordered_map<std::string, const Document*> by_id;
  for (const auto& d : docs) by_id.emplace(d.id, &d);

  const std::size_t batches = (docs.size() + config_.batch_size - 1) / config_.batch_size;
  auto parts = run_bounded<std::vector<AnswerSpan>>(batches, config_.max_in_flight, [&](std::size_t b) {
    const std::size_t first = b * config_.batch_size;
    const std::size_t last = std::min(docs.size(), first + config_.batch_size);
    json contexts = json::array();
    for (std::size_t i = first; i < last; ++i) contexts.push_back({{"id", docs[i].id}, {"text", docs[i].text}});
    const json request = {{"question", std::string(question)}, {"contexts", contexts}, {"top_k", k}};
    const auto reply = parse_body(post("/v1/extract", encode(request)), "/v1/extract");
    const auto answers = field<json>(reply, "answers", "/v1/extract");
    if (!answers.is_array()) throw GatewayProtocolError("/v1/extract: 'answers' is not an array");

    std::vector<AnswerSpan> spans;
    for (const auto& a : answers) {
      AnswerSpan span;
      span.doc_key = field<std::string>(a, "id", "/v1/extract");
      span.text = field<std::string>(a, "text", "/v1/extract");
      const auto start = field<std::int64_t>(a, "start", "/v1/extract");
      const auto end = field<std::int64_t>(a, "end", "/v1/extract");
      span.score = field<double>(a, "score", "/v1/extract");
      auto it = by_id.find(span.doc_key);
      if (it == by_id.end()) throw GatewayProtocolError("/v1/extract: answer for unknown context id " + span.doc_key);
      const auto& text = it->second->text;
      if (start < 0 || end <= start || static_cast<std::size_t>(end) > utf8_length(text))
        throw GatewayProtocolError("/v1/extract: offsets [" + std::to_string(start) + ", " + std::to_string(end) +
                                   ") out of range for context " + span.doc_key);
      span.start = static_cast<std::size_t>(start);
      span.end = static_cast<std::size_t>(end);
      if (utf8_slice(text, span.start, span.end) != span.text)
        throw GatewayProtocolError("/v1/extract: answer text does not match context " + span.doc_key + " at [" +
                                   std::to_string(start) + ", " + std::to_string(end) + ")");
      spans.push_back(std::move(span));
    }
    return spans;
  });

  std::vector<AnswerSpan> out;
  for (auto& part : parts)
    for (auto& s : part) out.push_back(std::move(s));
  sort_spans(out);
  if (out.size() > k) out.resize(k);
  return out;
}

std::string RemoteGateway::translate(std::string_view question) {
  const json request = {{"question", std::string(question)}};
  const auto reply = parse_body(post("/v1/translate", encode(request)), "/v1/translate");
  return field<std::string>(reply, "query", "/v1/translate");
}

std::unique_ptr<Gateway> make_gateway(const GatewayConfig& config) {
  config.validate();
  if (config.backend == Backend::remote) return std::make_unique<RemoteGateway>(config);
  return std::make_unique<FallbackGateway>();
}

}  // namespace neuroquery
