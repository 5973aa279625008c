#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "neuroquery/hit.hpp"

namespace neuroquery {

/// A document handed to the retriever or reader.
struct Document {
  std::string id;
  std::string text;
};

/// An extracted answer; `start`/`end` are code point offsets into the document text.
struct AnswerSpan {
  std::string doc_key;
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
  double score = 0.0;
};

/// Sorts by score descending, then doc_key, then start.
void sort_spans(std::vector<AnswerSpan>& spans);

enum class Backend { fallback, remote };

Backend parse_backend(std::string_view name);
const char* to_string(Backend backend) noexcept;

struct GatewayConfig {
  Backend backend = Backend::fallback;
  std::string endpoint;  // http://host:port[/prefix], remote only
  int timeout_ms = 30000;
  std::size_t batch_size = 16;
  std::size_t max_in_flight = 4;

  /// Throws ConfigError (remote without endpoint, non-positive sizes).
  void validate() const;
};

/// Dense retrieval, span extraction and question translation.
class Gateway {
 public:
  virtual ~Gateway() = default;

  /// At most k documents ranked by similarity to `question`.
  virtual std::vector<ScoredHit> retrieve(std::string_view question, const std::vector<Document>& docs,
                                          std::size_t k) = 0;

  /// At most k answer spans across all documents, best first.
  virtual std::vector<AnswerSpan> extract(std::string_view question, const std::vector<Document>& docs,
                                          std::size_t k) = 0;

  /// Candidate query source for a natural-language question.
  virtual std::string translate(std::string_view question) = 0;

  virtual Backend backend() const noexcept = 0;
};

/// Hermetic scorers: hashed bag-of-words cosine for retrieval and a best
/// overlapping token window for extraction. Translation is unavailable.
class FallbackGateway final : public Gateway {
 public:
  static constexpr std::size_t kDimensions = 1024;
  static constexpr std::size_t kMaxSpanTokens = 15;

  /// L2-normalised term-frequency vector of stemmed tokens hashed into kDimensions buckets.
  static std::vector<double> embed(std::string_view text);

  std::vector<ScoredHit> retrieve(std::string_view question, const std::vector<Document>& docs,
                                  std::size_t k) override;
  std::vector<AnswerSpan> extract(std::string_view question, const std::vector<Document>& docs,
                                  std::size_t k) override;
  std::string translate(std::string_view question) override;
  Backend backend() const noexcept override { return Backend::fallback; }
};

/// Client of the inference sidecar HTTP protocol.
///
///     POST /v1/embed     {"texts": [...], "kind": "query"|"passage"} -> {"vectors": [[...]]}
///     POST /v1/extract   {"question", "contexts": [{"id", "text"}], "top_k"} -> {"answers": [...]}
///     POST /v1/translate {"question"} -> {"query"}
///
/// Requests are batched by `batch_size`, with up to `max_in_flight` running at once.
/// Connection failures are retried once and then raise GatewayUnavailable, as do
/// 404/502/503/504 responses; other failures raise GatewayProtocolError.
class RemoteGateway final : public Gateway {
 public:
  explicit RemoteGateway(GatewayConfig config);

  std::vector<ScoredHit> retrieve(std::string_view question, const std::vector<Document>& docs,
                                  std::size_t k) override;
  std::vector<AnswerSpan> extract(std::string_view question, const std::vector<Document>& docs,
                                  std::size_t k) override;
  std::string translate(std::string_view question) override;
  Backend backend() const noexcept override { return Backend::remote; }

 private:
  std::string post(const std::string& path, const std::string& body) const;
  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts, const char* kind) const;

  GatewayConfig config_;
  std::string origin_;  // scheme://host:port
  std::string prefix_;  // path prefix without trailing slash
};

std::unique_ptr<Gateway> make_gateway(const GatewayConfig& config);

}  // namespace neuroquery
