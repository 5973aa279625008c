#include "neuroquery/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "neuroquery/error.hpp"

namespace neuroquery {

namespace {

bool is_ascii_punct(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (is_space(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double mean(const std::vector<std::pair<std::string, double>>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [qid, v] : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double f1_tokens(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty()) return pred.empty() && gold.empty() ? 1.0 : 0.0;
  std::unordered_map<std::string, long> counts;
  for (const auto& t : gold) ++counts[t];
  long same = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++same;
    }
  }
  if (same == 0) return 0.0;
  // harmonic mean of same/|pred| and same/|gold|
  return 2.0 * static_cast<double>(same) / static_cast<double>(pred.size() + gold.size());
}

using Ngrams = std::map<std::vector<std::string>, std::size_t>;

Ngrams count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  Ngrams out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++out[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string lowered;
  lowered.reserve(text.size());
  for (char c : text) {
    if (is_ascii_punct(c)) continue;
    lowered += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  std::string out;
  for (const auto& word : split_ws(lowered)) {
    if (word == "a" || word == "an" || word == "the") continue;
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

std::vector<std::string> answer_tokens(std::string_view text) { return split_ws(normalize_answer(text)); }

double em_score(std::string_view prediction, const std::vector<std::string>& golds) {
  const std::string pred = normalize_answer(prediction);
  if (golds.empty()) return pred.empty() ? 1.0 : 0.0;
  for (const auto& g : golds)
    if (normalize_answer(g) == pred) return 1.0;
  return 0.0;
}

double f1_score(std::string_view prediction, const std::vector<std::string>& golds) {
  const auto pred = answer_tokens(prediction);
  if (golds.empty()) return pred.empty() ? 1.0 : 0.0;
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, f1_tokens(pred, answer_tokens(g)));
  return best;
}

std::vector<std::string> bleu_tokenize(std::string_view text) {
  std::string spaced;
  spaced.reserve(text.size() * 2);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const bool two_char = i + 1 < text.size() && text[i + 1] == '=' && (c == '=' || c == '!' || c == '<' || c == '>');
    if (two_char) {
      spaced += ' ';
      spaced += c;
      spaced += '=';
      spaced += ' ';
      ++i;
    } else if (is_ascii_punct(c) && c != '_') {
      spaced += ' ';
      spaced += c;
      spaced += ' ';
    } else {
      spaced += c;
    }
  }
  return split_ws(spaced);
}

BleuReport bleu_corpus(const std::vector<std::string>& candidates, const std::vector<std::string>& references,
                       const BleuOptions& options) {
  if (candidates.size() != references.size())
    throw LengthMismatch("bleu: " + std::to_string(candidates.size()) + " candidates but " +
                         std::to_string(references.size()) + " references");
  if (candidates.empty()) throw LengthMismatch("bleu: empty corpus");
  if (options.max_n == 0) throw ConfigError("bleu: max_n must be >= 1");

  BleuReport r;
  r.matches.assign(options.max_n, 0);
  r.totals.assign(options.max_n, 0);
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const auto cand = bleu_tokenize(candidates[s]);
    const auto ref = bleu_tokenize(references[s]);
    r.candidate_length += cand.size();
    r.reference_length += ref.size();
    for (std::size_t n = 1; n <= options.max_n; ++n) {
      const auto cand_counts = count_ngrams(cand, n);
      const auto ref_counts = count_ngrams(ref, n);
      for (const auto& [gram, count] : cand_counts) {
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) r.matches[n - 1] += std::min(count, it->second);
      }
      if (cand.size() >= n) r.totals[n - 1] += cand.size() - n + 1;
    }
  }

  r.precisions.assign(options.max_n, 0.0);
  double log_sum = 0.0;
  std::size_t orders = 0;
  bool zero = false;
  for (std::size_t n = 1; n <= options.max_n; ++n) {
    double m = static_cast<double>(r.matches[n - 1]);
    double t = static_cast<double>(r.totals[n - 1]);
    if (r.totals[n - 1] == 0) continue;
    if (options.smooth && n >= 2) {
      m += 1.0;
      t += 1.0;
    }
    r.precisions[n - 1] = m / t;
    ++orders;
    if (m == 0) {
      zero = true;
    } else {
      log_sum += std::log(m / t);
    }
  }

  if (r.candidate_length == 0) {
    r.brevity_penalty = r.reference_length == 0 ? 1.0 : 0.0;
    r.bleu = r.reference_length == 0 ? 1.0 : 0.0;
    return r;
  }
  r.brevity_penalty = std::exp(std::min(
      0.0, 1.0 - static_cast<double>(r.reference_length) / static_cast<double>(r.candidate_length)));
  r.bleu = zero || orders == 0 ? 0.0 : r.brevity_penalty * std::exp(log_sum / static_cast<double>(orders));
  return r;
}

MetricReport recall_at_k(const std::vector<QAExample>& examples, const std::map<std::string, RetrievalRun>& runs,
                         std::size_t k) {
  MetricReport report;
  report.metric = "recall";
  report.k = k;
  for (const auto& ex : examples) {
    if (ex.gold_review_ids.empty()) {
      ++report.excluded;
      continue;
    }
    auto it = runs.find(ex.qid);
    if (it == runs.end()) throw MissingRun(ex.qid);
    const std::set<std::string> gold(ex.gold_review_ids.begin(), ex.gold_review_ids.end());
    const auto& ids = it->second.doc_ids;
    const std::size_t n = std::min(k, ids.size());
    const bool found = std::any_of(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n),
                                   [&](const std::string& id) { return gold.count(id) > 0; });
    report.per_example.emplace_back(ex.qid, found ? 1.0 : 0.0);
  }
  report.value = mean(report.per_example);
  return report;
}

std::pair<MetricReport, MetricReport> reader_scores(const std::vector<QAExample>& examples,
                                                    const std::map<std::string, std::vector<std::string>>& predictions,
                                                    std::size_t k) {
  MetricReport em, f1;
  em.metric = "em";
  f1.metric = "f1";
  em.k = f1.k = k;
  for (const auto& ex : examples) {
    auto it = predictions.find(ex.qid);
    if (it == predictions.end()) throw MissingRun(ex.qid);
    const auto& preds = it->second;
    const std::size_t n = std::min(k, preds.size());
    double best_em = 0.0, best_f1 = 0.0;
    if (ex.gold_answers.empty()) {
      best_em = best_f1 = n == 0 ? 1.0 : 0.0;
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        best_em = std::max(best_em, em_score(preds[i], ex.gold_answers));
        best_f1 = std::max(best_f1, f1_score(preds[i], ex.gold_answers));
      }
    }
    em.per_example.emplace_back(ex.qid, best_em);
    f1.per_example.emplace_back(ex.qid, best_f1);
  }
  em.value = mean(em.per_example);
  f1.value = mean(f1.per_example);
  return {std::move(em), std::move(f1)};
}

}  // namespace neuroquery
