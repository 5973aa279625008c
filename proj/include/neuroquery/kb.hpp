#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "neuroquery/term.hpp"

namespace neuroquery {

/// Row schema of an ingested CSV file.
enum class CsvKind { properties, reviews, questions };

CsvKind parse_csv_kind(std::string_view name);
const char* to_string(CsvKind kind) noexcept;

/// One row of an ingested file, already converted to a fact.
struct CsvFact {
  Term fact;
  std::size_t line;  // 1-based line where the row starts
};

/// Parses `<subject>,<predicate>,<value>` rows (no header, RFC 4180 quoting).
///
/// Subjects are identifiers; free-text cells (`text`, `query`, `answer` rows of
/// reviews and questions files) are kept verbatim as text; other values follow
/// integer, float, identifier, text precedence. Throws MalformedRow.
std::vector<CsvFact> read_csv_facts(std::istream& in, CsvKind kind);
std::vector<CsvFact> read_csv_facts(const std::filesystem::path& path, CsvKind kind);

/// Insertion-ordered, duplicate-free store of ground tuples.
///
/// Facts are indexed by (arity, first element) and (arity, second element).
/// Reads may run concurrently; writers need exclusive access.
class KnowledgeBase {
 public:
  /// Adds a ground tuple. Returns false when an equal fact is already present.
  bool assert_fact(Term fact);

  /// Loads a CSV file; returns the number of facts added (duplicates are skipped).
  std::size_t load_csv(const std::filesystem::path& path, CsvKind kind);
  std::size_t load_csv(std::istream& in, CsvKind kind);

  /// Facts unifying with `pattern` under `frame`, in insertion order.
  std::vector<Term> facts_matching(const Term& pattern, const Frame& frame) const;

  /// One extended frame per fact unifying with `pattern` under `frame`, in insertion order.
  std::vector<Frame> match(const Term& pattern, const Frame& frame) const;

  /// Same result as facts_matching, computed without the index.
  std::vector<Term> facts_matching_scan(const Term& pattern, const Frame& frame) const;

  std::span<const Term> facts() const noexcept { return facts_; }
  std::size_t size() const noexcept { return facts_.size(); }
  bool empty() const noexcept { return facts_.empty(); }

 private:
  struct IndexKey {
    std::size_t arity;
    Term term;
    bool operator==(const IndexKey& other) const { return arity == other.arity && term == other.term; }
  };
  struct IndexKeyHash {
    std::size_t operator()(const IndexKey& k) const noexcept { return k.term.hash() * 31 + k.arity; }
  };
  using Index = std::unordered_map<IndexKey, std::vector<std::size_t>, IndexKeyHash>;

  // Positions worth testing for `pattern`; nullptr means every fact.
  const std::vector<std::size_t>* candidates(const Term& pattern, const Frame& frame, bool& none) const;

  template <typename Fn>
  void for_each_match(const Term& pattern, const Frame& frame, Fn&& fn) const;

  std::vector<Term> facts_;
  std::unordered_set<Term, TermHash> present_;
  Index by_first_;
  Index by_second_;
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_arity_;
};

}  // namespace neuroquery
