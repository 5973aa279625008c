#include "neuroquery/kb.hpp"

#include <fstream>
#include <istream>
#include <optional>

#include "neuroquery/error.hpp"
#include "neuroquery/unify.hpp"

namespace neuroquery {

namespace {

struct CsvRecord {
  std::vector<std::string> cells;
  std::vector<bool> quoted;
  std::size_t line = 0;
};

// Reads one RFC 4180 record; quoted cells may span lines.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  std::optional<CsvRecord> next() {
    CsvRecord rec;
    std::string cell;
    bool quoted = false;
    bool in_quotes = false;
    bool any = false;
    rec.line = line_;
    int c;
    while ((c = in_.get()) != std::char_traits<char>::eof()) {
      any = true;
      if (first_) {
        first_ = false;
        // UTF-8 byte order mark
        if (c == 0xEF && in_.peek() == 0xBB) {
          in_.get();
          if (in_.peek() == 0xBF) in_.get();
          continue;
        }
      }
      const char ch = static_cast<char>(c);
      if (in_quotes) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            cell += '"';
          } else {
            in_quotes = false;
          }
        } else {
          if (ch == '\n') ++line_;
          cell += ch;
        }
        continue;
      }
      if (ch == '"' && !quoted && trim(cell).empty()) {
        cell.clear();
        quoted = true;
        in_quotes = true;
      } else if (ch == ',') {
        push(rec, cell, quoted);
      } else if (ch == '\n') {
        ++line_;
        push(rec, cell, quoted);
        return rec;
      } else if (ch != '\r') {
        cell += ch;
      }
    }
    if (in_quotes) throw MalformedRow(rec.line, "unterminated quoted field");
    if (!any) return std::nullopt;
    push(rec, cell, quoted);
    return rec;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

 private:
  static void push(CsvRecord& rec, std::string& cell, bool& quoted) {
    rec.cells.push_back(quoted ? cell : trim(cell));
    rec.quoted.push_back(quoted);
    cell.clear();
    quoted = false;
  }

  std::istream& in_;
  std::size_t line_ = 1;
  bool first_ = true;
};

bool is_blank(const CsvRecord& rec) { return rec.cells.size() == 1 && rec.cells[0].empty(); }

bool is_free_text(CsvKind kind, const std::string& predicate) {
  switch (kind) {
    case CsvKind::reviews:
      return predicate == "text";
    case CsvKind::questions:
      return predicate == "text" || predicate == "query" || predicate == "answer";
    default:
      return false;
  }
}

void check_predicate(CsvKind kind, const std::string& predicate, std::size_t line) {
  if (kind == CsvKind::reviews && predicate != "review" && predicate != "text")
    throw MalformedRow(line, "reviews rows must have predicate 'review' or 'text', got '" + predicate + "'");
  if (kind == CsvKind::questions && predicate != "question" && predicate != "text" && predicate != "query" &&
      predicate != "answer" && predicate != "gold_review")
    throw MalformedRow(line, "questions rows must have predicate question/text/query/answer/gold_review, got '" +
                                 predicate + "'");
}

}  // namespace

CsvKind parse_csv_kind(std::string_view name) {
  if (name == "properties") return CsvKind::properties;
  if (name == "reviews") return CsvKind::reviews;
  if (name == "questions") return CsvKind::questions;
  throw Error("unknown csv kind '" + std::string(name) + "' (expected properties, reviews or questions)");
}

const char* to_string(CsvKind kind) noexcept {
  switch (kind) {
    case CsvKind::properties:
      return "properties";
    case CsvKind::reviews:
      return "reviews";
    case CsvKind::questions:
      return "questions";
  }
  return "?";
}

std::vector<CsvFact> read_csv_facts(std::istream& in, CsvKind kind) {
  std::vector<CsvFact> out;
  CsvReader reader(in);
  while (auto rec = reader.next()) {
    if (is_blank(*rec)) continue;
    if (rec->cells.size() != 3)
      throw MalformedRow(rec->line, "expected 3 columns, found " + std::to_string(rec->cells.size()));
    const std::string& subject = rec->cells[0];
    const std::string& predicate = rec->cells[1];
    const std::string& value = rec->cells[2];
    if (subject.empty()) throw MalformedRow(rec->line, "empty subject");
    if (!is_identifier_token(predicate)) throw MalformedRow(rec->line, "invalid predicate '" + predicate + "'");
    check_predicate(kind, predicate, rec->line);

    Term s = is_identifier_token(subject) ? Term::identifier(subject) : Term::text(subject);
    Term p = Term::identifier(predicate);
    Term o = is_free_text(kind, predicate) ? Term::text(value) : Term::parse_atom(value);
    if (kind == CsvKind::reviews && predicate == "review" && !is_identifier_token(value))
      throw MalformedRow(rec->line, "review id '" + value + "' is not an identifier");
    out.push_back({Term::tuple({std::move(s), std::move(p), std::move(o)}), rec->line});
  }
  return out;
}

std::vector<CsvFact> read_csv_facts(const std::filesystem::path& path, CsvKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_csv_facts(in, kind);
  } catch (Error& e) {
    e.add_context(path.string());
    throw;
  }
}

bool KnowledgeBase::assert_fact(Term fact) {
  if (!fact.is_tuple() || fact.arity() == 0) throw NonGroundFact("fact must be a non-empty tuple: " + fact.plain());
  if (!fact.is_ground()) throw NonGroundFact("fact contains variables: " + fact.plain());
  if (!present_.insert(fact).second) return false;
  const std::size_t pos = facts_.size();
  const std::size_t arity = fact.arity();
  by_first_[IndexKey{arity, fact.elements()[0]}].push_back(pos);
  if (arity >= 2) by_second_[IndexKey{arity, fact.elements()[1]}].push_back(pos);
  by_arity_[arity].push_back(pos);
  facts_.push_back(std::move(fact));
  return true;
}

std::size_t KnowledgeBase::load_csv(const std::filesystem::path& path, CsvKind kind) {
  std::size_t added = 0;
  for (auto& row : read_csv_facts(path, kind)) added += assert_fact(std::move(row.fact)) ? 1 : 0;
  return added;
}

std::size_t KnowledgeBase::load_csv(std::istream& in, CsvKind kind) {
  std::size_t added = 0;
  for (auto& row : read_csv_facts(in, kind)) added += assert_fact(std::move(row.fact)) ? 1 : 0;
  return added;
}

const std::vector<std::size_t>* KnowledgeBase::candidates(const Term& pattern, const Frame& frame,
                                                          bool& none) const {
  none = false;
  if (!pattern.is_tuple()) return nullptr;
  static const std::vector<std::size_t> empty;
  const std::size_t arity = pattern.arity();
  const std::vector<std::size_t>* best = nullptr;
  auto consider = [&](const Index& index, const Term& element) {
    const Term key = substitute(element, frame);
    if (!key.is_ground()) return;
    auto it = index.find(IndexKey{arity, key});
    const auto* list = it == index.end() ? &empty : &it->second;
    if (best == nullptr || list->size() < best->size()) best = list;
  };
  consider(by_first_, pattern.elements()[0]);
  if (arity >= 2) consider(by_second_, pattern.elements()[1]);
  if (best == nullptr) {
    auto it = by_arity_.find(arity);
    best = it == by_arity_.end() ? &empty : &it->second;
  }
  none = best->empty();
  return best;
}

template <typename Fn>
void KnowledgeBase::for_each_match(const Term& pattern, const Frame& frame, Fn&& fn) const {
  bool none = false;
  const auto* positions = candidates(pattern, frame, none);
  if (none) return;
  if (positions == nullptr) {
    for (const auto& fact : facts_)
      if (auto f = unify(pattern, fact, frame)) fn(fact, std::move(*f));
    return;
  }
  for (std::size_t pos : *positions)
    if (auto f = unify(pattern, facts_[pos], frame)) fn(facts_[pos], std::move(*f));
}

std::vector<Term> KnowledgeBase::facts_matching(const Term& pattern, const Frame& frame) const {
  std::vector<Term> out;
  for_each_match(pattern, frame, [&](const Term& fact, Frame&&) { out.push_back(fact); });
  return out;
}

std::vector<Frame> KnowledgeBase::match(const Term& pattern, const Frame& frame) const {
  std::vector<Frame> out;
  for_each_match(pattern, frame, [&](const Term&, Frame&& f) { out.push_back(std::move(f)); });
  return out;
}

std::vector<Term> KnowledgeBase::facts_matching_scan(const Term& pattern, const Frame& frame) const {
  std::vector<Term> out;
  for (const auto& fact : facts_)
    if (unify(pattern, fact, frame)) out.push_back(fact);
  return out;
}

}  // namespace neuroquery
