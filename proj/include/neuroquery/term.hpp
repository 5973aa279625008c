#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace neuroquery {

class Term;
using TermList = std::vector<Term>;

/// A constant, a variable, or a (possibly nested) tuple of terms.
///
/// Terms are immutable and cheap to copy: strings and tuple bodies are shared.
/// Equality follows the numeric tower, so `integer(14549) == real(14549.0)`;
/// text and identifiers are distinct kinds and never compare equal to each other.
class Term {
 public:
  enum class Kind : std::uint8_t { integer, real, text, identifier, variable, tuple };

  static Term integer(std::int64_t value);
  static Term real(double value);
  static Term text(std::string value);
  static Term identifier(std::string value);
  static Term variable(std::string name);
  static Term tuple(TermList elements);

  /// Classifies a quoted literal: identifier when it matches `[A-Za-z0-9_-]+`, text otherwise.
  static Term string_literal(std::string value);

  /// Classifies a raw CSV value cell: integer, then float, then identifier, then text.
  static Term parse_atom(std::string_view cell);

  Kind kind() const noexcept { return static_cast<Kind>(rep_.index()); }
  bool is_variable() const noexcept { return kind() == Kind::variable; }
  bool is_tuple() const noexcept { return kind() == Kind::tuple; }
  bool is_number() const noexcept { return kind() == Kind::integer || kind() == Kind::real; }
  bool is_string() const noexcept { return kind() == Kind::text || kind() == Kind::identifier; }
  bool is_ground() const;

  std::int64_t as_integer() const { return std::get<std::int64_t>(rep_); }
  double as_real() const { return std::get<double>(rep_); }
  /// Numeric value of an integer or real term.
  double number() const;
  /// Payload of a text, identifier, or variable term (variable names exclude the `?`).
  const std::string& str() const;
  const TermList& elements() const;
  std::size_t arity() const { return elements().size(); }

  /// Unquoted display form: string payloads verbatim, numbers canonical, `?name` for
  /// variables, tuples as `(a, b)`.
  std::string plain() const;

  std::size_t hash() const noexcept;

  friend bool operator==(const Term& a, const Term& b);
  friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

 private:
  struct Text {
    std::shared_ptr<const std::string> value;
  };
  struct Identifier {
    std::shared_ptr<const std::string> value;
  };
  struct Variable {
    std::shared_ptr<const std::string> name;
  };
  struct Tuple {
    std::shared_ptr<const TermList> elements;
  };
  using Rep = std::variant<std::int64_t, double, Text, Identifier, Variable, Tuple>;

  explicit Term(Rep rep) : rep_(std::move(rep)) {}

  Rep rep_;
};

/// Structural equality that also requires identical kinds (`1` is not identical to `1.0`).
bool identical(const Term& a, const Term& b);

/// True for tokens made of `[A-Za-z0-9_-]+`.
bool is_identifier_token(std::string_view token) noexcept;

/// Shortest round-tripping decimal form; always contains `.` or an exponent.
std::string format_real(double value);

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept { return t.hash(); }
};

/// Persistent map from variable names to terms.
///
/// `extend` returns a new frame sharing structure with the old one; frames are
/// never mutated once built.
class Frame {
 public:
  Frame() = default;

  const Term* lookup(std::string_view name) const noexcept;
  bool binds(std::string_view name) const noexcept { return lookup(name) != nullptr; }

  /// Adds a binding. The variable must not already be bound.
  [[nodiscard]] Frame extend(std::string name, Term value) const;

  std::size_t size() const noexcept;
  bool empty() const noexcept { return head_ == nullptr; }

  /// Bindings in the order they were made.
  std::vector<std::pair<std::string, Term>> bindings() const;

 private:
  struct Node {
    std::string name;
    Term value;
    std::shared_ptr<const Node> next;
    std::size_t size;
  };
  std::shared_ptr<const Node> head_;
};

}  // namespace neuroquery

template <>
struct std::hash<neuroquery::Term> {
  std::size_t operator()(const neuroquery::Term& t) const noexcept { return t.hash(); }
};
