#include "neuroquery/term.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <system_error>

namespace neuroquery {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// [+-]?[0-9]+
bool looks_integer(std::string_view s) {
  std::size_t i = (!s.empty() && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!is_digit(s[i])) return false;
  return true;
}

// [+-]?(digits[.digits*] | .digits)([eE][+-]?digits)?
bool looks_real(std::string_view s) {
  std::size_t i = (!s.empty() && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  std::size_t mantissa_digits = 0;
  while (i < s.size() && is_digit(s[i])) ++i, ++mantissa_digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i, ++mantissa_digits;
  }
  if (mantissa_digits == 0) return false;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && is_digit(s[i])) ++i, ++exp_digits;
    if (exp_digits == 0) return false;
  }
  return i == s.size();
}

std::size_t mix(std::size_t seed, std::size_t value) {
  return seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

// Integral reals hash like the equal integer.
std::size_t hash_number(double value) {
  if (std::isfinite(value) && value == std::trunc(value) && value >= -9.2e18 && value <= 9.2e18)
    return std::hash<std::int64_t>{}(static_cast<std::int64_t>(value));
  return std::hash<double>{}(value);
}

bool numbers_equal(const Term& a, const Term& b) {
  using K = Term::Kind;
  if (a.kind() == K::integer && b.kind() == K::integer) return a.as_integer() == b.as_integer();
  if (a.kind() == K::real && b.kind() == K::real) return a.as_real() == b.as_real();
  const std::int64_t i = a.kind() == K::integer ? a.as_integer() : b.as_integer();
  const double r = a.kind() == K::real ? a.as_real() : b.as_real();
  if (!std::isfinite(r) || r != std::trunc(r)) return false;
  if (r < -9223372036854775808.0 || r >= 9223372036854775808.0) return false;
  return static_cast<std::int64_t>(r) == i;
}

}  // namespace

Term Term::integer(std::int64_t value) { return Term(Rep{std::in_place_index<0>, value}); }

Term Term::real(double value) { return Term(Rep{std::in_place_index<1>, value}); }

Term Term::text(std::string value) {
  return Term(Rep{Text{std::make_shared<const std::string>(std::move(value))}});
}

Term Term::identifier(std::string value) {
  return Term(Rep{Identifier{std::make_shared<const std::string>(std::move(value))}});
}

Term Term::variable(std::string name) {
  return Term(Rep{Variable{std::make_shared<const std::string>(std::move(name))}});
}

Term Term::tuple(TermList elements) {
  return Term(Rep{Tuple{std::make_shared<const TermList>(std::move(elements))}});
}

Term Term::string_literal(std::string value) {
  if (is_identifier_token(value)) return identifier(std::move(value));
  return text(std::move(value));
}

Term Term::parse_atom(std::string_view cell) {
  if (looks_integer(cell)) {
    std::int64_t v = 0;
    const char* first = cell.data() + (cell[0] == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
    if (ec == std::errc{} && ptr == cell.data() + cell.size()) return integer(v);
    // out of range: fall through to float
  }
  if (looks_real(cell)) {
    double v = 0;
    const char* first = cell.data() + (cell[0] == '+' ? 1 : 0);
    auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
    if (ec == std::errc{} && ptr == cell.data() + cell.size()) return real(v);
  }
  if (is_identifier_token(cell)) return identifier(std::string(cell));
  return text(std::string(cell));
}

bool Term::is_ground() const {
  switch (kind()) {
    case Kind::variable:
      return false;
    case Kind::tuple:
      for (const auto& e : elements())
        if (!e.is_ground()) return false;
      return true;
    default:
      return true;
  }
}

double Term::number() const {
  if (kind() == Kind::integer) return static_cast<double>(as_integer());
  return as_real();
}

const std::string& Term::str() const {
  switch (kind()) {
    case Kind::text:
      return *std::get<Text>(rep_).value;
    case Kind::identifier:
      return *std::get<Identifier>(rep_).value;
    case Kind::variable:
      return *std::get<Variable>(rep_).name;
    default:
      throw std::logic_error("Term::str on non-string term");
  }
}

const TermList& Term::elements() const {
  if (kind() != Kind::tuple) throw std::logic_error("Term::elements on non-tuple term");
  return *std::get<Tuple>(rep_).elements;
}

std::string Term::plain() const {
  switch (kind()) {
    case Kind::integer:
      return std::to_string(as_integer());
    case Kind::real:
      return format_real(as_real());
    case Kind::text:
    case Kind::identifier:
      return str();
    case Kind::variable:
      return "?" + str();
    case Kind::tuple: {
      std::string out = "(";
      const auto& es = elements();
      for (std::size_t i = 0; i < es.size(); ++i) {
        if (i > 0) out += ", ";
        out += es[i].plain();
      }
      return out + ")";
    }
  }
  return {};
}

std::size_t Term::hash() const noexcept {
  switch (kind()) {
    case Kind::integer:
      return std::hash<std::int64_t>{}(as_integer());
    case Kind::real:
      return hash_number(as_real());
    case Kind::text:
      return mix(1, std::hash<std::string>{}(*std::get<Text>(rep_).value));
    case Kind::identifier:
      return mix(2, std::hash<std::string>{}(*std::get<Identifier>(rep_).value));
    case Kind::variable:
      return mix(3, std::hash<std::string>{}(*std::get<Variable>(rep_).name));
    case Kind::tuple: {
      std::size_t seed = mix(4, elements().size());
      for (const auto& e : elements()) seed = mix(seed, e.hash());
      return seed;
    }
  }
  return 0;
}

bool operator==(const Term& a, const Term& b) {
  if (a.is_number() && b.is_number()) return numbers_equal(a, b);
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::text:
    case Term::Kind::identifier:
    case Term::Kind::variable:
      return a.str() == b.str();
    case Term::Kind::tuple: {
      const auto& x = a.elements();
      const auto& y = b.elements();
      if (&x == &y) return true;
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] == y[i])) return false;
      return true;
    }
    default:
      return false;
  }
}

bool identical(const Term& a, const Term& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Term::Kind::integer:
      return a.as_integer() == b.as_integer();
    case Term::Kind::real:
      return a.as_real() == b.as_real() || (std::isnan(a.as_real()) && std::isnan(b.as_real()));
    case Term::Kind::tuple: {
      const auto& x = a.elements();
      const auto& y = b.elements();
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!identical(x[i], y[i])) return false;
      return true;
    }
    default:
      return a.str() == b.str();
  }
}

bool is_identifier_token(std::string_view token) noexcept {
  if (token.empty()) return false;
  for (char c : token) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || is_digit(c) || c == '_' ||
                    c == '-';
    if (!ok) return false;
  }
  return true;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  std::string out(buf, ptr);
  if (out.find_first_of(".eE") == std::string::npos) out += ".0";
  return out;
}

// ---- Frame ----------------------------------------------------------------

const Term* Frame::lookup(std::string_view name) const noexcept {
  for (const Node* n = head_.get(); n != nullptr; n = n->next.get())
    if (n->name == name) return &n->value;
  return nullptr;
}

Frame Frame::extend(std::string name, Term value) const {
  Frame out;
  out.head_ = std::make_shared<const Node>(Node{std::move(name), std::move(value), head_, size() + 1});
  return out;
}

std::size_t Frame::size() const noexcept { return head_ ? head_->size : 0; }

std::vector<std::pair<std::string, Term>> Frame::bindings() const {
  std::vector<std::pair<std::string, Term>> out;
  out.reserve(size());
  for (const Node* n = head_.get(); n != nullptr; n = n->next.get()) out.emplace_back(n->name, n->value);
  return {out.rbegin(), out.rend()};
}

}  // namespace neuroquery
