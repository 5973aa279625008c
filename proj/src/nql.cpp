#include "neuroquery/nql.hpp"

#include <charconv>
#include <regex>
#include <unordered_set>

#include <json.hpp>

#include "neuroquery/error.hpp"
#include "neuroquery/unify.hpp"

namespace neuroquery {

namespace {

// ---- lexer ----------------------------------------------------------------

enum class Tok {
  end,
  lparen,
  rparen,
  comma,
  dot,
  eqeq,
  noteq,
  less,
  less_eq,
  greater,
  greater_eq,
  plus,
  minus,
  star,
  slash,
  variable,
  string,
  number,
  ident,
};

struct Token {
  Tok kind;
  std::string text;  // identifier/variable name, decoded string, or number spelling
  std::size_t line;
  std::size_t column;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::end:
      return "found end of input";
    case Tok::variable:
      return "found variable ?" + t.text;
    case Tok::string:
      return "found string \"" + t.text + "\"";
    case Tok::number:
      return "found number " + t.text;
    case Tok::ident:
      return "found '" + t.text + "'";
    default:
      return "found '" + t.text + "'";
  }
}

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      const std::size_t line = line_, col = col_;
      if (pos_ >= src_.size()) {
        out.push_back({Tok::end, "", line, col});
        return out;
      }
      const char c = src_[pos_];
      auto single = [&](Tok k) {
        advance();
        out.push_back({k, std::string(1, c), line, col});
      };
      switch (c) {
        case '(':
          single(Tok::lparen);
          continue;
        case ')':
          single(Tok::rparen);
          continue;
        case ',':
          single(Tok::comma);
          continue;
        case '.':
          single(Tok::dot);
          continue;
        case '+':
          single(Tok::plus);
          continue;
        case '-':
          single(Tok::minus);
          continue;
        case '*':
          single(Tok::star);
          continue;
        case '/':
          single(Tok::slash);
          continue;
        case '=':
          if (peek(1) != '=') fail(line, col, {"'=='"}, "found '='");
          advance(2);
          out.push_back({Tok::eqeq, "==", line, col});
          continue;
        case '!':
          if (peek(1) != '=') fail(line, col, {"'!='"}, "found '!'");
          advance(2);
          out.push_back({Tok::noteq, "!=", line, col});
          continue;
        case '<':
          if (peek(1) == '=') {
            advance(2);
            out.push_back({Tok::less_eq, "<=", line, col});
          } else {
            single(Tok::less);
          }
          continue;
        case '>':
          if (peek(1) == '=') {
            advance(2);
            out.push_back({Tok::greater_eq, ">=", line, col});
          } else {
            single(Tok::greater);
          }
          continue;
        case '"':
        case '\'':
          out.push_back({Tok::string, read_string(c), line, col});
          continue;
        case '?': {
          advance();
          if (pos_ >= src_.size() || !ident_start(src_[pos_]))
            fail(line_, col_, {"variable name"}, "found '?' without a name");
          std::string name;
          while (pos_ < src_.size() && ident_char(src_[pos_])) name += advance();
          out.push_back({Tok::variable, std::move(name), line, col});
          continue;
        }
        default:
          break;
      }
      if (digit(c)) {
        out.push_back({Tok::number, read_number(), line, col});
        continue;
      }
      if (ident_start(c)) {
        std::string name;
        while (pos_ < src_.size() && ident_char(src_[pos_])) name += advance();
        out.push_back({Tok::ident, std::move(name), line, col});
        continue;
      }
      fail(line, col, {}, std::string("unexpected character '") + c + "'");
    }
  }

 private:
  [[noreturn]] static void fail(std::size_t line, std::size_t col, std::vector<std::string> expected,
                                const std::string& found) {
    throw ParseError(line, col, std::move(expected), found);
  }

  char peek(std::size_t ahead) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }

  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      ++col_;
    }
    return c;
  }
  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) advance();
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string read_string(char quote) {
    const std::size_t line = line_, col = col_;
    advance();
    std::string out;
    for (;;) {
      if (pos_ >= src_.size()) fail(line, col, {"closing quote"}, "unterminated string");
      const char c = advance();
      if (c == quote) return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (pos_ >= src_.size()) fail(line, col, {"closing quote"}, "unterminated string");
      const char e = advance();
      switch (e) {
        case 'n':
          out += '\n';
          break;
        case 't':
          out += '\t';
          break;
        case 'r':
          out += '\r';
          break;
        case '\\':
        case '\'':
        case '"':
          out += e;
          break;
        default:
          fail(line_, col_ - 1, {"escape sequence"}, std::string("unknown escape '\\") + e + "'");
      }
    }
  }

  std::string read_number() {
    const std::size_t line = line_, col = col_;
    std::string out;
    while (pos_ < src_.size() && digit(src_[pos_])) out += advance();
    if (peek(0) == '.' && digit(peek(1))) {
      out += advance();
      while (pos_ < src_.size() && digit(src_[pos_])) out += advance();
    }
    if ((peek(0) == 'e' || peek(0) == 'E') &&
        (digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && digit(peek(2))))) {
      out += advance();
      if (peek(0) == '+' || peek(0) == '-') out += advance();
      while (pos_ < src_.size() && digit(src_[pos_])) out += advance();
    }
    if (pos_ < src_.size() && ident_char(src_[pos_]))
      fail(line, col, {}, "malformed number '" + out + src_[pos_] + "...' (quote identifiers that start with a digit)");
    return out;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

Term number_term(const std::string& spelling, bool negative) {
  const std::string full = negative ? "-" + spelling : spelling;
  Term t = Term::parse_atom(full);
  if (!t.is_number()) throw std::logic_error("lexer produced a non-number: " + full);
  return t;
}

// ---- parser ---------------------------------------------------------------

enum class StaticKind { unknown, number, string, boolean };

const char* kind_name(StaticKind k) {
  switch (k) {
    case StaticKind::number:
      return "number";
    case StaticKind::string:
      return "string";
    case StaticKind::boolean:
      return "boolean";
    default:
      return "value";
  }
}

struct TypedExpr {
  FilterPtr expr;
  StaticKind kind;
};

const std::unordered_set<std::string> kClauseKeywords = {"op_filter", "bm25_match", "neural_match",
                                                         "neural_extract"};

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(Lexer(src).run()) {}

  Program program() {
    Program p;
    while (!at(Tok::end)) p.statements.push_back(statement());
    return p;
  }

  FilterPtr lone_expr() {
    auto e = expr();
    expect(Tok::end, "end of expression");
    return e.expr;
  }

  Term lone_term() {
    Term t = term();
    expect(Tok::end, "end of term");
    return t;
  }

 private:
  const Token& cur() const { return tokens_[pos_]; }
  const Token& ahead(std::size_t n) const { return tokens_[std::min(pos_ + n, tokens_.size() - 1)]; }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_ident(std::string_view name) const { return at(Tok::ident) && cur().text == name; }
  const Token& take() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    throw ParseError(cur().line, cur().column, std::move(expected), describe(cur()));
  }
  [[noreturn]] void fail_at(const Token& t, const std::string& message) const {
    throw ParseError(t.line, t.column, {}, message);
  }

  const Token& expect(Tok k, const std::string& what) {
    if (!at(k)) fail({what});
    return take();
  }

  Statement statement() {
    if (at(Tok::ident) && ahead(1).kind == Tok::lparen) {
      const std::string kw = cur().text;
      if (kw == "fact") {
        take();
        take();
        Term fact = fact_body();
        expect(Tok::rparen, "')'");
        return FactStmt{std::move(fact)};
      }
      if (kw == "rule") {
        take();
        take();
        const Token& head_tok = cur();
        if (at(Tok::ident) && kClauseKeywords.count(cur().text) && ahead(1).kind == Tok::lparen)
          fail_at(head_tok, "rule head must be a pattern, found " + cur().text);
        Rule rule;
        rule.head = pattern();
        while (at(Tok::comma)) {
          take();
          if (at(Tok::rparen)) break;
          rule.body.push_back(clause());
        }
        expect(Tok::rparen, "')'");
        return RuleStmt{std::move(rule)};
      }
      if (kw == "search") {
        take();
        take();
        SearchStmt s;
        s.clauses.push_back(clause());
        while (at(Tok::comma)) {
          take();
          if (at(Tok::rparen)) break;
          s.clauses.push_back(clause());
        }
        expect(Tok::rparen, "')'");
        return s;
      }
    }
    fail({"'fact'", "'rule'", "'search'"});
  }

  Term fact_body() {
    Term t = term();
    if (at(Tok::dot)) return dotted(std::move(t));
    if (!t.is_tuple()) fail({"tuple", "'.'"});
    return t;
  }

  Clause clause() {
    if (at(Tok::ident) && ahead(1).kind == Tok::lparen && kClauseKeywords.count(cur().text)) {
      const std::string kw = take().text;
      take();
      if (kw == "op_filter") {
        const Token& start = cur();
        TypedExpr e = expr();
        if (e.kind != StaticKind::unknown && e.kind != StaticKind::boolean)
          throw TypeErrorStatic(start.line, start.column,
                                std::string("filter must be a boolean expression, found ") + kind_name(e.kind));
        expect(Tok::rparen, "')'");
        return FilterClause{e.expr};
      }
      std::string answer_var;
      if (kw == "neural_extract") {
        answer_var = expect(Tok::variable, "answer variable").text;
        expect(Tok::comma, "','");
      }
      const Token& pat_tok = cur();
      Term pat = pattern();
      if (pat.arity() != 3 || !pat.elements()[2].is_variable())
        fail_at(pat_tok, kw + " pattern must be a 3-tuple whose third element is a variable");
      expect(Tok::comma, "','");
      std::string query = expect(Tok::string, "query string").text;
      expect(Tok::comma, "','");
      const Token& k_tok = cur();
      if (!at(Tok::number)) fail({"integer k"});
      Term k = number_term(take().text, false);
      if (k.kind() != Term::Kind::integer || k.as_integer() < 1) fail_at(k_tok, "k must be an integer >= 1");
      expect(Tok::rparen, "')'");
      if (kw == "bm25_match") return Bm25Clause{std::move(pat), std::move(query), k.as_integer()};
      if (kw == "neural_match") return NeuralMatchClause{std::move(pat), std::move(query), k.as_integer()};
      return NeuralExtractClause{std::move(answer_var), std::move(pat), std::move(query), k.as_integer()};
    }
    return PatternClause{pattern()};
  }

  Term pattern() {
    const Token& start = cur();
    Term t = term();
    if (at(Tok::dot)) return dotted(std::move(t));
    if (t.is_tuple() && t.arity() >= 2) return t;
    if (t.is_tuple()) fail_at(start, "a tuple pattern needs at least two elements");
    fail({"'.'"});
  }

  Term dotted(Term subject) {
    take();  // '.'
    Term predicate = Term::integer(0);
    if (at(Tok::ident)) {
      predicate = Term::identifier(take().text);
    } else if (at(Tok::variable)) {
      predicate = Term::variable(take().text);
    } else if (at(Tok::string)) {
      predicate = Term::string_literal(take().text);
    } else {
      fail({"property name", "variable"});
    }
    expect(Tok::eqeq, "'=='");
    Term object = term();
    return Term::tuple({std::move(subject), std::move(predicate), std::move(object)});
  }

  Term term() {
    switch (cur().kind) {
      case Tok::variable:
        return Term::variable(take().text);
      case Tok::string:
        return Term::string_literal(take().text);
      case Tok::number:
        return number_term(take().text, false);
      case Tok::minus:
        take();
        if (!at(Tok::number)) fail({"number"});
        return number_term(take().text, true);
      case Tok::ident:
        return Term::identifier(take().text);
      case Tok::lparen: {
        take();
        TermList elems;
        elems.push_back(term());
        while (at(Tok::comma)) {
          take();
          elems.push_back(term());
        }
        expect(Tok::rparen, "')'");
        return Term::tuple(std::move(elems));
      }
      default:
        fail({"variable", "string", "number", "identifier", "'('"});
    }
  }

  // ---- filter expressions ----

  [[noreturn]] void type_fail(const Token& at_tok, const std::string& message) const {
    throw TypeErrorStatic(at_tok.line, at_tok.column, message);
  }

  void require(const Token& op, StaticKind actual, StaticKind wanted, const char* what) const {
    if (actual != StaticKind::unknown && actual != wanted)
      type_fail(op, std::string(what) + " needs a " + kind_name(wanted) + " operand, found " + kind_name(actual));
  }

  TypedExpr expr() { return or_expr(); }

  TypedExpr or_expr() {
    TypedExpr lhs = and_expr();
    while (at_ident("or")) {
      const Token& op = take();
      TypedExpr rhs = and_expr();
      require(op, lhs.kind, StaticKind::boolean, "'or'");
      require(op, rhs.kind, StaticKind::boolean, "'or'");
      lhs = {FilterExpr::binary(FilterExpr::Op::logical_or, lhs.expr, rhs.expr), StaticKind::boolean};
    }
    return lhs;
  }

  TypedExpr and_expr() {
    TypedExpr lhs = not_expr();
    while (at_ident("and")) {
      const Token& op = take();
      TypedExpr rhs = not_expr();
      require(op, lhs.kind, StaticKind::boolean, "'and'");
      require(op, rhs.kind, StaticKind::boolean, "'and'");
      lhs = {FilterExpr::binary(FilterExpr::Op::logical_and, lhs.expr, rhs.expr), StaticKind::boolean};
    }
    return lhs;
  }

  TypedExpr not_expr() {
    if (at_ident("not")) {
      const Token& op = take();
      TypedExpr operand = not_expr();
      require(op, operand.kind, StaticKind::boolean, "'not'");
      return {FilterExpr::unary(FilterExpr::Op::logical_not, operand.expr), StaticKind::boolean};
    }
    return comparison();
  }

  TypedExpr comparison() {
    TypedExpr lhs = additive();
    FilterExpr::Op op;
    switch (cur().kind) {
      case Tok::less:
        op = FilterExpr::Op::less;
        break;
      case Tok::less_eq:
        op = FilterExpr::Op::less_equal;
        break;
      case Tok::greater:
        op = FilterExpr::Op::greater;
        break;
      case Tok::greater_eq:
        op = FilterExpr::Op::greater_equal;
        break;
      case Tok::eqeq:
        op = FilterExpr::Op::equal;
        break;
      case Tok::noteq:
        op = FilterExpr::Op::not_equal;
        break;
      default:
        return lhs;
    }
    const Token& op_tok = take();
    TypedExpr rhs = additive();
    if (op == FilterExpr::Op::equal || op == FilterExpr::Op::not_equal) {
      if (lhs.kind != StaticKind::unknown && rhs.kind != StaticKind::unknown && lhs.kind != rhs.kind)
        type_fail(op_tok, std::string("cannot compare ") + kind_name(lhs.kind) + " with " + kind_name(rhs.kind));
    } else {
      require(op_tok, lhs.kind, StaticKind::number, "ordering comparison");
      require(op_tok, rhs.kind, StaticKind::number, "ordering comparison");
    }
    switch (cur().kind) {
      case Tok::less:
      case Tok::less_eq:
      case Tok::greater:
      case Tok::greater_eq:
      case Tok::eqeq:
      case Tok::noteq:
        fail_at(cur(), "comparisons cannot be chained; use 'and'");
      default:
        break;
    }
    return {FilterExpr::binary(op, lhs.expr, rhs.expr), StaticKind::boolean};
  }

  TypedExpr additive() {
    TypedExpr lhs = multiplicative();
    while (at(Tok::plus) || at(Tok::minus)) {
      const Token& op_tok = take();
      TypedExpr rhs = multiplicative();
      require(op_tok, lhs.kind, StaticKind::number, "arithmetic");
      require(op_tok, rhs.kind, StaticKind::number, "arithmetic");
      const auto op = op_tok.kind == Tok::plus ? FilterExpr::Op::add : FilterExpr::Op::subtract;
      lhs = {FilterExpr::binary(op, lhs.expr, rhs.expr), StaticKind::number};
    }
    return lhs;
  }

  TypedExpr multiplicative() {
    TypedExpr lhs = unary();
    while (at(Tok::star) || at(Tok::slash)) {
      const Token& op_tok = take();
      TypedExpr rhs = unary();
      require(op_tok, lhs.kind, StaticKind::number, "arithmetic");
      require(op_tok, rhs.kind, StaticKind::number, "arithmetic");
      const auto op = op_tok.kind == Tok::star ? FilterExpr::Op::multiply : FilterExpr::Op::divide;
      lhs = {FilterExpr::binary(op, lhs.expr, rhs.expr), StaticKind::number};
    }
    return lhs;
  }

  TypedExpr unary() {
    if (at(Tok::minus)) {
      const Token& op_tok = take();
      if (at(Tok::number)) return {FilterExpr::literal(number_term(take().text, true)), StaticKind::number};
      TypedExpr operand = unary();
      require(op_tok, operand.kind, StaticKind::number, "unary '-'");
      return {FilterExpr::unary(FilterExpr::Op::negate, operand.expr), StaticKind::number};
    }
    return primary();
  }

  TypedExpr primary() {
    switch (cur().kind) {
      case Tok::number:
        return {FilterExpr::literal(number_term(take().text, false)), StaticKind::number};
      case Tok::string:
        return {FilterExpr::literal(Term::string_literal(take().text)), StaticKind::string};
      case Tok::variable:
        return {FilterExpr::variable(take().text), StaticKind::unknown};
      case Tok::lparen: {
        take();
        TypedExpr inner = expr();
        expect(Tok::rparen, "')'");
        return inner;
      }
      case Tok::ident:
        if (cur().text == "abs" && ahead(1).kind == Tok::lparen) {
          const Token& op_tok = take();
          take();
          TypedExpr operand = expr();
          expect(Tok::rparen, "')'");
          require(op_tok, operand.kind, StaticKind::number, "abs");
          return {FilterExpr::unary(FilterExpr::Op::abs, operand.expr), StaticKind::number};
        }
        [[fallthrough]];
      default:
        fail({"number", "string", "variable", "'abs'", "'('"});
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// ---- rendering ------------------------------------------------------------

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        out += c;
    }
  }
  return out + "\"";
}

bool bare_word(std::string_view s) {
  if (s.empty() || !ident_start(s[0])) return false;
  for (char c : s)
    if (!ident_char(c)) return false;
  return true;
}

int precedence(const FilterExpr& e) {
  using Op = FilterExpr::Op;
  switch (e.op) {
    case Op::logical_or:
      return 1;
    case Op::logical_and:
      return 2;
    case Op::logical_not:
      return 3;
    case Op::less:
    case Op::less_equal:
    case Op::greater:
    case Op::greater_equal:
    case Op::equal:
    case Op::not_equal:
      return 4;
    case Op::add:
    case Op::subtract:
      return 5;
    case Op::multiply:
    case Op::divide:
      return 6;
    case Op::negate:
      return 7;
    default:
      return 8;
  }
}

const char* op_symbol(FilterExpr::Op op) {
  using Op = FilterExpr::Op;
  switch (op) {
    case Op::add:
      return "+";
    case Op::subtract:
      return "-";
    case Op::multiply:
      return "*";
    case Op::divide:
      return "/";
    case Op::less:
      return "<";
    case Op::less_equal:
      return "<=";
    case Op::greater:
      return ">";
    case Op::greater_equal:
      return ">=";
    case Op::equal:
      return "==";
    case Op::not_equal:
      return "!=";
    case Op::logical_and:
      return "and";
    case Op::logical_or:
      return "or";
    default:
      return "?";
  }
}

std::string render_expr(const FilterExpr& e);

std::string wrap(const FilterExpr& child, bool parens) {
  std::string s = render_expr(child);
  return parens ? "(" + s + ")" : s;
}

std::string render_expr(const FilterExpr& e) {
  using Op = FilterExpr::Op;
  switch (e.op) {
    case Op::literal:
      if (e.value.is_string()) return quote(e.value.str());
      return render(e.value);
    case Op::variable:
      return "?" + e.name;
    case Op::negate:
      return "-(" + render_expr(*e.lhs) + ")";
    case Op::abs:
      return "abs(" + render_expr(*e.lhs) + ")";
    case Op::logical_not:
      return "not " + wrap(*e.lhs, precedence(*e.lhs) < 3);
    default: {
      const int p = precedence(e);
      if (p == 4)
        return wrap(*e.lhs, precedence(*e.lhs) <= 4) + " " + op_symbol(e.op) + " " +
               wrap(*e.rhs, precedence(*e.rhs) <= 4);
      return wrap(*e.lhs, precedence(*e.lhs) < p) + " " + op_symbol(e.op) + " " +
             wrap(*e.rhs, precedence(*e.rhs) <= p);
    }
  }
}

std::string render_pattern(const Term& pattern) {
  if (pattern.is_tuple() && pattern.arity() == 3) {
    const Term& p = pattern.elements()[1];
    if (p.is_variable() || p.is_string()) {
      const std::string pred = p.kind() == Term::Kind::identifier && bare_word(p.str()) ? p.str() : render(p);
      return render(pattern.elements()[0]) + "." + pred + " == " + render(pattern.elements()[2]);
    }
  }
  return render(pattern);
}

nlohmann::ordered_json to_json(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::integer:
      return t.as_integer();
    case Term::Kind::real:
      return t.as_real();
    case Term::Kind::text:
    case Term::Kind::identifier:
      return t.str();
    case Term::Kind::variable:
      return "?" + t.str();
    case Term::Kind::tuple: {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& e : t.elements()) arr.push_back(to_json(e));
      return arr;
    }
  }
  return nullptr;
}

}  // namespace

Program parse_program(std::string_view source) { return Parser(source).program(); }

FilterPtr parse_filter_expr(std::string_view source) { return Parser(source).lone_expr(); }

Term parse_term(std::string_view source) { return Parser(source).lone_term(); }

std::string render(const Term& term) {
  switch (term.kind()) {
    case Term::Kind::integer:
      return std::to_string(term.as_integer());
    case Term::Kind::real:
      return format_real(term.as_real());
    case Term::Kind::text:
      return quote(term.str());
    case Term::Kind::identifier:
      return bare_word(term.str()) ? term.str() : quote(term.str());
    case Term::Kind::variable:
      return "?" + term.str();
    case Term::Kind::tuple: {
      std::string out = "(";
      const auto& es = term.elements();
      for (std::size_t i = 0; i < es.size(); ++i) {
        if (i > 0) out += ", ";
        out += render(es[i]);
      }
      return out + ")";
    }
  }
  return {};
}

std::string render(const FilterPtr& expr) { return expr ? render_expr(*expr) : std::string(); }

std::string render(const Clause& clause) {
  return std::visit(
      [](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, PatternClause>) {
          return render_pattern(c.pattern);
        } else if constexpr (std::is_same_v<T, FilterClause>) {
          return "op_filter(" + render(c.expr) + ")";
        } else if constexpr (std::is_same_v<T, Bm25Clause>) {
          return "bm25_match(" + render_pattern(c.pattern) + ", " + quote(c.query) + ", " + std::to_string(c.k) + ")";
        } else if constexpr (std::is_same_v<T, NeuralMatchClause>) {
          return "neural_match(" + render_pattern(c.pattern) + ", " + quote(c.query) + ", " + std::to_string(c.k) +
                 ")";
        } else {
          return "neural_extract(?" + c.answer_var + ", " + render_pattern(c.pattern) + ", " + quote(c.query) + ", " +
                 std::to_string(c.k) + ")";
        }
      },
      clause);
}

std::string render(const Statement& statement) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FactStmt>) {
          return "fact(" + render(s.fact) + ")";
        } else if constexpr (std::is_same_v<T, RuleStmt>) {
          std::string out = "rule(" + render_pattern(s.rule.head);
          for (const auto& c : s.rule.body) out += ",\n  " + render(c);
          return out + ")";
        } else {
          std::string out = "search(";
          for (std::size_t i = 0; i < s.clauses.size(); ++i) {
            out += i == 0 ? "\n  " : ",\n  ";
            out += render(s.clauses[i]);
          }
          return out + "\n)";
        }
      },
      statement);
}

std::string render(const Program& program) {
  std::string out;
  for (const auto& s : program.statements) out += render(s) + "\n";
  return out;
}

std::string render_record(const Frame& frame) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (const auto& [name, value] : frame.bindings()) obj["?" + name] = to_json(substitute(value, frame));
  return obj.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

std::string from_python_syntax(std::string_view source) {
  std::string text(source);
  // lambda e: ... e['?x'] ...  ->  ... ?x ...
  static const std::regex lambda_re(R"(lambda\s+([A-Za-z_]\w*)\s*:\s*)");
  std::smatch m;
  std::vector<std::string> params;
  std::string stripped;
  auto begin = text.cbegin();
  while (std::regex_search(begin, text.cend(), m, lambda_re)) {
    stripped.append(begin, m[0].first);
    params.push_back(m[1].str());
    begin = m[0].second;
  }
  stripped.append(begin, text.cend());
  text = std::move(stripped);
  for (const auto& p : params) {
    const std::regex lookup(p + R"(\s*\[\s*(['"])\?([A-Za-z_]\w*)\1\s*\])");
    text = std::regex_replace(text, lookup, "?$2");
  }

  // _name -> ?name outside string literals
  std::string out;
  out.reserve(text.size());
  char quote_char = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quote_char != 0) {
      out += c;
      if (c == '\\' && i + 1 < text.size()) {
        out += text[++i];
      } else if (c == quote_char) {
        quote_char = 0;
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      quote_char = c;
      out += c;
      continue;
    }
    const bool word_before = i > 0 && (ident_char(text[i - 1]) || text[i - 1] == '?');
    if (c == '_' && !word_before && i + 1 < text.size() && ident_start(text[i + 1])) {
      out += '?';
      continue;
    }
    out += c;
  }
  return out;
}

}  // namespace neuroquery
