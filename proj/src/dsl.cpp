#include "numgame/dsl.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <utility>

namespace numgame::dsl {

namespace {

constexpr std::array<std::string_view, kAtomKindCount> kAtomNames = {
    "divisible",    "mod_eq", "less_than", "greater_than", "ends_in", "digit_sum_less",
    "digit_sum_eq", "square", "cube",      "power_of",     "prime",   "in_set",
    "even",         "odd",    "true",      "false",
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

long long floor_mod(long long x, long long k) noexcept {
  const long long m = x % k;
  return m < 0 ? m + k : m;
}

long long digit_sum(long long x) noexcept {
  x = std::llabs(x);
  long long s = 0;
  for (; x > 0; x /= 10)
    s += x % 10;
  return s;
}

bool is_square(long long x) noexcept {
  if (x < 0)
    return false;
  auto r = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(x))));
  while (r * r > x)
    --r;
  while ((r + 1) * (r + 1) <= x)
    ++r;
  return r * r == x;
}

bool is_cube(long long x) noexcept {
  const long long a = std::llabs(x);
  auto r = static_cast<long long>(std::llround(std::cbrt(static_cast<double>(a))));
  while (r > 0 && r * r * r > a)
    --r;
  while ((r + 1) * (r + 1) * (r + 1) <= a)
    ++r;
  return r * r * r == a;
}

bool is_power_of(long long x, long long base) noexcept {
  if (x < 1)
    return false;
  while (x % base == 0)
    x /= base;
  return x == 1;
}

bool is_prime(long long x) noexcept {
  if (x < 2)
    return false;
  for (long long d = 2; d * d <= x; ++d)
    if (x % d == 0)
      return false;
  return true;
}

bool eval_atom(const Expr& e, long long x) noexcept {
  const auto& p = e.params;
  switch (e.atom) {
  case AtomKind::Divisible:
    return x % p[0] == 0;
  case AtomKind::ModEq:
    return floor_mod(x, p[0]) == p[1];
  case AtomKind::LessThan:
    return x < p[0];
  case AtomKind::GreaterThan:
    return x > p[0];
  case AtomKind::EndsIn:
    return std::llabs(x) % 10 == p[0];
  case AtomKind::DigitSumLess:
    return digit_sum(x) < p[0];
  case AtomKind::DigitSumEq:
    return digit_sum(x) == p[0];
  case AtomKind::Square:
    return is_square(x);
  case AtomKind::Cube:
    return is_cube(x);
  case AtomKind::PowerOf:
    return is_power_of(x, p[0]);
  case AtomKind::Prime:
    return is_prime(x);
  case AtomKind::InSet:
    return std::binary_search(p.begin(), p.end(), x);
  case AtomKind::Even:
    return x % 2 == 0;
  case AtomKind::Odd:
    return x % 2 != 0;
  case AtomKind::True:
    return true;
  case AtomKind::False:
    return false;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
  Parser(std::string_view text, int max_depth) : text_(text), tokens_(tokenize(text)), max_depth_(max_depth) {}

  Expr parse_all() {
    if (tokens_.empty())
      throw ParseError(ParseError::Kind::Syntax, 0, {"expression"}, "empty predicate text");
    Expr e = parse_expr(1);
    if (peek().kind != TokenKind::End)
      fail_syntax({"end of input"});
    return e;
  }

private:
  const Token& peek() const {
    if (pos_ < tokens_.size())
      return tokens_[pos_];
    end_token_ = Token{TokenKind::End, "", text_.size()};
    return end_token_;
  }

  Token next() {
    Token t = peek();
    if (pos_ < tokens_.size())
      ++pos_;
    return t;
  }

  [[noreturn]] void fail_syntax(std::vector<std::string> expected) const {
    const Token& t = peek();
    std::string found = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
    std::string msg = "syntax error at position " + std::to_string(t.position) + ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i)
      msg += (i ? " or " : "") + expected[i];
    msg += ", found " + found;
    throw ParseError(ParseError::Kind::Syntax, t.position, std::move(expected), msg);
  }

  [[noreturn]] static void fail_range(std::size_t position, const std::string& what) {
    throw ParseError(ParseError::Kind::Range, position, {},
                     "parameter out of range at position " + std::to_string(position) + ": " + what);
  }

  void expect(TokenKind kind, const char* name) {
    if (peek().kind != kind)
      fail_syntax({name});
    next();
  }

  int expect_int(int lo, int hi, const char* what) {
    if (peek().kind != TokenKind::Int)
      fail_syntax({"integer"});
    Token t = next();
    long long v = 0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || v < lo || v > hi)
      fail_range(t.position, std::string(what) + " must lie in [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "], got " + t.text);
    return static_cast<int>(v);
  }

  Expr parse_expr(int level) {
    const Token& head = peek();
    if (head.kind != TokenKind::Ident)
      fail_syntax({"atom or combinator name"});
    if (level > max_depth_)
      throw ParseError(ParseError::Kind::Depth, head.position, {},
                       "expression deeper than " + std::to_string(max_depth_) + " at position " +
                           std::to_string(head.position));
    const std::string name = lower(head.text);
    const std::size_t name_pos = head.position;

    if (name == "not") {
      next();
      expect(TokenKind::LParen, "'('");
      Expr child = parse_expr(level + 1);
      expect(TokenKind::RParen, "')'");
      return Expr::make_not(std::move(child));
    }
    if (name == "and" || name == "or") {
      next();
      expect(TokenKind::LParen, "'('");
      std::vector<Expr> children;
      children.push_back(parse_expr(level + 1));
      if (peek().kind != TokenKind::Comma)
        fail_syntax({"','"});
      while (peek().kind == TokenKind::Comma) {
        next();
        children.push_back(parse_expr(level + 1));
      }
      expect(TokenKind::RParen, "')'");
      return name == "and" ? Expr::make_and(std::move(children)) : Expr::make_or(std::move(children));
    }
    if (name == "shift") {
      next();
      expect(TokenKind::LParen, "'('");
      const int offset = expect_int(-Limits::kMaxOffset, Limits::kMaxOffset, "shift offset");
      expect(TokenKind::Comma, "','");
      Expr child = parse_expr(level + 1);
      expect(TokenKind::RParen, "')'");
      return Expr::make_shift(offset, std::move(child));
    }

    const auto kind = atom_from_name(name);
    if (!kind)
      fail_syntax({"atom or combinator name"});
    next();
    switch (*kind) {
    case AtomKind::Square:
    case AtomKind::Cube:
    case AtomKind::Prime:
    case AtomKind::Even:
    case AtomKind::Odd:
    case AtomKind::True:
    case AtomKind::False:
      return Expr::make_atom(*kind);
    default:
      break;
    }

    expect(TokenKind::LParen, "'('");
    std::vector<int> params;
    switch (*kind) {
    case AtomKind::Divisible:
      params.push_back(expect_int(Limits::kMinModulus, Limits::kMaxModulus, "divisor"));
      break;
    case AtomKind::ModEq: {
      const int k = expect_int(Limits::kMinModulus, Limits::kMaxModulus, "modulus");
      expect(TokenKind::Comma, "','");
      const int r = expect_int(0, k - 1, "remainder");
      params = {k, r};
      break;
    }
    case AtomKind::LessThan:
    case AtomKind::GreaterThan:
      params.push_back(expect_int(Limits::kMinThreshold, Limits::kMaxThreshold, "threshold"));
      break;
    case AtomKind::EndsIn:
      params.push_back(expect_int(0, 9, "final digit"));
      break;
    case AtomKind::DigitSumLess:
    case AtomKind::DigitSumEq:
      params.push_back(expect_int(0, Limits::kMaxDigitSum, "digit sum"));
      break;
    case AtomKind::PowerOf:
      params.push_back(expect_int(Limits::kMinBase, Limits::kMaxBase, "base"));
      break;
    case AtomKind::InSet: {
      params.push_back(expect_int(0, Limits::kMaxSetElement, "set member"));
      while (peek().kind == TokenKind::Comma) {
        next();
        params.push_back(expect_int(0, Limits::kMaxSetElement, "set member"));
      }
      std::sort(params.begin(), params.end());
      params.erase(std::unique(params.begin(), params.end()), params.end());
      if (params.size() > static_cast<std::size_t>(Limits::kMaxSetSize))
        fail_range(name_pos, "in_set holds at most " + std::to_string(Limits::kMaxSetSize) + " members");
      break;
    }
    default:
      break;
    }
    expect(TokenKind::RParen, "')'");
    return Expr::make_atom(*kind, std::move(params));
  }

  std::string_view text_;
  std::vector<Token> tokens_;
  int max_depth_;
  std::size_t pos_ = 0;
  mutable Token end_token_{TokenKind::End, "", 0};
};

void render(const Expr& e, std::string& out) {
  auto join_children = [&](std::string_view head) {
    out += head;
    out += '(';
    for (std::size_t i = 0; i < e.children.size(); ++i) {
      if (i)
        out += ", ";
      render(e.children[i], out);
    }
    out += ')';
  };
  switch (e.kind) {
  case NodeKind::Atom:
    out += atom_name(e.atom);
    if (!e.params.empty()) {
      out += '(';
      for (std::size_t i = 0; i < e.params.size(); ++i) {
        if (i)
          out += ", ";
        out += std::to_string(e.params[i]);
      }
      out += ')';
    }
    return;
  case NodeKind::Not:
    join_children("not");
    return;
  case NodeKind::And:
    join_children("and");
    return;
  case NodeKind::Or:
    join_children("or");
    return;
  case NodeKind::Shift:
    out += "shift(" + std::to_string(e.params.at(0)) + ", ";
    render(e.children.at(0), out);
    out += ')';
    return;
  }
}

// Returns the normalized copy together with its rendering.
std::pair<Expr, std::string> normalize_with_text(const Expr& e) {
  Expr out = e;
  if (e.kind == NodeKind::Atom) {
    if (e.atom == AtomKind::InSet) {
      std::sort(out.params.begin(), out.params.end());
      out.params.erase(std::unique(out.params.begin(), out.params.end()), out.params.end());
    }
  } else {
    std::vector<std::pair<Expr, std::string>> kids;
    kids.reserve(e.children.size());
    for (const auto& c : e.children)
      kids.push_back(normalize_with_text(c));
    if (e.kind == NodeKind::And || e.kind == NodeKind::Or)
      std::stable_sort(kids.begin(), kids.end(),
                       [](const auto& a, const auto& b) { return a.second < b.second; });
    out.children.clear();
    for (auto& k : kids)
      out.children.push_back(std::move(k.first));
  }
  std::string text;
  render(out, text);
  return {std::move(out), std::move(text)};
}

} // namespace

std::string_view atom_name(AtomKind kind) noexcept { return kAtomNames[static_cast<std::size_t>(kind)]; }

std::optional<AtomKind> atom_from_name(std::string_view name) {
  const std::string l = lower(name);
  for (std::size_t i = 0; i < kAtomNames.size(); ++i)
    if (kAtomNames[i] == l)
      return static_cast<AtomKind>(i);
  return std::nullopt;
}

std::vector<AtomKind> all_atom_kinds() {
  std::vector<AtomKind> out;
  for (int i = 0; i < kAtomKindCount; ++i)
    out.push_back(static_cast<AtomKind>(i));
  return out;
}

Expr Expr::make_atom(AtomKind kind, std::vector<int> params) {
  Expr e;
  e.kind = NodeKind::Atom;
  e.atom = kind;
  e.params = std::move(params);
  return e;
}

Expr Expr::make_not(Expr child) {
  Expr e;
  e.kind = NodeKind::Not;
  e.children.push_back(std::move(child));
  return e;
}

Expr Expr::make_and(std::vector<Expr> children) {
  Expr e;
  e.kind = NodeKind::And;
  e.children = std::move(children);
  return e;
}

Expr Expr::make_or(std::vector<Expr> children) {
  Expr e;
  e.kind = NodeKind::Or;
  e.children = std::move(children);
  return e;
}

Expr Expr::make_shift(int offset, Expr child) {
  Expr e;
  e.kind = NodeKind::Shift;
  e.params = {offset};
  e.children.push_back(std::move(child));
  return e;
}

int depth(const Expr& e) noexcept {
  int d = 0;
  for (const auto& c : e.children)
    d = std::max(d, depth(c));
  return d + 1;
}

ParseError::ParseError(Kind kind, std::size_t position, std::vector<std::string> expected, std::string message)
    : Error(std::move(message)), kind_(kind), position_(position), expected_(std::move(expected)) {}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (c == '(') {
      out.push_back({TokenKind::LParen, "(", i++});
    } else if (c == ')') {
      out.push_back({TokenKind::RParen, ")", i++});
    } else if (c == ',') {
      out.push_back({TokenKind::Comma, ",", i++});
    } else if (std::isdigit(c) ||
               (c == '-' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      const std::size_t start = i++;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
        ++i;
      out.push_back({TokenKind::Int, std::string(text.substr(start, i - start)), start});
    } else if (std::isalpha(c) || c == '_') {
      const std::size_t start = i++;
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
        ++i;
      out.push_back({TokenKind::Ident, std::string(text.substr(start, i - start)), start});
    } else {
      throw ParseError(ParseError::Kind::Syntax, i, {"name", "integer", "'('", "')'", "','"},
                       "syntax error at position " + std::to_string(i) + ": unexpected character '" +
                           std::string(1, text[i]) + "'");
    }
  }
  return out;
}

Expr parse(std::string_view text, int max_depth) { return Parser(text, max_depth).parse_all(); }

bool eval_at(const Expr& e, long long x) noexcept {
  switch (e.kind) {
  case NodeKind::Atom:
    return eval_atom(e, x);
  case NodeKind::Not:
    return !eval_at(e.children[0], x);
  case NodeKind::And:
    for (const auto& c : e.children)
      if (!eval_at(c, x))
        return false;
    return true;
  case NodeKind::Or:
    for (const auto& c : e.children)
      if (eval_at(c, x))
        return true;
    return false;
  case NodeKind::Shift:
    return eval_at(e.children[0], x + e.params[0]);
  }
  return false;
}

bool evaluate(const Expr& e, Instance x, const InstanceSpace& space) {
  require_in_space(space, x);
  return eval_at(e, x);
}

Extension extension_of(const Expr& e, const InstanceSpace& space) {
  Extension ext(space);
  for (Instance x = space.lo; x <= space.hi; ++x)
    if (eval_at(e, x))
      ext.insert(x);
  return ext;
}

Expr normalize(const Expr& e) { return normalize_with_text(e).first; }

std::string canonicalize(const Expr& e) { return normalize_with_text(e).second; }

std::string to_text(const Expr& e) {
  std::string out;
  render(e, out);
  return out;
}

std::size_t token_count(std::string_view text) { return tokenize(text).size(); }

HypothesisPtr Hypothesis::from_text(std::string_view text, const InstanceSpace& space,
                                    std::optional<double> backend_prior_score) {
  return from_expr(parse(text), space, backend_prior_score);
}

HypothesisPtr Hypothesis::from_expr(const Expr& e, const InstanceSpace& space,
                                    std::optional<double> backend_prior_score) {
  auto [norm, text] = normalize_with_text(e);
  // Re-parse so programmatically built trees obey the same limits as parsed text.
  if (parse(text) != norm)
    throw DomainError("expression does not round-trip through the parser: " + text);
  std::shared_ptr<Hypothesis> h(new Hypothesis());
  h->extension_ = extension_of(norm, space);
  h->desc_len_ = token_count(text);
  h->expr_ = std::move(norm);
  h->text_ = std::move(text);
  h->backend_prior_score_ = backend_prior_score;
  return h;
}

bool simpler_than(const Hypothesis& a, const Hypothesis& b) noexcept {
  if (a.desc_len() != b.desc_len())
    return a.desc_len() < b.desc_len();
  return a.text() < b.text();
}

} // namespace numgame::dsl
