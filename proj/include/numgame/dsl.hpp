#pragma once

// Closed predicate language over integers.
//
//   expr := atom | not(expr) | and(expr, expr, ...) | or(expr, expr, ...) | shift(int, expr)
//   atom := divisible(k) | mod_eq(k, r) | less_than(c) | greater_than(c) | ends_in(d)
//         | digit_sum_less(c) | digit_sum_eq(c) | square | cube | power_of(b) | prime
//         | in_set(n, ...) | even | odd | true | false
//
// Names are case-insensitive and whitespace is ignored. shift(o, e) holds at x iff e holds
// at x + o; atoms are evaluated by their arithmetic definition at any integer, so shifted
// coordinates may leave the instance space.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "numgame/error.hpp"
#include "numgame/space.hpp"

namespace numgame::dsl {

enum class AtomKind {
  Divisible,
  ModEq,
  LessThan,
  GreaterThan,
  EndsIn,
  DigitSumLess,
  DigitSumEq,
  Square,
  Cube,
  PowerOf,
  Prime,
  InSet,
  Even,
  Odd,
  True,
  False,
};

inline constexpr int kAtomKindCount = 16;

enum class NodeKind { Atom, Not, And, Or, Shift };

/// Lower-case concrete-syntax name of an atom ("divisible", "mod_eq", ...).
std::string_view atom_name(AtomKind kind) noexcept;
std::optional<AtomKind> atom_from_name(std::string_view name);
std::vector<AtomKind> all_atom_kinds();

/// Parameter limits enforced by the parser and honoured by the samplers.
struct Limits {
  static constexpr int kMinModulus = 2;
  static constexpr int kMaxModulus = 100;
  static constexpr int kMinThreshold = 0;
  static constexpr int kMaxThreshold = 200;
  static constexpr int kMaxDigitSum = 50;
  static constexpr int kMinBase = 2;
  static constexpr int kMaxBase = 100;
  static constexpr int kMaxSetSize = 101;
  static constexpr int kMaxSetElement = 200;
  static constexpr int kMaxOffset = 10;
  static constexpr int kDefaultMaxDepth = 6;
};

/// Predicate AST. Atoms carry their integer parameters in `params`
/// (k | k,r | c | d | b | set members); Shift keeps its offset in params[0].
struct Expr {
  NodeKind kind = NodeKind::Atom;
  AtomKind atom = AtomKind::True;
  std::vector<int> params;
  std::vector<Expr> children;

  static Expr make_atom(AtomKind kind, std::vector<int> params = {});
  static Expr make_not(Expr child);
  static Expr make_and(std::vector<Expr> children);
  static Expr make_or(std::vector<Expr> children);
  static Expr make_shift(int offset, Expr child);

  friend bool operator==(const Expr&, const Expr&) = default;
};

/// Depth of the tree; a lone atom has depth 1.
int depth(const Expr& e) noexcept;

class ParseError : public Error {
public:
  enum class Kind { Syntax, Range, Depth };

  ParseError(Kind kind, std::size_t position, std::vector<std::string> expected, std::string message);

  Kind kind() const noexcept { return kind_; }
  /// Byte offset into the input where the problem was detected.
  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
  Kind kind_;
  std::size_t position_;
  std::vector<std::string> expected_;
};

enum class TokenKind { Ident, Int, LParen, RParen, Comma, End };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t position;
};

/// Splits text into tokens (excluding the End token). Throws ParseError on stray characters.
std::vector<Token> tokenize(std::string_view text);

Expr parse(std::string_view text, int max_depth = Limits::kDefaultMaxDepth);

/// Evaluates e at any integer; total and side-effect free.
bool eval_at(const Expr& e, long long x) noexcept;

/// evaluate() restricted to the instance space; throws DomainError outside it.
bool evaluate(const Expr& e, Instance x, const InstanceSpace& space);

Extension extension_of(const Expr& e, const InstanceSpace& space);

/// Recursively sorts And/Or children by their canonical text.
Expr normalize(const Expr& e);

/// Stable canonical text; parse(canonicalize(e)) == normalize(e).
std::string canonicalize(const Expr& e);

/// Renders e as written, without reordering.
std::string to_text(const Expr& e);

std::size_t token_count(std::string_view text);

/// Parsed predicate bound to an instance space, with its cached extension.
class Hypothesis {
public:
  static std::shared_ptr<const Hypothesis> from_text(std::string_view text, const InstanceSpace& space,
                                                     std::optional<double> backend_prior_score = {});
  static std::shared_ptr<const Hypothesis> from_expr(const Expr& e, const InstanceSpace& space,
                                                     std::optional<double> backend_prior_score = {});

  const Expr& expr() const noexcept { return expr_; }
  const std::string& text() const noexcept { return text_; }
  const Extension& extension() const noexcept { return extension_; }
  std::size_t desc_len() const noexcept { return desc_len_; }
  const std::optional<double>& backend_prior_score() const noexcept { return backend_prior_score_; }

  /// Membership of an in-space instance, read from the cached extension.
  bool contains(Instance x) const noexcept { return extension_.contains(x); }

private:
  Hypothesis() = default;

  Expr expr_;
  std::string text_;
  Extension extension_;
  std::size_t desc_len_ = 0;
  std::optional<double> backend_prior_score_;
};

using HypothesisPtr = std::shared_ptr<const Hypothesis>;

/// Shorter description first, then lexicographically smaller canonical text.
bool simpler_than(const Hypothesis& a, const Hypothesis& b) noexcept;

} // namespace numgame::dsl
