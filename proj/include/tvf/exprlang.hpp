#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace tvf::expr {

enum class Func { Sin, Cos, Tan, Exp, Sqrt, Abs };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
  double value;
};
struct Time {};
struct Pi {};
struct Negate {
  NodePtr operand;
};
struct Binary {
  char op;  // one of + - * /
  NodePtr lhs;
  NodePtr rhs;
};
struct Call {
  Func fn;
  NodePtr arg;
};

struct Node {
  std::variant<Number, Time, Pi, Negate, Binary, Call> value;
};

/// Immutable expression in the single variable `t`. Cheap to copy; copies
/// share the tree and may be evaluated concurrently.
class Expr {
 public:
  /// The constant 0.
  Expr();
  explicit Expr(NodePtr root);

  /// Throws EvalError on division by zero, domain errors, or a non-finite result.
  double eval(double t) const;

  /// Canonical text; parse(to_string()) reproduces the same tree.
  std::string to_string() const;

  bool depends_on_time() const;
  const Node& root() const { return *root_; }

 private:
  NodePtr root_;
};

enum class ParseErrorKind { Syntax, UnknownIdentifier };

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::size_t offset, const std::string& message);

  ParseErrorKind kind() const { return kind_; }
  /// Byte offset into the parsed text.
  std::size_t offset() const { return offset_; }

 private:
  ParseErrorKind kind_;
  std::size_t offset_;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// expr  := term (('+'|'-') term)*
/// term  := unary (('*'|'/') unary)*
/// unary := '-' unary | atom
/// atom  := number | 't' | 'pi' | ident '(' expr ')' | '(' expr ')'
Expr parse(std::string_view text);

/// Agreement between a value expression and its user-supplied rate,
/// measured against central differences over a time window.
struct RateConsistency {
  double max_abs_deviation = 0.0;
  double relative = 0.0;  // max deviation / max(|rate|, |difference|)
  double worst_t = 0.0;
};

RateConsistency check_rate_consistency(const Expr& value, const Expr& rate, double t0, double t1,
                                       std::size_t samples = 2001, double h = 1e-4);

}  // namespace tvf::expr
