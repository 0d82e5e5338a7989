#include "tvf/exprlang.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>

namespace tvf::expr {

namespace {

struct FuncName {
  std::string_view name;
  Func fn;
};

constexpr std::array<FuncName, 6> kFunctions{{{"sin", Func::Sin},
                                              {"cos", Func::Cos},
                                              {"tan", Func::Tan},
                                              {"exp", Func::Exp},
                                              {"sqrt", Func::Sqrt},
                                              {"abs", Func::Abs}}};

std::string_view func_name(Func fn) {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f.name;
  }
  return "?";
}

NodePtr make(Node node) { return std::make_shared<const Node>(std::move(node)); }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse_all() {
    NodePtr root = parse_expr();
    skip_ws();
    if (pos_ < text_.size()) {
      fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { fail_at(pos_, message); }
  [[noreturn]] void fail_at(std::size_t offset, const std::string& message) const {
    throw ParseError(ParseErrorKind::Syntax, offset, message);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      skip_ws();
      if (pos_ >= text_.size() || (text_[pos_] != '+' && text_[pos_] != '-')) return lhs;
      const char op = text_[pos_++];
      lhs = make({Binary{op, lhs, parse_term()}});
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      skip_ws();
      if (pos_ >= text_.size() || (text_[pos_] != '*' && text_[pos_] != '/')) return lhs;
      const char op = text_[pos_++];
      lhs = make({Binary{op, lhs, parse_unary()}});
    }
  }

  NodePtr parse_unary() {
    if (consume('-')) return make({Negate{parse_unary()}});
    return parse_atom();
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!consume(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) fail_at(start, "malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("malformed exponent");
    }
    double value = 0.0;
    const auto [end, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || end != text_.data() + pos_ || !std::isfinite(value)) {
      fail_at(start, "number out of range");
    }
    return make({Number{value}});
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "t") return make({Time{}});
    if (name == "pi") return make({Pi{}});
    for (const auto& f : kFunctions) {
      if (f.name == name) {
        if (!consume('(')) fail("expected '(' after '" + std::string(name) + "'");
        NodePtr arg = parse_expr();
        if (!consume(')')) fail("expected ')'");
        return make({Call{f.fn, arg}});
      }
    }
    throw ParseError(ParseErrorKind::UnknownIdentifier, start,
                     "unknown identifier '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double eval_node(const Node& node, double t) {
  return std::visit(
      [t](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Number>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Time>) {
          return t;
        } else if constexpr (std::is_same_v<T, Pi>) {
          return std::numbers::pi;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -eval_node(*n.operand, t);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const double a = eval_node(*n.lhs, t);
          const double b = eval_node(*n.rhs, t);
          switch (n.op) {
            case '+':
              return a + b;
            case '-':
              return a - b;
            case '*':
              return a * b;
            default:
              if (b == 0.0) throw EvalError("division by zero");
              return a / b;
          }
        } else {
          const double x = eval_node(*n.arg, t);
          switch (n.fn) {
            case Func::Sin:
              return std::sin(x);
            case Func::Cos:
              return std::cos(x);
            case Func::Tan:
              return std::tan(x);
            case Func::Exp:
              return std::exp(x);
            case Func::Sqrt:
              if (x < 0.0) throw EvalError("sqrt of negative value");
              return std::sqrt(x);
            case Func::Abs:
              return std::abs(x);
          }
          return 0.0;
        }
      },
      node.value);
}

// Binding strength for printing.
enum Prec { kAdd = 1, kMul = 2, kUnary = 3, kAtom = 4 };

int precedence(const Node& node) {
  if (const auto* b = std::get_if<Binary>(&node.value)) {
    return (b->op == '+' || b->op == '-') ? kAdd : kMul;
  }
  if (std::holds_alternative<Negate>(node.value)) return kUnary;
  if (const auto* num = std::get_if<Number>(&node.value)) {
    return std::signbit(num->value) ? kUnary : kAtom;
  }
  return kAtom;
}

std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ec == std::errc() ? end : buf.data());
}

void print(const Node& node, std::string& out);

void print_child(const Node& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print(child, out);
  if (parens) out += ')';
}

void print(const Node& node, std::string& out) {
  std::visit(
      [&out](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Number>) {
          out += format_number(n.value);
        } else if constexpr (std::is_same_v<T, Time>) {
          out += 't';
        } else if constexpr (std::is_same_v<T, Pi>) {
          out += "pi";
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += '-';
          print_child(*n.operand, precedence(*n.operand) < kUnary, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const int p = (n.op == '+' || n.op == '-') ? kAdd : kMul;
          print_child(*n.lhs, precedence(*n.lhs) < p, out);
          out += ' ';
          out += n.op;
          out += ' ';
          // Left-associative: an equal-precedence right operand needs parens.
          print_child(*n.rhs, precedence(*n.rhs) <= p, out);
        } else {
          out += func_name(n.fn);
          out += '(';
          print(*n.arg, out);
          out += ')';
        }
      },
      node.value);
}

bool uses_time(const Node& node) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Time>) {
          return true;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return uses_time(*n.operand);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return uses_time(*n.lhs) || uses_time(*n.rhs);
        } else if constexpr (std::is_same_v<T, Call>) {
          return uses_time(*n.arg);
        } else {
          return false;
        }
      },
      node.value);
}

}  // namespace

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, const std::string& message)
    : std::runtime_error("offset " + std::to_string(offset) + ": " + message),
      kind_(kind),
      offset_(offset) {}

Expr::Expr() : root_(std::make_shared<const Node>(Node{Number{0.0}})) {}

Expr::Expr(NodePtr root) : root_(std::move(root)) {
  if (!root_) throw std::invalid_argument("Expr: null tree");
}

double Expr::eval(double t) const {
  const double v = eval_node(*root_, t);
  if (!std::isfinite(v)) throw EvalError("non-finite result");
  return v;
}

std::string Expr::to_string() const {
  std::string out;
  print(*root_, out);
  return out;
}

bool Expr::depends_on_time() const { return uses_time(*root_); }

Expr parse(std::string_view text) { return Expr(Parser(text).parse_all()); }

RateConsistency check_rate_consistency(const Expr& value, const Expr& rate, double t0, double t1,
                                       std::size_t samples, double h) {
  RateConsistency result;
  if (samples < 2 || !(t1 > t0)) samples = 1;
  double max_scale = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double frac = samples == 1 ? 0.0 : static_cast<double>(i) / (samples - 1);
    // Keep both stencil points inside the window.
    const double t = std::clamp(t0 + frac * (t1 - t0), t0 + h, std::max(t0 + h, t1 - h));
    const double fd = (value.eval(t + h) - value.eval(t - h)) / (2.0 * h);
    const double r = rate.eval(t);
    const double dev = std::abs(fd - r);
    max_scale = std::max({max_scale, std::abs(r), std::abs(fd)});
    if (dev > result.max_abs_deviation) {
      result.max_abs_deviation = dev;
      result.worst_t = t;
    }
  }
  result.relative = max_scale > 0.0 ? result.max_abs_deviation / max_scale : 0.0;
  return result;
}

}  // namespace tvf::expr
