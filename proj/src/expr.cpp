#include "qstate/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qstate {

struct Expression::Node {
  enum class Op { constant, variable, neg, add, sub, mul, div, pow, sin, cos, exp };
  Op op = Op::constant;
  double value = 0.0;
  int var = 0;
  std::unique_ptr<Node> lhs;
  std::unique_ptr<Node> rhs;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::unique_ptr<Node>;

NodePtr make_leaf(double value) {
  auto n = std::make_unique<Node>();
  n->value = value;
  return n;
}

NodePtr make_unary(Node::Op op, NodePtr arg) {
  auto n = std::make_unique<Node>();
  n->op = op;
  n->lhs = std::move(arg);
  return n;
}

NodePtr make_binary(Node::Op op, NodePtr a, NodePtr b) {
  auto n = std::make_unique<Node>();
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  NodePtr parse_all() {
    NodePtr root = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return root;
  }

  unsigned used() const { return used_; }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression '" + std::string(s_) + "': " + what + " at offset " +
                                std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(Node::Op::add, std::move(lhs), parse_term());
      } else if (accept('-')) {
        lhs = make_binary(Node::Op::sub, std::move(lhs), parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(Node::Op::mul, std::move(lhs), parse_unary());
      } else if (accept('/')) {
        lhs = make_binary(Node::Op::div, std::move(lhs), parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_unary(Node::Op::neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make_binary(Node::Op::pow, std::move(base), parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    double value = 0.0;
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return make_leaf(value);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string_view id = s_.substr(start, pos_ - start);

    if (id == "pi") return make_leaf(std::numbers::pi);
    static constexpr std::string_view kVars[] = {"x", "y", "z", "u", "v"};
    for (int i = 0; i < static_cast<int>(kVarCount); ++i) {
      if (id == kVars[i]) {
        auto n = std::make_unique<Node>();
        n->op = Node::Op::variable;
        n->var = i;
        used_ |= 1u << i;
        return n;
      }
    }
    Node::Op op;
    if (id == "sin") {
      op = Node::Op::sin;
    } else if (id == "cos") {
      op = Node::Op::cos;
    } else if (id == "exp") {
      op = Node::Op::exp;
    } else {
      pos_ = start;
      fail("unknown identifier '" + std::string(id) + "'");
    }
    if (!accept('(')) fail("expected '(' after function name");
    NodePtr arg = parse_expr();
    if (!accept(')')) fail("expected ')'");
    return make_unary(op, std::move(arg));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  unsigned used_ = 0;
};

double eval(const Node& n, const VarValues& vars) {
  switch (n.op) {
    case Node::Op::constant: return n.value;
    case Node::Op::variable: return vars[static_cast<std::size_t>(n.var)];
    case Node::Op::neg: return -eval(*n.lhs, vars);
    case Node::Op::add: return eval(*n.lhs, vars) + eval(*n.rhs, vars);
    case Node::Op::sub: return eval(*n.lhs, vars) - eval(*n.rhs, vars);
    case Node::Op::mul: return eval(*n.lhs, vars) * eval(*n.rhs, vars);
    case Node::Op::div: return eval(*n.lhs, vars) / eval(*n.rhs, vars);
    case Node::Op::pow: {
      const double base = eval(*n.lhs, vars);
      const double exponent = eval(*n.rhs, vars);
      // Small integer powers are common (x^2) and std::pow may differ from
      // repeated multiplication in the last bit.
      if (exponent == 2.0) return base * base;
      if (exponent == 3.0) return base * base * base;
      return std::pow(base, exponent);
    }
    case Node::Op::sin: return std::sin(eval(*n.lhs, vars));
    case Node::Op::cos: return std::cos(eval(*n.lhs, vars));
    case Node::Op::exp: return std::exp(eval(*n.lhs, vars));
  }
  return 0.0;
}

using Column = std::vector<double>;

Column eval_batch(const Node& n, std::span<const VarValues> vars) {
  const std::size_t m = vars.size();
  Column out(m);
  auto unary = [&](auto&& fn) {
    Column a = eval_batch(*n.lhs, vars);
    for (std::size_t i = 0; i < m; ++i) out[i] = fn(a[i]);
  };
  auto binary = [&](auto&& fn) {
    Column a = eval_batch(*n.lhs, vars);
    Column b = eval_batch(*n.rhs, vars);
    for (std::size_t i = 0; i < m; ++i) out[i] = fn(a[i], b[i]);
  };
  switch (n.op) {
    case Node::Op::constant: std::fill(out.begin(), out.end(), n.value); break;
    case Node::Op::variable:
      for (std::size_t i = 0; i < m; ++i) out[i] = vars[i][static_cast<std::size_t>(n.var)];
      break;
    case Node::Op::neg: unary([](double a) { return -a; }); break;
    case Node::Op::add: binary([](double a, double b) { return a + b; }); break;
    case Node::Op::sub: binary([](double a, double b) { return a - b; }); break;
    case Node::Op::mul: binary([](double a, double b) { return a * b; }); break;
    case Node::Op::div: binary([](double a, double b) { return a / b; }); break;
    case Node::Op::pow:
      binary([](double base, double exponent) {
        if (exponent == 2.0) return base * base;
        if (exponent == 3.0) return base * base * base;
        return std::pow(base, exponent);
      });
      break;
    case Node::Op::sin: unary([](double a) { return std::sin(a); }); break;
    case Node::Op::cos: unary([](double a) { return std::cos(a); }); break;
    case Node::Op::exp: unary([](double a) { return std::exp(a); }); break;
  }
  return out;
}

}  // namespace

Expression Expression::parse(std::string_view text) {
  Parser parser(text);
  NodePtr root = parser.parse_all();
  return Expression(std::string(text), std::shared_ptr<const Node>(std::move(root)), parser.used());
}

double Expression::evaluate(const VarValues& vars) const { return eval(*root_, vars); }

void Expression::evaluate_batch(std::span<const VarValues> vars, std::span<double> out) const {
  if (out.size() != vars.size()) throw std::invalid_argument("evaluate_batch: size mismatch");
  const Column c = eval_batch(*root_, vars);
  std::copy(c.begin(), c.end(), out.begin());
}

}  // namespace qstate
