#include "plinf/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "plinf/csv.hpp"

namespace plinf {

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

struct BoundaryExpr::Node {
  enum class Op { number, variable, add, sub, mul, div, pow, neg, abs, min, max } op = Op::number;
  double value = 0.0;
  Index var = 0;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

namespace {

using Node = BoundaryExpr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, Index dim) : s_(text), dim_(dim) {}

  NodePtr run() {
    skip();
    if (pos_ >= s_.size()) fail("empty expression");
    NodePtr e = expr();
    skip();
    if (pos_ < s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { fail_at(what, pos_); }

  [[noreturn]] void fail_at(const std::string& what, std::size_t at) const {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < at && i < s_.size(); ++i) {
      if (s_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(what, line, col);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (true) {
      if (accept('+')) {
        lhs = make(Node::Op::add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Node::Op::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (true) {
      if (accept('*')) {
        lhs = make(Node::Op::mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Node::Op::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Node::Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      NodePtr e = expr();
      expect(')');
      return e;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Node>();
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      std::vector<NodePtr> args;
      if (!accept(')')) {
        do {
          args.push_back(expr());
        } while (accept(','));
        expect(')');
      }
      auto arity = [&](std::size_t want) {
        if (args.size() != want) {
          fail_at(name + " expects " + std::to_string(want) + " argument" + (want == 1 ? "" : "s") + ", got " +
                      std::to_string(args.size()),
                  start);
        }
      };
      if (name == "abs") {
        arity(1);
        return make(Node::Op::abs, args[0]);
      }
      if (name == "min" || name == "max" || name == "pow") {
        arity(2);
        const Node::Op op = name == "min" ? Node::Op::min : name == "max" ? Node::Op::max : Node::Op::pow;
        return make(op, args[0], args[1]);
      }
      fail_at("unknown function '" + name + "'", start);
    }
    if (name == "pi") {
      auto n = std::make_shared<Node>();
      n->value = std::numbers::pi;
      return n;
    }
    if (name.size() > 1 && name[0] == 'x' && name.find_first_not_of("0123456789", 1) == std::string::npos) {
      const long k = std::strtol(name.c_str() + 1, nullptr, 10);
      if (k >= 1 && k <= dim_) {
        auto n = std::make_shared<Node>();
        n->op = Node::Op::variable;
        n->var = static_cast<Index>(k - 1);
        return n;
      }
    }
    fail_at("unknown identifier '" + name + "'", start);
  }

  const std::string& s_;
  Index dim_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, const Point& x) {
  using Op = Node::Op;
  switch (n.op) {
    case Op::number:
      return n.value;
    case Op::variable:
      return x[n.var];
    case Op::neg:
      return -eval(*n.a, x);
    case Op::abs:
      return std::abs(eval(*n.a, x));
    default:
      break;
  }
  const double a = eval(*n.a, x);
  const double b = eval(*n.b, x);
  double r = 0.0;
  switch (n.op) {
    case Op::add: r = a + b; break;
    case Op::sub: r = a - b; break;
    case Op::mul: r = a * b; break;
    case Op::div:
      if (b == 0.0) throw std::domain_error("division by zero");
      r = a / b;
      break;
    case Op::pow:
      if (a == 0.0 && b < 0.0) throw std::domain_error("zero raised to a negative power");
      r = std::pow(a, b);
      break;
    case Op::min: r = std::min(a, b); break;
    case Op::max: r = std::max(a, b); break;
    default: break;
  }
  if (!std::isfinite(r)) throw std::domain_error("non-finite intermediate value");
  return r;
}

}  // namespace

BoundaryExpr BoundaryExpr::parse(const std::string& text, Index dim) {
  if (dim < 1) throw std::invalid_argument("expression dimension must be positive");
  BoundaryExpr e;
  e.text_ = text;
  e.dim_ = dim;
  e.root_ = Parser(e.text_, dim).run();
  return e;
}

double BoundaryExpr::operator()(const Point& x) const {
  if (x.size() != dim_) throw std::invalid_argument("point dimension does not match expression");
  return eval(*root_, x);
}

void BoundaryExpr::check_total(const Box& box, int per_axis) const {
  if (box.dim() != dim_) throw std::invalid_argument("box dimension does not match expression");
  per_axis = std::max(per_axis, 2);
  Eigen::VectorXi mi = Eigen::VectorXi::Zero(dim_);
  Point x(dim_);
  while (true) {
    for (Index k = 0; k < dim_; ++k) {
      const double t = static_cast<double>(mi[k]) / static_cast<double>(per_axis - 1);
      x[k] = box.lower[k] + t * (box.upper[k] - box.lower[k]);
    }
    try {
      (void)eval(*root_, x);
    } catch (const std::domain_error& err) {
      std::ostringstream msg;
      msg << "expression '" << text_ << "' is not defined at (";
      for (Index k = 0; k < dim_; ++k) msg << (k ? ", " : "") << format_number(x[k]);
      msg << "): " << err.what();
      throw std::domain_error(msg.str());
    }
    Index k = dim_ - 1;
    while (k >= 0 && mi[k] == per_axis - 1) {
      mi[k] = 0;
      --k;
    }
    if (k < 0) return;
    ++mi[k];
  }
}

}  // namespace plinf
