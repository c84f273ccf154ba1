#include "hedonic/expression.hpp"

#include "hedonic/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

namespace hedonic {

struct Expression::Node {
  enum Kind { kConst, kVar, kNeg, kAdd, kSub, kMul, kDiv, kPow, kCall } kind = kConst;
  double value = 0.0;
  int var = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;

  double eval(const Vector& x) const {
    switch (kind) {
      case kConst: return value;
      case kVar: return x(var);
      case kNeg: return -a->eval(x);
      case kAdd: return a->eval(x) + b->eval(x);
      case kSub: return a->eval(x) - b->eval(x);
      case kMul: return a->eval(x) * b->eval(x);
      case kDiv: return a->eval(x) / b->eval(x);
      case kPow: {
        const double base = a->eval(x);
        const double ex = b->eval(x);
        if (ex == 2.0) return base * base;
        return std::pow(base, ex);
      }
      case kCall: return fn(a->eval(x));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

struct FunctionEntry {
  std::string_view name;
  double (*fn)(double);
};

const FunctionEntry kFunctions[] = {
    {"exp", [](double v) { return std::exp(v); }},   {"log", [](double v) { return std::log(v); }},
    {"sqrt", [](double v) { return std::sqrt(v); }}, {"sin", [](double v) { return std::sin(v); }},
    {"cos", [](double v) { return std::cos(v); }},   {"tan", [](double v) { return std::tan(v); }},
    {"sinh", [](double v) { return std::sinh(v); }}, {"cosh", [](double v) { return std::cosh(v); }},
    {"tanh", [](double v) { return std::tanh(v); }}, {"abs", [](double v) { return std::abs(v); }},
};

class Parser {
 public:
  Parser(std::string_view text, const Expression::Resolver& resolve)
      : text_(text), resolve_(resolve) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kInvalidArgument,
                "expression column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr make(Expression::Node::Kind k, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Expression::Node::kAdd, lhs, term());
      else if (accept('-')) lhs = make(Expression::Node::kSub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Expression::Node::kMul, lhs, unary());
      else if (accept('/')) lhs = make(Expression::Node::kDiv, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Expression::Node::kNeg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Expression::Node::kPow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (accept('(')) {
      NodePtr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    double v = 0.0;
    const char* begin = text_.data() + pos_;
    const auto [end, ec] = std::from_chars(begin, text_.data() + text_.size(), v);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<size_t>(end - begin);
    auto n = std::make_shared<Expression::Node>();
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      for (const auto& f : kFunctions) {
        if (f.name == name) {
          ++pos_;
          NodePtr arg = expr();
          if (!accept(')')) fail("expected ')' after argument of " + std::string(name));
          auto n = std::make_shared<Expression::Node>();
          n->kind = Expression::Node::kCall;
          n->fn = f.fn;
          n->a = std::move(arg);
          return n;
        }
      }
      pos_ = start;
      fail("unknown function '" + std::string(name) + "'");
    }
    auto n = std::make_shared<Expression::Node>();
    if (name == "pi") {
      n->value = std::numbers::pi;
      return n;
    }
    if (name == "e") {
      n->value = std::numbers::e;
      return n;
    }
    const auto idx = resolve_(name);
    if (!idx) {
      pos_ = start;
      fail("unknown variable '" + std::string(name) + "'");
    }
    n->kind = Expression::Node::kVar;
    n->var = *idx;
    return n;
  }

  std::string_view text_;
  const Expression::Resolver& resolve_;
  size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text, const Resolver& resolve) {
  Expression e;
  e.root_ = Parser(text, resolve).parse();
  e.text_ = std::string(text);
  return e;
}

double Expression::operator()(const Vector& args) const { return root_->eval(args); }

Expression::Resolver block_resolver(char a_name, int n) {
  return [a_name, n](std::string_view name) -> std::optional<int> {
    if (name.empty()) return std::nullopt;
    const char head = name[0];
    int offset = 0;
    if (head == a_name) offset = 0;
    else if (head == 'z') offset = n;
    else return std::nullopt;
    std::string_view rest = name.substr(1);
    if (rest.empty()) return n == 1 ? std::optional<int>(offset) : std::nullopt;
    if (rest[0] == '_') rest = rest.substr(1);
    int i = 0;
    const auto [end, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), i);
    if (ec != std::errc() || end != rest.data() + rest.size() || i < 1 || i > n) {
      return std::nullopt;
    }
    return offset + i - 1;
  };
}

}  // namespace hedonic
