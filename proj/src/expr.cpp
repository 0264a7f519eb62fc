#include "pathwise/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <utility>
#include <vector>

namespace pathwise {

namespace {

struct Node {
  virtual ~Node() = default;
  virtual double eval(double x) const = 0;
};
using NodePtr = std::shared_ptr<const Node>;

struct Const final : Node {
  double v;
  explicit Const(double c) : v(c) {}
  double eval(double) const override { return v; }
};

struct Var final : Node {
  double eval(double x) const override { return x; }
};

struct Unary final : Node {
  double (*fn)(double);
  NodePtr a;
  Unary(double (*f)(double), NodePtr n) : fn(f), a(std::move(n)) {}
  double eval(double x) const override { return fn(a->eval(x)); }
};

struct Binary final : Node {
  char op;
  NodePtr a, b;
  Binary(char o, NodePtr l, NodePtr r) : op(o), a(std::move(l)), b(std::move(r)) {}
  double eval(double x) const override {
    const double l = a->eval(x), r = b->eval(x);
    switch (op) {
      case '+': return l + r;
      case '-': return l - r;
      case '*': return l * r;
      case '/': return l / r;
      default: return std::pow(l, r);
    }
  }
};

class Parser {
 public:
  explicit Parser(const std::string& s) : src_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  const std::string& src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) {
    throw validation_error("expression error at position " + std::to_string(pos_) +
                           " in \"" + src_ + "\": " + what);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace((unsigned char)src_[pos_])) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (eat('+')) n = std::make_shared<Binary>('+', n, term());
      else if (eat('-')) n = std::make_shared<Binary>('-', n, term());
      else return n;
    }
  }

  NodePtr term() {
    NodePtr n = factor();
    for (;;) {
      if (eat('*')) n = std::make_shared<Binary>('*', n, factor());
      else if (eat('/')) n = std::make_shared<Binary>('/', n, factor());
      else return n;
    }
  }

  NodePtr factor() {
    NodePtr n = unary();
    if (eat('^')) n = std::make_shared<Binary>('^', n, factor());
    return n;
  }

  NodePtr unary() {
    if (eat('-')) {
      NodePtr n = unary();
      return std::make_shared<Binary>('-', std::make_shared<Const>(0.0), n);
    }
    return primary();
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];

    if (std::isdigit((unsigned char)c) || c == '.') {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += (std::size_t)(end - begin);
      return std::make_shared<Const>(v);
    }

    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!eat(')')) fail("missing ')'");
      return n;
    }

    if (std::isalpha((unsigned char)c)) {
      std::size_t j = pos_;
      while (j < src_.size() &&
             (std::isalnum((unsigned char)src_[j]) || src_[j] == '_'))
        ++j;
      const std::string name = src_.substr(pos_, j - pos_);
      pos_ = j;
      if (name == "x") return std::make_shared<Var>();
      if (name == "pi") return std::make_shared<Const>(3.14159265358979323846);
      if (name == "e") return std::make_shared<Const>(2.71828182845904523536);

      static const std::pair<const char*, double (*)(double)> funcs[] = {
          {"sqrt", [](double y) { return std::sqrt(y); }},
          {"exp", [](double y) { return std::exp(y); }},
          {"log", [](double y) { return std::log(y); }},
          {"tanh", [](double y) { return std::tanh(y); }},
          {"sinh", [](double y) { return std::sinh(y); }},
          {"cosh", [](double y) { return std::cosh(y); }},
          {"sin", [](double y) { return std::sin(y); }},
          {"cos", [](double y) { return std::cos(y); }},
          {"abs", [](double y) { return std::fabs(y); }},
          {"max0", [](double y) { return y > 0.0 ? y : 0.0; }},
      };
      for (const auto& [fname, fn] : funcs) {
        if (name == fname) {
          if (!eat('(')) fail("expected '(' after function name");
          NodePtr arg = expr();
          if (!eat(')')) fail("missing ')'");
          return std::make_shared<Unary>(fn, arg);
        }
      }
      fail("unknown identifier '" + name + "' (only variable x and known functions)");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

std::function<double(double)> compile_expression(const std::string& source) {
  Parser p(source);
  NodePtr root = p.parse();
  return [root](double x) { return root->eval(x); };
}

}  // namespace pathwise
