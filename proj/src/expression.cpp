#include "velavg/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "velavg/errors.hpp"

namespace velavg {

struct Expression::Node {
  enum class Kind { number, variable, unary, binary, call } kind;
  double value = 0.0;
  int variable = 0;
  char op = 0;
  std::string name;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(const ExpressionVars& v) const {
    switch (kind) {
      case Kind::number:
        return value;
      case Kind::variable:
        switch (variable) {
          case 0: return v.lambda;
          case 1: return v.t;
          case 2: return v.x1;
          case 3: return v.x2;
          default: return v.s;
        }
      case Kind::unary:
        return -args[0]->eval(v);
      case Kind::binary: {
        const double a = args[0]->eval(v);
        const double b = args[1]->eval(v);
        switch (op) {
          case '+': return a + b;
          case '-': return a - b;
          case '*': return a * b;
          case '/': return a / b;
          default: return std::pow(a, b);
        }
      }
      case Kind::call: {
        const double a = args[0]->eval(v);
        if (name == "abs") return std::abs(a);
        if (name == "sqrt") return std::sqrt(a);
        if (name == "exp") return std::exp(a);
        if (name == "log") return std::log(a);
        if (name == "sin") return std::sin(a);
        if (name == "cos") return std::cos(a);
        if (name == "tanh") return std::tanh(a);
        if (name == "sign") return a > 0 ? 1.0 : (a < 0 ? -1.0 : 0.0);
        const double b = args[1]->eval(v);
        return name == "min" ? std::min(a, b) : std::max(a, b);
      }
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw ValidationError("cannot parse expression '" + s_ + "' at offset " +
                          std::to_string(pos_) + ": " + why);
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
  static NodePtr make(Kind k, char op, std::vector<NodePtr> args, std::string name = {}) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = k;
    n->op = op;
    n->args = std::move(args);
    n->name = std::move(name);
    return n;
  }

  NodePtr sum() {
    NodePtr lhs = product();
    for (;;) {
      if (accept('+')) {
        lhs = make(Kind::binary, '+', {lhs, product()});
      } else if (accept('-')) {
        lhs = make(Kind::binary, '-', {lhs, product()});
      } else {
        return lhs;
      }
    }
  }
  NodePtr product() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Kind::binary, '*', {lhs, unary()});
      } else if (accept('/')) {
        lhs = make(Kind::binary, '/', {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Kind::unary, '-', {unary()});
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Kind::binary, '^', {base, unary()});
    return base;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (accept('(')) {
      NodePtr n = sum();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      const double v = std::stod(s_.substr(pos_), &used);
      pos_ += used;
      auto n = std::make_shared<Expression::Node>();
      n->kind = Kind::number;
      n->value = v;
      return n;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected character");
    std::string word;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      word += s_[pos_++];
    }
    auto var = std::make_shared<Expression::Node>();
    var->kind = Kind::variable;
    if (word == "lambda" || word == "l") return var->variable = 0, var;
    if (word == "t") return var->variable = 1, var;
    if (word == "x" || word == "x1") return var->variable = 2, var;
    if (word == "y" || word == "x2") return var->variable = 3, var;
    if (word == "s") return var->variable = 4, var;
    if (word == "pi") {
      var->kind = Kind::number;
      var->value = std::numbers::pi;
      return var;
    }
    static const std::vector<std::string> unary_fns = {"abs", "sqrt", "exp", "log", "sin",
                                                       "cos", "tanh", "sign"};
    const bool is_unary = std::find(unary_fns.begin(), unary_fns.end(), word) != unary_fns.end();
    const bool is_binary = word == "min" || word == "max";
    if (!is_unary && !is_binary) fail("unknown name '" + word + "'");
    if (!accept('(')) fail("expected '(' after " + word);
    std::vector<NodePtr> args{sum()};
    if (is_binary) {
      if (!accept(',')) fail("expected ',' in " + word);
      args.push_back(sum());
    }
    if (!accept(')')) fail("missing ')' after arguments of " + word);
    return make(Kind::call, 0, std::move(args), word);
  }
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text), root_(Parser(text).parse()) {}

double Expression::operator()(const ExpressionVars& vars) const { return root_->eval(vars); }

}  // namespace velavg
