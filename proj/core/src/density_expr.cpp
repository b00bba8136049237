// Tiny recursive-descent parser for density expressions such as
// "1 + x1*x2" or "exp(-(x-0.5)^2)".
#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "normot/error.hpp"
#include "normot/measures.hpp"

namespace normot {

namespace {

using Fn = std::function<double(const Vec&)>;

class Parser {
 public:
  Parser(std::string src, int dim) : s_(std::move(src)), dim_(dim) {}

  Fn parse() {
    Fn f = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw Error(ErrorKind::Parse, "density expression: " + msg + " at position " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Fn expr() {
    Fn lhs = term();
    while (true) {
      if (eat('+')) {
        Fn r = term();
        lhs = [lhs, r](const Vec& x) { return lhs(x) + r(x); };
      } else if (eat('-')) {
        Fn r = term();
        lhs = [lhs, r](const Vec& x) { return lhs(x) - r(x); };
      } else {
        return lhs;
      }
    }
  }

  Fn term() {
    Fn lhs = unary();
    while (true) {
      if (eat('*')) {
        Fn r = unary();
        lhs = [lhs, r](const Vec& x) { return lhs(x) * r(x); };
      } else if (eat('/')) {
        Fn r = unary();
        lhs = [lhs, r](const Vec& x) { return lhs(x) / r(x); };
      } else {
        return lhs;
      }
    }
  }

  Fn unary() {
    if (eat('-')) {
      Fn f = unary();
      return [f](const Vec& x) { return -f(x); };
    }
    if (eat('+')) return unary();
    return power();
  }

  Fn power() {
    Fn base = primary();
    if (eat('^')) {
      Fn e = unary();
      return [base, e](const Vec& x) { return std::pow(base(x), e(x)); };
    }
    return base;
  }

  Fn primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Fn f = expr();
      if (!eat(')')) fail("expected ')'");
      return f;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos_ += static_cast<size_t>(end - begin);
      return [v](const Vec&) { return v; };
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t b = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string name = s_.substr(b, pos_ - b);
      if (eat('(')) return call(name);
      return variable(name);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Fn call(const std::string& name) {
    Fn a = expr();
    if (name == "min" || name == "max") {
      if (!eat(',')) fail("expected ',' in " + name);
      Fn b = expr();
      if (!eat(')')) fail("expected ')'");
      if (name == "min") return [a, b](const Vec& x) { return std::min(a(x), b(x)); };
      return [a, b](const Vec& x) { return std::max(a(x), b(x)); };
    }
    if (!eat(')')) fail("expected ')'");
    double (*f)(double) = nullptr;
    if (name == "exp") f = [](double v) { return std::exp(v); };
    else if (name == "log") f = [](double v) { return std::log(v); };
    else if (name == "sqrt") f = [](double v) { return std::sqrt(v); };
    else if (name == "abs") f = [](double v) { return std::abs(v); };
    else if (name == "sin") f = [](double v) { return std::sin(v); };
    else if (name == "cos") f = [](double v) { return std::cos(v); };
    else if (name == "tan") f = [](double v) { return std::tan(v); };
    else fail("unknown function " + name);
    return [a, f](const Vec& x) { return f(a(x)); };
  }

  Fn variable(const std::string& name) {
    if (name == "pi") return [](const Vec&) { return std::numbers::pi; };
    if (name == "e") return [](const Vec&) { return std::numbers::e; };
    int idx = -1;
    if (name == "x") idx = 0;
    else if (name == "y") idx = 1;
    else if (name == "z") idx = 2;
    else if (name.size() >= 2 && name[0] == 'x' &&
             name.find_first_not_of("0123456789", 1) == std::string::npos)
      idx = std::stoi(name.substr(1)) - 1;
    if (idx < 0 || idx >= dim_) fail("unknown variable " + name);
    return [idx](const Vec& x) { return x(idx); };
  }

  std::string s_;
  int dim_;
  size_t pos_ = 0;
};

}  // namespace

Density parse_density(const std::string& spec, int dim) {
  if (spec.empty() || spec == "uniform") return [](const Vec&) { return 1.0; };
  return Parser(spec, dim).parse();
}

}  // namespace normot
