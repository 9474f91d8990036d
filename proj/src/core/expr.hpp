#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dual.hpp"
#include "errors.hpp"

// Recursive-descent expression parser and templated evaluator.
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?          (right associative)
//   unary  := '-' unary | primary
//   primary:= number | ident | func '(' expr (',' expr)* ')' | '(' expr ')'
//   ident  := 'u'digit+ | 't' | 'x' | 's' | 'pi' | named constant
//   func   := exp | log | sin | cos | sqrt | tanh | pow

namespace jbf::expr {

enum class VarKind { T, X, S, U };
enum class Func { Exp, Log, Sin, Cos, Sqrt, Tanh, Pow };

struct Node {
  enum class Kind { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call } kind;
  double num = 0.0;
  VarKind var = VarKind::T;
  int uindex = 0;  // 0-based, Var with var==U
  Func func = Func::Exp;
  std::vector<std::unique_ptr<Node>> args;
  std::size_t begin = 0, end = 0;  // byte span in source
};

using NodePtr = std::unique_ptr<Node>;

// Variable bindings for one evaluation.
template <class T>
struct Env {
  T t{};
  T x{};
  T s{};
  std::vector<T> u;
};

// Thrown with the byte offset of the failure.
struct SyntaxError : InputError {
  std::size_t offset;
  SyntaxError(const std::string& msg, std::size_t off)
      : InputError(msg + " at byte " + std::to_string(off)), offset(off) {}
};

// Parses `src`; `arity` bounds the allowed u-indices; `constants` are
// substituted as literals.
NodePtr parse(const std::string& src, int arity,
              const std::map<std::string, double>& constants = {});

std::string print(const Node& node);

struct UsedVars {
  bool t = false, x = false, s = false;
  std::vector<bool> u;  // size = arity
};
UsedVars used_vars(const Node& node, int arity);

namespace detail {

template <class T>
T ipow(const T& base, long n) {
  if (n < 0) return T(1.0) / ipow(base, -n);
  T r(1.0);
  T b = base;
  while (n > 0) {
    if (n & 1) r = r * b;
    b = b * b;
    n >>= 1;
  }
  return r;
}

inline double rpow(double a, double b) {
  if (a < 0.0) throw DomainError("negative base with non-integer exponent");
  if (a == 0.0 && b <= 0.0) throw DomainError("zero base with non-positive exponent");
  return std::pow(a, b);
}
template <class T>
T rpow(const T& a, const T& b) {
  if (value_of(a) <= 0.0)
    throw DomainError("non-positive base with non-integer exponent");
  using std::exp;
  using std::log;
  using jbf::exp;
  using jbf::log;
  return exp(b * log(a));
}

inline bool is_integer(double x) { return x == std::floor(x) && std::abs(x) < 1e15; }

}  // namespace detail

template <class T>
T eval(const Node& node, const Env<T>& env, const std::string& source) {
  using std::exp; using std::log; using std::sin; using std::cos;
  using std::sqrt; using std::tanh;
  using jbf::exp; using jbf::log; using jbf::sin; using jbf::cos;
  using jbf::sqrt; using jbf::tanh;
  try {
    switch (node.kind) {
      case Node::Kind::Num:
        return T(node.num);
      case Node::Kind::Var:
        switch (node.var) {
          case VarKind::T: return env.t;
          case VarKind::X: return env.x;
          case VarKind::S: return env.s;
          case VarKind::U: return env.u.at(static_cast<std::size_t>(node.uindex));
        }
        break;
      case Node::Kind::Neg:
        return -eval(*node.args[0], env, source);
      case Node::Kind::Add:
        return eval(*node.args[0], env, source) + eval(*node.args[1], env, source);
      case Node::Kind::Sub:
        return eval(*node.args[0], env, source) - eval(*node.args[1], env, source);
      case Node::Kind::Mul:
        return eval(*node.args[0], env, source) * eval(*node.args[1], env, source);
      case Node::Kind::Div: {
        T num = eval(*node.args[0], env, source);
        T den = eval(*node.args[1], env, source);
        if (value_of(den) == 0.0) throw DomainError("division by zero");
        return num / den;
      }
      case Node::Kind::Pow: {
        const Node& e = *node.args[1];
        T base = eval(*node.args[0], env, source);
        if (e.kind == Node::Kind::Num && detail::is_integer(e.num))
          return detail::ipow(base, static_cast<long>(e.num));
        return detail::rpow(base, eval(e, env, source));
      }
      case Node::Kind::Call: {
        if (node.func == Func::Pow) {
          const Node& e = *node.args[1];
          T base = eval(*node.args[0], env, source);
          if (e.kind == Node::Kind::Num && detail::is_integer(e.num))
            return detail::ipow(base, static_cast<long>(e.num));
          return detail::rpow(base, eval(e, env, source));
        }
        T a = eval(*node.args[0], env, source);
        switch (node.func) {
          case Func::Exp: return exp(a);
          case Func::Log:
            if (value_of(a) <= 0.0) throw DomainError("log of non-positive value");
            return log(a);
          case Func::Sin: return sin(a);
          case Func::Cos: return cos(a);
          case Func::Sqrt: return sqrt(a);
          case Func::Tanh: return tanh(a);
          case Func::Pow: break;
        }
        break;
      }
    }
  } catch (const DomainError& e) {
    // Annotate with the innermost offending subexpression once.
    const std::string what = e.what();
    if (what.find(" in '") == std::string::npos)
      throw DomainError(what + " in '" +
                        source.substr(node.begin, node.end - node.begin) + "'");
    throw;
  }
  throw DomainError("unreachable expression node");
}

}  // namespace jbf::expr
