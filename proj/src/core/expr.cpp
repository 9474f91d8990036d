#include "expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace jbf::expr {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Parser {
  const std::string& src;
  int arity;
  const std::map<std::string, double>& constants;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  NodePtr make(Node::Kind k, std::size_t begin) {
    auto n = std::make_unique<Node>();
    n->kind = k;
    n->begin = begin;
    n->end = pos;
    return n;
  }

  NodePtr binary(Node::Kind k, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_unique<Node>();
    n->kind = k;
    n->begin = lhs->begin;
    n->end = rhs->end;
    n->args.push_back(std::move(lhs));
    n->args.push_back(std::move(rhs));
    return n;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (eat('+'))
        lhs = binary(Node::Kind::Add, std::move(lhs), parse_term());
      else if (eat('-'))
        lhs = binary(Node::Kind::Sub, std::move(lhs), parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      if (eat('*'))
        lhs = binary(Node::Kind::Mul, std::move(lhs), parse_factor());
      else if (eat('/'))
        lhs = binary(Node::Kind::Div, std::move(lhs), parse_factor());
      else
        return lhs;
    }
  }

  NodePtr parse_factor() {
    NodePtr base = parse_unary();
    if (eat('^')) return binary(Node::Kind::Pow, std::move(base), parse_factor());
    return base;
  }

  NodePtr parse_unary() {
    skip_ws();
    std::size_t begin = pos;
    if (eat('-')) {
      auto n = make(Node::Kind::Neg, begin);
      n->args.push_back(parse_unary());
      n->end = n->args[0]->end;
      return n;
    }
    return parse_primary();
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos >= src.size()) throw SyntaxError("unexpected end of expression", pos);
    std::size_t begin = pos;
    char c = src[pos];

    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();

    if (c == '(') {
      ++pos;
      NodePtr inner = parse_expr();
      if (!eat(')')) throw SyntaxError("expected ')'", pos);
      inner->begin = begin;
      inner->end = pos;
      return inner;
    }

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();

    throw SyntaxError(std::string("unexpected character '") + c + "'", pos);
  }

  NodePtr parse_number() {
    std::size_t begin = pos;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(src.data() + pos, src.data() + src.size(), value);
    if (ec != std::errc())
      throw SyntaxError("malformed number", begin);
    pos = static_cast<std::size_t>(ptr - src.data());
    auto n = make(Node::Kind::Num, begin);
    n->num = value;
    return n;
  }

  NodePtr parse_ident() {
    std::size_t begin = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
      ++pos;
    std::string name = src.substr(begin, pos - begin);

    static const std::map<std::string, Func> funcs = {
        {"exp", Func::Exp},  {"log", Func::Log},   {"sin", Func::Sin},
        {"cos", Func::Cos},  {"sqrt", Func::Sqrt}, {"tanh", Func::Tanh},
        {"pow", Func::Pow}};

    if (auto it = funcs.find(name); it != funcs.end() && peek() == '(') {
      eat('(');
      auto n = make(Node::Kind::Call, begin);
      n->func = it->second;
      n->args.push_back(parse_expr());
      while (eat(',')) n->args.push_back(parse_expr());
      if (!eat(')')) throw SyntaxError("expected ')'", pos);
      n->end = pos;
      const std::size_t want = it->second == Func::Pow ? 2 : 1;
      if (n->args.size() != want)
        throw SyntaxError(name + " takes " + std::to_string(want) + " argument(s)", begin);
      return n;
    }

    auto var = [&](VarKind k, int idx = 0) {
      auto n = make(Node::Kind::Var, begin);
      n->var = k;
      n->uindex = idx;
      return n;
    };

    if (name == "t") return var(VarKind::T);
    if (name == "x") return var(VarKind::X);
    if (name == "s") return var(VarKind::S);
    if (name == "pi") {
      auto n = make(Node::Kind::Num, begin);
      n->num = kPi;
      return n;
    }
    if (name.size() > 1 && name[0] == 'u' &&
        std::all_of(name.begin() + 1, name.end(),
                    [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      int idx = std::stoi(name.substr(1));
      if (idx < 1 || idx > arity)
        throw SyntaxError("variable " + name + " out of range for arity " +
                              std::to_string(arity),
                          begin);
      return var(VarKind::U, idx - 1);
    }
    if (auto it = constants.find(name); it != constants.end()) {
      auto n = make(Node::Kind::Num, begin);
      n->num = it->second;
      return n;
    }
    throw SyntaxError("unknown identifier '" + name + "'", begin);
  }
};

int precedence(Node::Kind k) {
  switch (k) {
    case Node::Kind::Add:
    case Node::Kind::Sub: return 1;
    case Node::Kind::Mul:
    case Node::Kind::Div: return 2;
    case Node::Kind::Neg: return 3;
    case Node::Kind::Pow: return 4;
    default: return 5;
  }
}

void print_rec(const Node& n, std::string& out, int parent_prec, bool rhs) {
  const int prec = precedence(n.kind);
  const bool parens = prec < parent_prec || (prec == parent_prec && rhs && prec <= 2);
  if (parens) out += '(';
  switch (n.kind) {
    case Node::Kind::Num: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.num);
      if (n.num < 0.0) {
        out += '(';
        out += buf;
        out += ')';
      } else {
        out += buf;
      }
      break;
    }
    case Node::Kind::Var:
      switch (n.var) {
        case VarKind::T: out += 't'; break;
        case VarKind::X: out += 'x'; break;
        case VarKind::S: out += 's'; break;
        case VarKind::U: out += 'u' + std::to_string(n.uindex + 1); break;
      }
      break;
    case Node::Kind::Neg:
      out += '-';
      print_rec(*n.args[0], out, precedence(Node::Kind::Neg), true);
      break;
    case Node::Kind::Add:
    case Node::Kind::Sub:
    case Node::Kind::Mul:
    case Node::Kind::Div: {
      print_rec(*n.args[0], out, prec, false);
      out += n.kind == Node::Kind::Add   ? '+'
             : n.kind == Node::Kind::Sub ? '-'
             : n.kind == Node::Kind::Mul ? '*'
                                         : '/';
      print_rec(*n.args[1], out, prec, true);
      break;
    }
    case Node::Kind::Pow:
      print_rec(*n.args[0], out, prec + 1, false);
      out += '^';
      print_rec(*n.args[1], out, prec, false);
      break;
    case Node::Kind::Call: {
      static const char* names[] = {"exp", "log", "sin", "cos", "sqrt", "tanh", "pow"};
      out += names[static_cast<int>(n.func)];
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ',';
        print_rec(*n.args[i], out, 0, false);
      }
      out += ')';
      break;
    }
  }
  if (parens) out += ')';
}

void collect_vars(const Node& n, UsedVars& uv) {
  if (n.kind == Node::Kind::Var) {
    switch (n.var) {
      case VarKind::T: uv.t = true; break;
      case VarKind::X: uv.x = true; break;
      case VarKind::S: uv.s = true; break;
      case VarKind::U: uv.u[static_cast<std::size_t>(n.uindex)] = true; break;
    }
  }
  for (const auto& a : n.args) collect_vars(*a, uv);
}

}  // namespace

NodePtr parse(const std::string& src, int arity,
              const std::map<std::string, double>& constants) {
  if (src.empty()) throw SyntaxError("empty expression", 0);
  if (arity < 0) throw InputError("negative arity");
  Parser p{src, arity, constants};
  NodePtr root = p.parse_expr();
  p.skip_ws();
  if (p.pos != src.size()) throw SyntaxError("trailing input", p.pos);
  return root;
}

std::string print(const Node& node) {
  std::string out;
  print_rec(node, out, 0, false);
  return out;
}

UsedVars used_vars(const Node& node, int arity) {
  UsedVars uv;
  uv.u.assign(static_cast<std::size_t>(arity), false);
  collect_vars(node, uv);
  return uv;
}

}  // namespace jbf::expr
