#include "lagrflow/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <utility>
#include <vector>

namespace lagrflow {

namespace {

ExprPtr node(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

bool is_number(const ExprPtr& e, double v) {
  return e->kind == ExprKind::Number && e->number == v;
}

}  // namespace

ExprPtr make_number(double value) {
  Expr e;
  e.kind = ExprKind::Number;
  e.number = value;
  return node(std::move(e));
}

ExprPtr make_symbol(std::string name) {
  Expr e;
  e.kind = ExprKind::Symbol;
  e.symbol = std::move(name);
  return node(std::move(e));
}

ExprPtr make_add(ExprPtr a, ExprPtr b) {
  if (is_number(a, 0.0)) return b;
  if (is_number(b, 0.0)) return a;
  if (a->kind == ExprKind::Number && b->kind == ExprKind::Number)
    return make_number(a->number + b->number);
  Expr e;
  e.kind = ExprKind::Add;
  e.a = std::move(a);
  e.b = std::move(b);
  return node(std::move(e));
}

ExprPtr make_sub(ExprPtr a, ExprPtr b) {
  if (is_number(b, 0.0)) return a;
  if (a->kind == ExprKind::Number && b->kind == ExprKind::Number)
    return make_number(a->number - b->number);
  if (is_number(a, 0.0)) return make_neg(std::move(b));
  Expr e;
  e.kind = ExprKind::Sub;
  e.a = std::move(a);
  e.b = std::move(b);
  return node(std::move(e));
}

ExprPtr make_mul(ExprPtr a, ExprPtr b) {
  if (is_number(a, 0.0) || is_number(b, 0.0)) return make_number(0.0);
  if (is_number(a, 1.0)) return b;
  if (is_number(b, 1.0)) return a;
  if (a->kind == ExprKind::Number && b->kind == ExprKind::Number)
    return make_number(a->number * b->number);
  Expr e;
  e.kind = ExprKind::Mul;
  e.a = std::move(a);
  e.b = std::move(b);
  return node(std::move(e));
}

ExprPtr make_div(ExprPtr a, ExprPtr b) {
  if (is_number(a, 0.0) && !is_number(b, 0.0)) return make_number(0.0);
  if (is_number(b, 1.0)) return a;
  if (a->kind == ExprKind::Number && b->kind == ExprKind::Number &&
      b->number != 0.0) {
    const double q = a->number / b->number;
    if (std::isfinite(q)) return make_number(q);
  }
  Expr e;
  e.kind = ExprKind::Div;
  e.a = std::move(a);
  e.b = std::move(b);
  return node(std::move(e));
}

ExprPtr make_neg(ExprPtr a) {
  if (a->kind == ExprKind::Number) return make_number(-a->number);
  if (a->kind == ExprKind::Neg) return a->a;
  Expr e;
  e.kind = ExprKind::Neg;
  e.a = std::move(a);
  return node(std::move(e));
}

ExprPtr make_pow(ExprPtr a, int exponent) {
  if (exponent == 0) return make_number(1.0);
  if (exponent == 1) return a;
  if (a->kind == ExprKind::Number)
    return make_number(pow_int(a->number, exponent));
  Expr e;
  e.kind = ExprKind::Pow;
  e.exponent = exponent;
  e.a = std::move(a);
  return node(std::move(e));
}

ExprPtr make_call(Func1 f, ExprPtr a) {
  Expr e;
  e.kind = ExprKind::Call1;
  e.func = f;
  e.a = std::move(a);
  return node(std::move(e));
}

ExprPtr make_atan2(ExprPtr y, ExprPtr x) {
  Expr e;
  e.kind = ExprKind::Call2;
  e.a = std::move(y);
  e.b = std::move(x);
  return node(std::move(e));
}

const std::set<std::string>& standard_variables() {
  static const std::set<std::string> vars = {"t", "z1", "z2", "z3", "s"};
  return vars;
}

// ---------------------------------------------------------------------------
// Parser: recursive descent, byte-accurate error offsets.
// ---------------------------------------------------------------------------

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  const std::set<std::string>* symbols;

  void skip_ws() {
    while (pos < text.size() &&
           std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  [[noreturn]] void fail(const std::string& what) {
    throw ParseError(what, pos);
  }

  ExprPtr parse_full() {
    ExprPtr e = parse_sum();
    skip_ws();
    if (pos != text.size()) fail("unexpected trailing input");
    return e;
  }

  ExprPtr parse_sum() {
    ExprPtr left = parse_product();
    for (;;) {
      if (eat('+')) {
        left = make_add(left, parse_product());
      } else if (peek() == '-') {
        ++pos;
        left = make_sub(left, parse_product());
      } else {
        return left;
      }
    }
  }

  ExprPtr parse_product() {
    ExprPtr left = parse_unary();
    for (;;) {
      if (eat('*')) {
        left = make_mul(left, parse_unary());
      } else if (eat('/')) {
        left = make_div(left, parse_unary());
      } else {
        return left;
      }
    }
  }

  ExprPtr parse_unary() {
    if (eat('-')) return make_neg(parse_unary());
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    if (eat('^')) {
      skip_ws();
      const std::size_t at = pos;
      bool neg = false;
      if (pos < text.size() && text[pos] == '-') {
        neg = true;
        ++pos;
      }
      if (pos >= text.size() ||
          !std::isdigit(static_cast<unsigned char>(text[pos]))) {
        pos = at;
        fail("exponent must be an integer literal");
      }
      long value = 0;
      while (pos < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[pos]))) {
        value = value * 10 + (text[pos] - '0');
        if (value > 64) {
          pos = at;
          fail("exponent magnitude limited to 64");
        }
        ++pos;
      }
      return make_pow(base, static_cast<int>(neg ? -value : value));
    }
    return base;
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of expression");
    const char c = text[pos];
    if (c == '(') {
      ++pos;
      ExprPtr inner = parse_sum();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (c >= 'a' && c <= 'z') return parse_identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  ExprPtr parse_number() {
    const std::size_t start = pos;
    while (pos < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[pos])))
      ++pos;
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      while (pos < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[pos])))
        ++pos;
    }
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      std::size_t ep = pos + 1;
      if (ep < text.size() && (text[ep] == '+' || text[ep] == '-')) ++ep;
      if (ep < text.size() &&
          std::isdigit(static_cast<unsigned char>(text[ep]))) {
        pos = ep;
        while (pos < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[pos])))
          ++pos;
      }
    }
    const std::string token(text.substr(start, pos - start));
    return make_number(std::strtod(token.c_str(), nullptr));
  }

  ExprPtr parse_identifier() {
    const std::size_t start = pos;
    while (pos < text.size() &&
           ((text[pos] >= 'a' && text[pos] <= 'z') ||
            std::isdigit(static_cast<unsigned char>(text[pos])) ||
            text[pos] == '_'))
      ++pos;
    const std::string name(text.substr(start, pos - start));

    static const std::map<std::string, Func1> kFuncs = {
        {"sin", Func1::Sin},   {"cos", Func1::Cos},   {"tan", Func1::Tan},
        {"sinh", Func1::Sinh}, {"cosh", Func1::Cosh}, {"tanh", Func1::Tanh},
        {"exp", Func1::Exp},   {"log", Func1::Log},   {"sqrt", Func1::Sqrt},
        {"cbrt", Func1::Cbrt}};

    skip_ws();
    const bool call = pos < text.size() && text[pos] == '(';
    if (call) {
      if (name == "atan2") {
        ++pos;
        ExprPtr y = parse_sum();
        if (!eat(',')) fail("atan2 takes two arguments");
        ExprPtr x = parse_sum();
        if (!eat(')')) fail("expected ')'");
        return make_atan2(y, x);
      }
      auto it = kFuncs.find(name);
      if (it != kFuncs.end()) {
        ++pos;
        ExprPtr arg = parse_sum();
        if (!eat(')')) fail("expected ')'");
        return make_call(it->second, arg);
      }
      pos = start;
      fail("unknown function '" + name + "'");
    }
    if (symbols->count(name) == 0) {
      pos = start;
      fail("unknown identifier '" + name + "'");
    }
    return make_symbol(name);
  }
};

}  // namespace

ExprPtr parse_expr(std::string_view text,
                   const std::set<std::string>& symbols) {
  Parser p;
  p.text = text;
  p.symbols = &symbols;
  return p.parse_full();
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    case ExprKind::Number: return e.number < 0 ? 3 : 5;
    default: return 5;
  }
}

std::string number_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* func_name(Func1 f) {
  switch (f) {
    case Func1::Sin: return "sin";
    case Func1::Cos: return "cos";
    case Func1::Tan: return "tan";
    case Func1::Sinh: return "sinh";
    case Func1::Cosh: return "cosh";
    case Func1::Tanh: return "tanh";
    case Func1::Exp: return "exp";
    case Func1::Log: return "log";
    case Func1::Sqrt: return "sqrt";
    case Func1::Cbrt: return "cbrt";
  }
  return "?";
}

void print(const Expr& e, std::string& out) {
  auto child = [&out](const Expr& c, bool parens) {
    if (parens) out += '(';
    print(c, out);
    if (parens) out += ')';
  };
  const int prec = precedence(e);
  switch (e.kind) {
    case ExprKind::Number: out += number_text(e.number); return;
    case ExprKind::Symbol: out += e.symbol; return;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div: {
      child(*e.a, precedence(*e.a) < prec);
      switch (e.kind) {
        case ExprKind::Add: out += " + "; break;
        case ExprKind::Sub: out += " - "; break;
        case ExprKind::Mul: out += "*"; break;
        default: out += "/"; break;
      }
      child(*e.b, precedence(*e.b) <= prec);
      return;
    }
    case ExprKind::Neg:
      out += '-';
      child(*e.a, precedence(*e.a) < prec);
      return;
    case ExprKind::Pow:
      child(*e.a, precedence(*e.a) <= 4);
      out += '^';
      out += std::to_string(e.exponent);
      return;
    case ExprKind::Call1:
      out += func_name(e.func);
      out += '(';
      print(*e.a, out);
      out += ')';
      return;
    case ExprKind::Call2:
      out += "atan2(";
      print(*e.a, out);
      out += ", ";
      print(*e.b, out);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_string(const ExprPtr& e) {
  std::string out;
  print(*e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

ExprPtr differentiate(const ExprPtr& e, const std::string& var) {
  switch (e->kind) {
    case ExprKind::Number: return make_number(0.0);
    case ExprKind::Symbol:
      return make_number(e->symbol == var ? 1.0 : 0.0);
    case ExprKind::Add:
      return make_add(differentiate(e->a, var), differentiate(e->b, var));
    case ExprKind::Sub:
      return make_sub(differentiate(e->a, var), differentiate(e->b, var));
    case ExprKind::Mul:
      return make_add(make_mul(differentiate(e->a, var), e->b),
                      make_mul(e->a, differentiate(e->b, var)));
    case ExprKind::Div:
      return make_div(make_sub(make_mul(differentiate(e->a, var), e->b),
                               make_mul(e->a, differentiate(e->b, var))),
                      make_pow(e->b, 2));
    case ExprKind::Neg: return make_neg(differentiate(e->a, var));
    case ExprKind::Pow:
      return make_mul(
          make_mul(make_number(e->exponent), make_pow(e->a, e->exponent - 1)),
          differentiate(e->a, var));
    case ExprKind::Call1: {
      const ExprPtr du = differentiate(e->a, var);
      const ExprPtr& u = e->a;
      switch (e->func) {
        case Func1::Sin: return make_mul(make_call(Func1::Cos, u), du);
        case Func1::Cos:
          return make_neg(make_mul(make_call(Func1::Sin, u), du));
        case Func1::Tan:
          return make_mul(
              make_add(make_number(1.0),
                       make_pow(make_call(Func1::Tan, u), 2)),
              du);
        case Func1::Sinh: return make_mul(make_call(Func1::Cosh, u), du);
        case Func1::Cosh: return make_mul(make_call(Func1::Sinh, u), du);
        case Func1::Tanh:
          return make_mul(
              make_sub(make_number(1.0),
                       make_pow(make_call(Func1::Tanh, u), 2)),
              du);
        case Func1::Exp: return make_mul(make_call(Func1::Exp, u), du);
        case Func1::Log: return make_div(du, u);
        case Func1::Sqrt:
          return make_div(du, make_mul(make_number(2.0),
                                       make_call(Func1::Sqrt, u)));
        case Func1::Cbrt:
          return make_div(du, make_mul(make_number(3.0),
                                       make_pow(make_call(Func1::Cbrt, u), 2)));
      }
      throw NumericError("unreachable function tag");
    }
    case ExprKind::Call2: {
      // atan2(y, x)' = (x y' - y x') / (x^2 + y^2)
      const ExprPtr& y = e->a;
      const ExprPtr& x = e->b;
      return make_div(make_sub(make_mul(x, differentiate(y, var)),
                               make_mul(y, differentiate(x, var))),
                      make_add(make_pow(x, 2), make_pow(y, 2)));
    }
  }
  throw NumericError("unreachable expression tag");
}

bool references(const ExprPtr& e, const std::string& name) {
  switch (e->kind) {
    case ExprKind::Number: return false;
    case ExprKind::Symbol: return e->symbol == name;
    case ExprKind::Neg:
    case ExprKind::Pow:
    case ExprKind::Call1: return references(e->a, name);
    default: return references(e->a, name) || references(e->b, name);
  }
}

ExprPtr substitute(const ExprPtr& e, const std::string& name,
                   const ExprPtr& replacement) {
  switch (e->kind) {
    case ExprKind::Number: return e;
    case ExprKind::Symbol: return e->symbol == name ? replacement : e;
    case ExprKind::Neg: return make_neg(substitute(e->a, name, replacement));
    case ExprKind::Pow:
      return make_pow(substitute(e->a, name, replacement), e->exponent);
    case ExprKind::Call1:
      return make_call(e->func, substitute(e->a, name, replacement));
    case ExprKind::Call2:
      return make_atan2(substitute(e->a, name, replacement),
                        substitute(e->b, name, replacement));
    case ExprKind::Add:
      return make_add(substitute(e->a, name, replacement),
                      substitute(e->b, name, replacement));
    case ExprKind::Sub:
      return make_sub(substitute(e->a, name, replacement),
                      substitute(e->b, name, replacement));
    case ExprKind::Mul:
      return make_mul(substitute(e->a, name, replacement),
                      substitute(e->b, name, replacement));
    case ExprKind::Div:
      return make_div(substitute(e->a, name, replacement),
                      substitute(e->b, name, replacement));
  }
  throw NumericError("unreachable expression tag");
}

// ---------------------------------------------------------------------------
// Catalog pairs for the plane system u_x + v_y = 0, u_y - v_x = 0
// ---------------------------------------------------------------------------

namespace {

/// Re/Im expression pair for a descriptor subtree, with zeta = z1 + i z2.
struct Complex2 {
  ExprPtr re, im;
};

Complex2 complexify(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::Number:
      return {make_number(e->number), make_number(0.0)};
    case ExprKind::Symbol:  // parser admitted only "zeta"
      return {make_symbol("z1"), make_symbol("z2")};
    case ExprKind::Add: {
      auto a = complexify(e->a), b = complexify(e->b);
      return {make_add(a.re, b.re), make_add(a.im, b.im)};
    }
    case ExprKind::Sub: {
      auto a = complexify(e->a), b = complexify(e->b);
      return {make_sub(a.re, b.re), make_sub(a.im, b.im)};
    }
    case ExprKind::Neg: {
      auto a = complexify(e->a);
      return {make_neg(a.re), make_neg(a.im)};
    }
    case ExprKind::Mul: {
      auto a = complexify(e->a), b = complexify(e->b);
      return {make_sub(make_mul(a.re, b.re), make_mul(a.im, b.im)),
              make_add(make_mul(a.re, b.im), make_mul(a.im, b.re))};
    }
    case ExprKind::Div: {
      auto b = complexify(e->b);
      if (b.im->kind != ExprKind::Number || b.im->number != 0.0 ||
          b.re->kind != ExprKind::Number)
        throw ConfigError(
            "pair descriptor: division only by a real constant");
      auto a = complexify(e->a);
      return {make_div(a.re, b.re), make_div(a.im, b.re)};
    }
    case ExprKind::Pow: {
      if (e->exponent < 0)
        throw ConfigError("pair descriptor: negative powers not supported");
      Complex2 acc{make_number(1.0), make_number(0.0)};
      auto base = complexify(e->a);
      for (int i = 0; i < e->exponent; ++i) {
        Complex2 next{
            make_sub(make_mul(acc.re, base.re), make_mul(acc.im, base.im)),
            make_add(make_mul(acc.re, base.im), make_mul(acc.im, base.re))};
        acc = next;
      }
      return acc;
    }
    case ExprKind::Call1: {
      auto a = complexify(e->a);
      const ExprPtr &u = a.re, &v = a.im;
      switch (e->func) {
        case Func1::Exp:
          return {make_mul(make_call(Func1::Exp, u), make_call(Func1::Cos, v)),
                  make_mul(make_call(Func1::Exp, u), make_call(Func1::Sin, v))};
        case Func1::Sin:
          return {
              make_mul(make_call(Func1::Sin, u), make_call(Func1::Cosh, v)),
              make_mul(make_call(Func1::Cos, u), make_call(Func1::Sinh, v))};
        case Func1::Cos:
          return {
              make_mul(make_call(Func1::Cos, u), make_call(Func1::Cosh, v)),
              make_neg(make_mul(make_call(Func1::Sin, u),
                                make_call(Func1::Sinh, v)))};
        case Func1::Sinh:
          return {
              make_mul(make_call(Func1::Sinh, u), make_call(Func1::Cos, v)),
              make_mul(make_call(Func1::Cosh, u), make_call(Func1::Sin, v))};
        case Func1::Cosh:
          return {
              make_mul(make_call(Func1::Cosh, u), make_call(Func1::Cos, v)),
              make_mul(make_call(Func1::Sinh, u), make_call(Func1::Sin, v))};
        default:
          throw ConfigError(
              "pair descriptor: only exp/sin/cos/sinh/cosh are supported");
      }
    }
    case ExprKind::Call2:
      throw ConfigError("pair descriptor: atan2 not supported");
  }
  throw NumericError("unreachable expression tag");
}

}  // namespace

AntiCrPair build_anti_cr_pair(std::string_view descriptor,
                              std::string_view extra1,
                              std::string_view extra2) {
  static const std::set<std::string> zeta_only = {"zeta"};
  static const std::set<std::string> z3_only = {"z3"};
  const ExprPtr tree = parse_expr(descriptor, zeta_only);
  Complex2 c = complexify(tree);
  AntiCrPair pair{c.re, make_neg(c.im)};
  if (!extra1.empty())
    pair.p1 = make_add(pair.p1, parse_expr(extra1, z3_only));
  if (!extra2.empty())
    pair.p2 = make_add(pair.p2, parse_expr(extra2, z3_only));
  return pair;
}

double anti_cr_residual(const AntiCrPair& pair, int samples) {
  const ExprPtr r1 = make_add(differentiate(pair.p1, "z1"),
                              differentiate(pair.p2, "z2"));
  const ExprPtr r2 = make_sub(differentiate(pair.p1, "z2"),
                              differentiate(pair.p2, "z1"));
  std::mt19937_64 rng(0x5eedbeefULL);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  double worst = 0.0;
  Env<double> env;
  for (int i = 0; i < samples; ++i) {
    env["z1"] = dist(rng);
    env["z2"] = dist(rng);
    env["z3"] = dist(rng);
    worst = std::max(worst, std::fabs(eval(r1, env)));
    worst = std::max(worst, std::fabs(eval(r2, env)));
  }
  return worst;
}

}  // namespace lagrflow
