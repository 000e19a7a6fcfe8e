/// @file expr.hpp
/// @brief Small symbolic expression language over t, z1, z2, z3, s and
///        user-declared constant names.
///
/// Supported: + - * /, ^ with integer literal exponents, unary minus, the
/// functions sin cos tan sinh cosh tanh exp log sqrt cbrt (one argument) and
/// atan2 (two arguments), decimal literals, parentheses.  Identifiers match
/// [a-z][a-z0-9_]*.  Expressions are immutable; evaluation is templated so
/// the same tree yields doubles or second-order jets.
#pragma once

#include <array>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>

#include "lagrflow/errors.hpp"
#include "lagrflow/jet.hpp"

namespace lagrflow {

enum class ExprKind { Number, Symbol, Add, Sub, Mul, Div, Neg, Pow, Call1, Call2 };

enum class Func1 { Sin, Cos, Tan, Sinh, Cosh, Tanh, Exp, Log, Sqrt, Cbrt };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind;
  double number = 0.0;   // Number
  std::string symbol;    // Symbol
  Func1 func{};          // Call1
  int exponent = 0;      // Pow
  ExprPtr a, b;          // operands (b unused for unary nodes)
};

/// Construction helpers with light constant folding; derivative trees stay
/// readable because 0/1 factors collapse on the spot.
ExprPtr make_number(double value);
ExprPtr make_symbol(std::string name);
ExprPtr make_add(ExprPtr a, ExprPtr b);
ExprPtr make_sub(ExprPtr a, ExprPtr b);
ExprPtr make_mul(ExprPtr a, ExprPtr b);
ExprPtr make_div(ExprPtr a, ExprPtr b);
ExprPtr make_neg(ExprPtr a);
ExprPtr make_pow(ExprPtr a, int exponent);
ExprPtr make_call(Func1 f, ExprPtr a);
ExprPtr make_atan2(ExprPtr y, ExprPtr x);

/// Parse `text`; every identifier must be a member of `symbols`, otherwise a
/// ParseError("unknown identifier ...") with the identifier's byte offset is
/// thrown.  Syntax errors likewise carry byte offsets.
ExprPtr parse_expr(std::string_view text, const std::set<std::string>& symbols);

/// The standard variable alphabet {t, z1, z2, z3, s}.
const std::set<std::string>& standard_variables();

/// Canonical text form; parse_expr(to_string(e)) reproduces the same tree.
std::string to_string(const ExprPtr& e);

/// Symbolic partial derivative with respect to `var`.
ExprPtr differentiate(const ExprPtr& e, const std::string& var);

/// True if the tree references `name` anywhere.
bool references(const ExprPtr& e, const std::string& name);

/// Replace every occurrence of the symbol `name` by `replacement`.
ExprPtr substitute(const ExprPtr& e, const std::string& name,
                   const ExprPtr& replacement);

template <class T> using Env = std::map<std::string, T>;

template <class T> T eval(const Expr& e, const Env<T>& env) {
  using std::atan2;
  using std::cbrt;
  using std::cos;
  using std::cosh;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sinh;
  using std::sqrt;
  using std::tan;
  using std::tanh;
  switch (e.kind) {
    case ExprKind::Number: return T(e.number);
    case ExprKind::Symbol: {
      auto it = env.find(e.symbol);
      if (it == env.end())
        throw ConfigError("no value bound for symbol '" + e.symbol + "'");
      return it->second;
    }
    case ExprKind::Add: return eval(*e.a, env) + eval(*e.b, env);
    case ExprKind::Sub: return eval(*e.a, env) - eval(*e.b, env);
    case ExprKind::Mul: return eval(*e.a, env) * eval(*e.b, env);
    case ExprKind::Div: return eval(*e.a, env) / eval(*e.b, env);
    case ExprKind::Neg: return -eval(*e.a, env);
    case ExprKind::Pow: return pow_int(eval(*e.a, env), e.exponent);
    case ExprKind::Call1: {
      const T u = eval(*e.a, env);
      switch (e.func) {
        case Func1::Sin: return sin(u);
        case Func1::Cos: return cos(u);
        case Func1::Tan: return tan(u);
        case Func1::Sinh: return sinh(u);
        case Func1::Cosh: return cosh(u);
        case Func1::Tanh: return tanh(u);
        case Func1::Exp: return exp(u);
        case Func1::Log: return log(u);
        case Func1::Sqrt: return sqrt(u);
        case Func1::Cbrt: return cbrt(u);
      }
      throw NumericError("unreachable function tag");
    }
    case ExprKind::Call2: return atan2(eval(*e.a, env), eval(*e.b, env));
  }
  throw NumericError("unreachable expression tag");
}

template <class T> T eval(const ExprPtr& e, const Env<T>& env) {
  return eval<T>(*e, env);
}

/// A pair (p1, p2) satisfying the first-convention system
///   d p1/d z1 + d p2/d z2 = 0,   d p1/d z2 - d p2/d z1 = 0,
/// built from a catalog descriptor over the formal symbol `zeta`
/// (zeta = z1 + i z2): polynomials in zeta, exp/sin/cos/sinh/cosh of
/// holomorphic arguments, products and real-coefficient combinations.
/// The pair components may carry additive terms in z3 only (`extra1`,
/// `extra2`), which do not disturb the system above.
struct AntiCrPair {
  ExprPtr p1;  ///< real part of the descriptor, plus extra1(z3)
  ExprPtr p2;  ///< negated imaginary part of the descriptor, plus extra2(z3)
};

/// Build an AntiCrPair from descriptor text, e.g. "0.25*zeta^2 - exp(0.5*zeta)".
/// `extra1`/`extra2` are optional Expr texts in z3 alone ("" for none).
AntiCrPair build_anti_cr_pair(std::string_view descriptor,
                              std::string_view extra1 = "",
                              std::string_view extra2 = "");

/// Max absolute residual of the two anti-CR equations for (p1, p2) over
/// `samples` quasi-random points in [-1,1]^3.
double anti_cr_residual(const AntiCrPair& pair, int samples = 100);

}  // namespace lagrflow
