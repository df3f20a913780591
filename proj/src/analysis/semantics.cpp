// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "stepwise/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stepwise {

namespace {

bool numeric(const Expr& e) { return e.is(ExprKind::IntLit) || e.is(ExprKind::FloatLit); }
double as_double(const Expr& e) {
  return e.is(ExprKind::IntLit) ? static_cast<double>(e.int_value()) : e.float_value();
}

Expr float_result(double v) {
  if (!std::isfinite(v)) return Expr::error();
  return Expr::float_lit(v);
}

// -1, 0, 1, or 2 when unordered.
int compare_numeric(const Expr& l, const Expr& r) {
  if (l.is(ExprKind::IntLit) && r.is(ExprKind::IntLit))
    return l.int_value() < r.int_value() ? -1 : l.int_value() > r.int_value() ? 1 : 0;
  if (l.is(ExprKind::IntLit)) return compare_int_float(l.int_value(), r.float_value());
  if (r.is(ExprKind::IntLit)) {
    int c = compare_int_float(r.int_value(), l.float_value());
    return c == 2 ? 2 : -c;
  }
  double a = l.float_value(), b = r.float_value();
  if (std::isnan(a) || std::isnan(b)) return 2;
  return a < b ? -1 : a > b ? 1 : 0;
}

std::optional<Expr> compare(BinaryOp op, int c) {
  bool v = false;
  switch (op) {
    case BinaryOp::Eq: v = c == 0; break;
    case BinaryOp::Ne: v = c != 0; break;
    case BinaryOp::Lt: v = c == -1; break;
    case BinaryOp::Le: v = c == -1 || c == 0; break;
    case BinaryOp::Gt: v = c == 1; break;
    case BinaryOp::Ge: v = c == 1 || c == 0; break;
    default: return std::nullopt;
  }
  return Expr::bool_lit(v);
}

std::optional<Expr> int_op(BinaryOp op, int64_t a, int64_t b) {
  int64_t r = 0;
  switch (op) {
    case BinaryOp::Add:
      if (__builtin_add_overflow(a, b, &r)) return Expr::error();
      return Expr::int_lit(r);
    case BinaryOp::Sub:
      if (__builtin_sub_overflow(a, b, &r)) return Expr::error();
      return Expr::int_lit(r);
    case BinaryOp::Mul:
      if (__builtin_mul_overflow(a, b, &r)) return Expr::error();
      return Expr::int_lit(r);
    case BinaryOp::FloorDiv: {
      if (b == 0) return Expr::error();
      if (a == std::numeric_limits<int64_t>::min() && b == -1) return Expr::error();
      int64_t q = a / b;
      if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
      return Expr::int_lit(q);
    }
    case BinaryOp::Div:
      if (b == 0) return Expr::error();
      return float_result(static_cast<double>(a) / static_cast<double>(b));
    case BinaryOp::Pow: {
      if (b < 0) return Expr::error();
      int64_t result = 1, base = a;
      int64_t e = b;
      while (e > 0) {
        if (e & 1) {
          if (__builtin_mul_overflow(result, base, &result)) return Expr::error();
        }
        e >>= 1;
        if (e > 0 && __builtin_mul_overflow(base, base, &base)) {
          // Squaring overflowed; only fine if the result no longer needs it.
          if (result == 0) return Expr::int_lit(0);
          return Expr::error();
        }
      }
      return Expr::int_lit(result);
    }
    default: return std::nullopt;
  }
}

std::optional<Expr> float_op(BinaryOp op, const Expr& l, const Expr& r) {
  double a = as_double(l), b = as_double(r);
  switch (op) {
    case BinaryOp::Add: return float_result(a + b);
    case BinaryOp::Sub: return float_result(a - b);
    case BinaryOp::Mul: return float_result(a * b);
    case BinaryOp::Div:
      if (b == 0.0) return Expr::error();
      return float_result(a / b);
    case BinaryOp::FloorDiv:
      if (b == 0.0) return Expr::error();
      return float_result(py_floordiv(a, b));
    case BinaryOp::Pow: {
      if (a == 0.0 && b < 0.0) return Expr::error();
      if (a < 0.0 && b != std::floor(b)) return Expr::error();
      return float_result(std::pow(a, b));
    }
    default: return std::nullopt;
  }
}

}  // namespace

double py_floordiv(double vx, double wx) {
  double mod = std::fmod(vx, wx);
  double div = (vx - mod) / wx;
  if (mod != 0.0) {
    if ((wx < 0) != (mod < 0)) div -= 1.0;
  }
  double floordiv;
  if (div != 0.0) {
    floordiv = std::floor(div);
    if (div - floordiv > 0.5) floordiv += 1.0;
  } else {
    floordiv = std::copysign(0.0, vx / wx);
  }
  return floordiv;
}

int compare_int_float(int64_t i, double d) {
  if (std::isnan(d)) return 2;
  if (d >= 9223372036854775808.0) return -1;
  if (d < -9223372036854775808.0) return 1;
  double t = std::trunc(d);
  int64_t ti = static_cast<int64_t>(t);
  if (i < ti) return -1;
  if (i > ti) return 1;
  double frac = d - t;
  return frac > 0 ? -1 : frac < 0 ? 1 : 0;
}

std::size_t utf8_length(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

std::string utf8_slice(const std::string& s, int64_t lo, int64_t hi) {
  int64_t len = static_cast<int64_t>(utf8_length(s));
  lo = std::clamp<int64_t>(lo, 0, len);
  hi = std::clamp<int64_t>(hi, 0, len);
  if (hi <= lo) return {};
  std::size_t begin = s.size(), end = s.size();
  int64_t cp = -1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if ((c & 0xC0) == 0x80) continue;
    ++cp;
    if (cp == lo) begin = i;
    if (cp == hi) {
      end = i;
      break;
    }
  }
  return s.substr(begin, end - begin);
}

std::optional<Expr> apply_binary(BinaryOp op, const Expr& l, const Expr& r) {
  if (op == BinaryOp::And || op == BinaryOp::Or) {
    if (!l.is(ExprKind::BoolLit) || !r.is(ExprKind::BoolLit)) return std::nullopt;
    bool v = op == BinaryOp::And ? (l.bool_value() && r.bool_value()) : (l.bool_value() || r.bool_value());
    return Expr::bool_lit(v);
  }
  if (is_comparison(op)) {
    if (numeric(l) && numeric(r)) return compare(op, compare_numeric(l, r));
    if (l.is(ExprKind::StrLit) && r.is(ExprKind::StrLit)) {
      int c = l.text().compare(r.text());
      return compare(op, c < 0 ? -1 : c > 0 ? 1 : 0);
    }
    if (l.is(ExprKind::BoolLit) && r.is(ExprKind::BoolLit) && (op == BinaryOp::Eq || op == BinaryOp::Ne)) {
      bool eq = l.bool_value() == r.bool_value();
      return Expr::bool_lit(op == BinaryOp::Eq ? eq : !eq);
    }
    return std::nullopt;
  }
  if (op == BinaryOp::Add && l.is(ExprKind::StrLit) && r.is(ExprKind::StrLit))
    return Expr::str_lit(l.text() + r.text());
  if (!numeric(l) || !numeric(r)) return std::nullopt;
  if (l.is(ExprKind::IntLit) && r.is(ExprKind::IntLit)) return int_op(op, l.int_value(), r.int_value());
  return float_op(op, l, r);
}

std::optional<Expr> apply_unary(UnaryOp op, const Expr& x) {
  if (op == UnaryOp::Not) {
    if (!x.is(ExprKind::BoolLit)) return std::nullopt;
    return Expr::bool_lit(!x.bool_value());
  }
  if (x.is(ExprKind::IntLit)) {
    if (x.int_value() == std::numeric_limits<int64_t>::min()) return Expr::error();
    return Expr::int_lit(-x.int_value());
  }
  if (x.is(ExprKind::FloatLit)) return Expr::float_lit(-x.float_value());
  return std::nullopt;
}

std::optional<Expr> apply_slice(const Expr& base, int64_t lo, int64_t hi) {
  if (!base.is(ExprKind::StrLit)) return std::nullopt;
  return Expr::str_lit(utf8_slice(base.text(), lo, hi));
}

std::optional<Expr> apply_primitive(const std::string& name, const std::vector<Expr>& args) {
  if (args.size() != 1) return std::nullopt;
  const Expr& x = args[0];
  if (name == "len") {
    if (!x.is(ExprKind::StrLit)) return std::nullopt;
    return Expr::int_lit(static_cast<int64_t>(utf8_length(x.text())));
  }
  if (!numeric(x)) return std::nullopt;
  if (name == "float") return Expr::float_lit(as_double(x));
  if (name == "float.is_integer") {
    double d = as_double(x);
    return Expr::bool_lit(std::isfinite(d) && d == std::floor(d));
  }
  if (name == "abs") {
    if (x.is(ExprKind::IntLit)) {
      if (x.int_value() == std::numeric_limits<int64_t>::min()) return Expr::error();
      return Expr::int_lit(x.int_value() < 0 ? -x.int_value() : x.int_value());
    }
    return Expr::float_lit(std::fabs(x.float_value()));
  }
  return std::nullopt;
}

}  // namespace stepwise
