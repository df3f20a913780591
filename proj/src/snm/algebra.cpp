// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0
//
// Canonical forms for the arithmetic whitelist: sums of monomials whose
// exponents are linear integer expressions. Anything else is an opaque atom
// keyed by its printed text.

#include <cmath>
#include <map>

#include "snm/internal.hpp"

namespace stepwise {

namespace {

// Linear integer form; key "" holds the constant.
using Lin = std::map<std::string, int64_t>;
using Monomial = std::map<std::string, Lin>;
using Poly = std::map<Monomial, double>;

constexpr int64_t kMaxCoeff = int64_t{1} << 40;

void lin_add(Lin& a, const Lin& b, int64_t k) {
  for (const auto& [n, c] : b) {
    a[n] += k * c;
    if (a[n] == 0) a.erase(n);
  }
}

bool lin_constant(const Lin& l, int64_t& out) {
  if (l.empty()) {
    out = 0;
    return true;
  }
  if (l.size() == 1 && l.count("")) {
    out = l.at("");
    return true;
  }
  return false;
}

std::optional<Lin> linear(const Expr& e, const TypeEnv& env) {
  switch (e.kind()) {
    case ExprKind::IntLit:
      if (std::llabs(e.int_value()) > kMaxCoeff) return std::nullopt;
      if (e.int_value() == 0) return Lin{};
      return Lin{{"", e.int_value()}};
    case ExprKind::Var: {
      const Type* t = env.find(e.text());
      if (!t || !t->is(Type::Kind::Int)) return std::nullopt;
      return Lin{{e.text(), 1}};
    }
    case ExprKind::Unary:
      if (e.unary_op() == UnaryOp::Neg) {
        auto x = linear(e.child(0), env);
        if (!x) return std::nullopt;
        Lin out;
        lin_add(out, *x, -1);
        return out;
      }
      return std::nullopt;
    case ExprKind::BinOp: {
      BinaryOp op = e.binary_op();
      if (op != BinaryOp::Add && op != BinaryOp::Sub && op != BinaryOp::Mul) return std::nullopt;
      auto l = linear(e.child(0), env);
      auto r = linear(e.child(1), env);
      if (!l || !r) return std::nullopt;
      if (op == BinaryOp::Mul) {
        int64_t k;
        if (lin_constant(*l, k)) std::swap(l, r);
        if (!lin_constant(*r, k) || std::llabs(k) > kMaxCoeff) return std::nullopt;
        Lin out;
        lin_add(out, *l, k);
        return out;
      }
      lin_add(*l, *r, op == BinaryOp::Add ? 1 : -1);
      return l;
    }
    default:
      return std::nullopt;
  }
}

void add_term(Poly& p, const Monomial& m, double c) {
  double& slot = p[m];
  slot += c;
  if (slot == 0.0) p.erase(m);
}

Poly constant(double c) {
  Poly p;
  if (c != 0.0) p[Monomial{}] = c;
  return p;
}

Poly atom(const std::string& key) { return Poly{{Monomial{{key, Lin{{"", 1}}}}, 1.0}}; }

Poly add(const Poly& a, const Poly& b, double k) {
  Poly out = a;
  for (const auto& [m, c] : b) add_term(out, m, k * c);
  return out;
}

Poly mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) {
      Monomial m = ma;
      for (const auto& [n, e] : mb) {
        lin_add(m[n], e, 1);
        if (m[n].empty()) m.erase(n);
      }
      add_term(out, m, ca * cb);
    }
  return out;
}

class Canon {
 public:
  explicit Canon(const TypeEnv& env) : env_(env) {}

  Poly operator()(const Expr& e) {
    switch (e.kind()) {
      case ExprKind::IntLit:
        return constant(static_cast<double>(e.int_value()));
      case ExprKind::FloatLit:
        return constant(e.float_value());
      case ExprKind::Var:
        return atom(e.text());
      case ExprKind::Unary:
        if (e.unary_op() == UnaryOp::Neg) return add(Poly{}, (*this)(e.child(0)), -1);
        break;
      case ExprKind::BinOp:
        switch (e.binary_op()) {
          case BinaryOp::Add: return add((*this)(e.child(0)), (*this)(e.child(1)), 1);
          case BinaryOp::Sub: return add((*this)(e.child(0)), (*this)(e.child(1)), -1);
          case BinaryOp::Mul: return mul((*this)(e.child(0)), (*this)(e.child(1)));
          case BinaryOp::Pow:
            if (auto p = power(e)) return *p;
            break;
          default: break;
        }
        break;
      default:
        break;
    }
    return atom("<" + print_expr(e) + ">");
  }

 private:
  std::optional<Poly> power(const Expr& e) {
    auto ex = linear(e.child(1), env_);
    if (!ex) return std::nullopt;
    Poly base = (*this)(e.child(0));
    int64_t k;
    if (lin_constant(*ex, k) && k >= 0 && k <= 8) {
      Poly out = constant(1.0);
      for (int64_t i = 0; i < k; ++i) out = mul(out, base);
      return out;
    }
    // Symbolic exponent: only a bare product of powers with unit coefficient.
    if (base.size() != 1 || base.begin()->second != 1.0) return std::nullopt;
    Monomial m;
    for (const auto& [n, e0] : base.begin()->first) {
      int64_t c;
      if (!lin_constant(e0, c)) return std::nullopt;
      Lin scaled;
      lin_add(scaled, *ex, c);
      if (!scaled.empty()) m[n] = scaled;
    }
    return Poly{{m, 1.0}};
  }

  const TypeEnv& env_;
};

bool same_poly(const Expr& a, const Expr& b, const TypeEnv& env) {
  Canon c(env);
  return c(a) == c(b);
}

Expr with_forced(const Expr& e, const std::vector<Expr>& guards, const TypeEnv& env) {
  std::vector<std::pair<std::string, Expr>> bindings;
  for (const auto& v : free_vars(e)) {
    if (auto f = forced_value(guards, v, env); f && f->is_literal()) bindings.emplace_back(v, *f);
  }
  return bindings.empty() ? e : substitute_all(e, bindings);
}

bool relation_equal(const Expr& a, const Expr& b, const TypeEnv& env) {
  // t==t, x+y==y+x and their negations against a literal.
  if (!b.is(ExprKind::BoolLit) || !a.is(ExprKind::BinOp) || !is_comparison(a.binary_op())) return false;
  if (!same_poly(a.child(0), a.child(1), env) && !alpha_equal(a.child(0), a.child(1))) return false;
  BinaryOp op = a.binary_op();
  bool reflexive = op == BinaryOp::Eq || op == BinaryOp::Le || op == BinaryOp::Ge;
  return b.bool_value() == reflexive;
}

}  // namespace

bool algebra_equal(const Expr& a, const Expr& b, const std::vector<Expr>& guards, const TypeEnv& env) {
  if (alpha_equal(a, b)) return true;
  for (int pass = 0; pass < 2; ++pass) {
    Expr x = pass == 0 ? a : with_forced(a, guards, env);
    Expr y = pass == 0 ? b : with_forced(b, guards, env);
    if (relation_equal(x, y, env) || relation_equal(y, x, env)) return true;
    if (x.is(ExprKind::BoolLit) || y.is(ExprKind::BoolLit)) continue;
    if (same_poly(x, y, env)) return true;
  }
  return false;
}

}  // namespace stepwise
