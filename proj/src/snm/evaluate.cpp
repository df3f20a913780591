// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "snm/internal.hpp"
#include "stepwise/semantics.hpp"

namespace stepwise::snm {

namespace {

std::optional<Type> type_or_none(const Expr& e, const TypeEnv& env) {
  try {
    return infer_type(e, env);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

bool is_str(const Expr& e) { return e.is(ExprKind::StrLit); }
bool is_boollit(const Expr& e) { return e.is(ExprKind::BoolLit); }

}  // namespace

bool is_operator(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::BinOp:
      return e.binary_op() != BinaryOp::And && e.binary_op() != BinaryOp::Or;
    case ExprKind::Unary:
    case ExprKind::Slice:
      return true;
    case ExprKind::Call:
      return is_primitive_function(e.callee_name());
    default:
      return false;
  }
}

Family family(const Expr& e, const TypeEnv& env) {
  switch (e.kind()) {
    case ExprKind::Unary:
      return e.unary_op() == UnaryOp::Not ? Family::Boolean : Family::Numeric;
    case ExprKind::Slice:
      return Family::String;
    case ExprKind::Call:
      return is_primitive_function(e.callee_name()) ? Family::Numeric : Family::Other;
    case ExprKind::BinOp: {
      BinaryOp op = e.binary_op();
      if (op == BinaryOp::And || op == BinaryOp::Or) return Family::Boolean;
      if (op != BinaryOp::Add && !is_comparison(op)) return Family::Numeric;
      auto t = type_or_none(e.child(0), env);
      if (!t || t->is(Type::Kind::Error)) t = type_or_none(e.child(1), env);
      if (t && t->is(Type::Kind::Str)) return Family::String;
      if (t && t->is(Type::Kind::Bool) && is_comparison(op)) return Family::Boolean;
      return Family::Numeric;
    }
    default:
      return Family::Other;
  }
}

std::vector<std::size_t> strict_children(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::BinOp:
      if (e.binary_op() == BinaryOp::And || e.binary_op() == BinaryOp::Or) return {0};
      return {0, 1};
    case ExprKind::Unary:
    case ExprKind::Slice:
      return {0};
    case ExprKind::Cond:
      return {1};
    case ExprKind::Call: {
      std::vector<std::size_t> out;
      for (std::size_t i = 1; i < e.size(); ++i) out.push_back(i);
      return out;
    }
    default:
      return {};
  }
}

bool error_ready(const Expr& e) {
  if (e.is(ExprKind::Call) && e.callee().is(ExprKind::Lambda)) {
    const Expr& lam = e.callee();
    for (std::size_t i = 0; i + 1 < lam.size(); ++i) {
      if (lam.child(i).is(ExprKind::Error)) return true;
      if (!lam.child(i).is_literal()) return false;
    }
  }
  for (std::size_t i : strict_children(e)) {
    const Expr& c = e.child(i);
    if (c.is(ExprKind::Error)) return true;
    if (!c.is_literal()) return false;
  }
  return false;
}

std::optional<Expr> evaluate(const Expr& e, Family filter) {
  if (e.is_value()) return e;
  bool numeric = filter == Family::Numeric;
  auto sub = [&](const Expr& c) { return evaluate(c, filter); };
  switch (e.kind()) {
    case ExprKind::Unary: {
      bool is_not = e.unary_op() == UnaryOp::Not;
      if (filter == Family::String) return std::nullopt;
      if (is_not != (filter == Family::Boolean) && !(numeric && error_ready(e))) return std::nullopt;
      auto x = sub(e.child(0));
      if (!x) return std::nullopt;
      if (x->is(ExprKind::Error)) return numeric ? x : std::nullopt;
      if (filter == Family::Boolean && !is_boollit(*x)) return std::nullopt;
      return apply_unary(e.unary_op(), *x);
    }
    case ExprKind::Slice: {
      if (filter == Family::Boolean) return std::nullopt;
      auto b = sub(e.child(0));
      if (!b) return std::nullopt;
      if (b->is(ExprKind::Error)) return numeric ? b : std::nullopt;
      return apply_slice(*b, e.slice_lo(), e.slice_hi());
    }
    case ExprKind::BinOp: {
      BinaryOp op = e.binary_op();
      bool connective = op == BinaryOp::And || op == BinaryOp::Or;
      if (connective && filter != Family::Boolean) {
        if (numeric && e.child(0).is(ExprKind::Error)) return e.child(0);
        return std::nullopt;
      }
      auto l = sub(e.child(0));
      if (!l) return std::nullopt;
      if (l->is(ExprKind::Error)) return numeric ? l : std::nullopt;
      if (connective) {
        if (!is_boollit(*l)) return std::nullopt;
        if (op == BinaryOp::And && !l->bool_value()) return l;
        if (op == BinaryOp::Or && l->bool_value()) return l;
      }
      auto r = sub(e.child(1));
      if (!r) return std::nullopt;
      if (r->is(ExprKind::Error)) return numeric ? r : std::nullopt;
      if (filter == Family::String && !(is_str(*l) && is_str(*r))) return std::nullopt;
      if (filter == Family::Boolean && !(is_boollit(*l) && is_boollit(*r))) return std::nullopt;
      if (filter == Family::Boolean && !connective && op != BinaryOp::Eq && op != BinaryOp::Ne)
        return std::nullopt;
      if (filter == Family::String && op != BinaryOp::Add && !is_comparison(op)) return std::nullopt;
      if (connective) return r;
      return apply_binary(op, *l, *r);
    }
    case ExprKind::Call: {
      if (!numeric) return std::nullopt;
      std::string name = e.callee_name();
      if (!is_primitive_function(name)) {
        if (error_ready(e)) return Expr::error();
        return std::nullopt;
      }
      std::vector<Expr> args;
      for (const auto& a : e.args()) {
        auto v = sub(a);
        if (!v) return std::nullopt;
        if (v->is(ExprKind::Error)) return v;
        args.push_back(*v);
      }
      return apply_primitive(name, args);
    }
    case ExprKind::Cond:
      if (numeric && e.child(1).is(ExprKind::Error)) return e.child(1);
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

namespace {

bool candidate(const Expr& e, Family filter, const TypeEnv& env) {
  if (e.is_value()) return false;
  if (filter == Family::Numeric && error_ready(e)) return true;
  if (!is_operator(e) && !(filter == Family::Boolean && e.is(ExprKind::BinOp))) return false;
  return family(e, env) == filter;
}

void collapse_rec(const Expr& e, Family filter, const TypeEnv& env, Path& path, std::vector<Replacement>& out) {
  if (candidate(e, filter, env)) {
    if (auto v = evaluate(e, filter)) {
      out.push_back({path, v->with_span(e.span())});
      return;
    }
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    path.push_back(i);
    collapse_rec(e.child(i), filter, env, path, out);
    path.pop_back();
  }
}

}  // namespace

std::vector<Replacement> collapse(const Expr& e, Family filter, const TypeEnv& env) {
  std::vector<Replacement> out;
  Path p;
  collapse_rec(e, filter, env, p, out);
  return out;
}

Expr apply_replacements(const Expr& e, const std::vector<Replacement>& rs) {
  Expr out = e;
  for (const auto& r : rs) out = replace_at(out, r.path, r.value);
  return out;
}

std::set<std::string> binders(const Expr& e) {
  std::set<std::string> out;
  for (const auto& [p, s] : subterms(e))
    if (s.is(ExprKind::Lambda))
      for (const auto& n : s.lambda_params()) out.insert(n);
  return out;
}

}  // namespace stepwise::snm

namespace stepwise {

std::optional<Expr> partial_value(const Expr& e) { return snm::evaluate(e, snm::Family::Numeric); }

}  // namespace stepwise
