// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <cstring>

#include "stepwise/snm.hpp"

namespace stepwise {

namespace {

bool is_metavar(const Expr& e) {
  return e.is(ExprKind::Var) && !e.text().empty() && std::isupper(static_cast<unsigned char>(e.text()[0]));
}

bool same_head(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind() || a.size() != b.size()) return false;
  switch (a.kind()) {
    case ExprKind::IntLit: return a.int_value() == b.int_value();
    case ExprKind::FloatLit: {
      double x = a.float_value(), y = b.float_value();
      return std::memcmp(&x, &y, sizeof x) == 0;
    }
    case ExprKind::BoolLit: return a.bool_value() == b.bool_value();
    case ExprKind::StrLit:
    case ExprKind::Var: return a.text() == b.text();
    case ExprKind::BinOp: return a.binary_op() == b.binary_op();
    case ExprKind::Unary: return a.unary_op() == b.unary_op();
    case ExprKind::Slice: return a.slice_lo() == b.slice_lo() && a.slice_hi() == b.slice_hi();
    case ExprKind::Lambda:
      return a.lambda_params() == b.lambda_params() && a.lambda_has_default() == b.lambda_has_default();
    default: return true;
  }
}

bool match_rec(const Expr& pat, const Expr& e, std::map<std::string, Expr>& b) {
  if (is_metavar(pat)) {
    auto [it, fresh] = b.emplace(pat.text(), e);
    return fresh || it->second == e;
  }
  if (!same_head(pat, e)) return false;
  for (std::size_t i = 0; i < pat.size(); ++i)
    if (!match_rec(pat.child(i), e.child(i), b)) return false;
  return true;
}

}  // namespace

std::optional<std::map<std::string, Expr>> match_pattern(const Expr& pattern, const Expr& e) {
  std::map<std::string, Expr> b;
  if (!match_rec(pattern, e, b)) return std::nullopt;
  return b;
}

Decomposition decompose(const Expr& e, const Expr& pattern) {
  for (const auto& [path, sub] : subterms(e)) {
    if (auto b = match_pattern(pattern, sub)) return {{e, path}, sub, *b};
  }
  throw NoMatch("no sub-expression of " + print_expr(e) + " matches " + print_expr(pattern));
}

Expr recompose(const Context& c, const Expr& filler) { return replace_at(c.root, c.hole, filler); }

std::string context_text(const Context& c) { return print_expr(recompose(c, Expr::var("_"))); }

}  // namespace stepwise
