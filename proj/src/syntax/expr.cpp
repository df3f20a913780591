// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "stepwise/expr.hpp"

#include <cstring>
#include <map>

namespace stepwise {

struct Node {
  ExprKind kind = ExprKind::Error;
  Span span;
  int64_t i = 0;
  double f = 0;
  bool b = false;
  std::string s;
  BinaryOp bop = BinaryOp::Add;
  UnaryOp uop = UnaryOp::Not;
  int64_t lo = 0, hi = 0;
  std::vector<std::string> params;
  std::vector<bool> has_default;
  std::vector<Expr> kids;
};

const char* op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::FloorDiv: return "//";
    case BinaryOp::Div: return "/";
    case BinaryOp::Pow: return "**";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
  }
  return "?";
}

const char* op_text(UnaryOp op) { return op == UnaryOp::Not ? "not" : "-"; }

const char* kind_name(ExprKind kind) {
  switch (kind) {
    case ExprKind::IntLit: return "IntLit";
    case ExprKind::FloatLit: return "FloatLit";
    case ExprKind::BoolLit: return "BoolLit";
    case ExprKind::StrLit: return "StrLit";
    case ExprKind::Var: return "Var";
    case ExprKind::BinOp: return "BinOp";
    case ExprKind::Unary: return "Unary";
    case ExprKind::Slice: return "Slice";
    case ExprKind::Call: return "Call";
    case ExprKind::Cond: return "Cond";
    case ExprKind::Lambda: return "Lambda";
    case ExprKind::Error: return "Error";
  }
  return "?";
}

bool is_comparison(BinaryOp op) {
  switch (op) {
    case BinaryOp::Eq: case BinaryOp::Ne: case BinaryOp::Lt:
    case BinaryOp::Le: case BinaryOp::Gt: case BinaryOp::Ge:
      return true;
    default:
      return false;
  }
}

bool is_arith(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: case BinaryOp::Sub: case BinaryOp::Mul:
    case BinaryOp::FloorDiv: case BinaryOp::Div: case BinaryOp::Pow:
      return true;
    default:
      return false;
  }
}

namespace {

std::shared_ptr<Node> make(ExprKind k, Span s) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->span = s;
  return n;
}

const std::vector<Expr>& no_children() {
  static const std::vector<Expr> empty;
  return empty;
}

}  // namespace

Expr::Expr() : node_(make(ExprKind::Error, {})) {}

Expr Expr::int_lit(int64_t v, Span s) {
  auto n = make(ExprKind::IntLit, s);
  n->i = v;
  return Expr(n);
}

Expr Expr::float_lit(double v, Span s) {
  auto n = make(ExprKind::FloatLit, s);
  n->f = v;
  return Expr(n);
}

Expr Expr::bool_lit(bool v, Span s) {
  auto n = make(ExprKind::BoolLit, s);
  n->b = v;
  return Expr(n);
}

Expr Expr::str_lit(std::string v, Span s) {
  auto n = make(ExprKind::StrLit, s);
  n->s = std::move(v);
  return Expr(n);
}

Expr Expr::var(std::string name, Span s) {
  auto n = make(ExprKind::Var, s);
  n->s = std::move(name);
  return Expr(n);
}

Expr Expr::binary(BinaryOp op, Expr l, Expr r, Span s) {
  auto n = make(ExprKind::BinOp, s);
  n->bop = op;
  n->kids = {std::move(l), std::move(r)};
  return Expr(n);
}

Expr Expr::unary(UnaryOp op, Expr operand, Span s) {
  auto n = make(ExprKind::Unary, s);
  n->uop = op;
  n->kids = {std::move(operand)};
  return Expr(n);
}

Expr Expr::slice(Expr base, int64_t lo, int64_t hi, Span s) {
  auto n = make(ExprKind::Slice, s);
  n->lo = lo;
  n->hi = hi;
  n->kids = {std::move(base)};
  return Expr(n);
}

Expr Expr::call(Expr callee, std::vector<Expr> args, Span s) {
  auto n = make(ExprKind::Call, s);
  n->kids.reserve(args.size() + 1);
  n->kids.push_back(std::move(callee));
  for (auto& a : args) n->kids.push_back(std::move(a));
  return Expr(n);
}

Expr Expr::call(const std::string& name, std::vector<Expr> args, Span s) {
  return call(var(name, s), std::move(args), s);
}

Expr Expr::cond(Expr then, Expr guard, Expr otherwise, Span s) {
  auto n = make(ExprKind::Cond, s);
  n->kids = {std::move(then), std::move(guard), std::move(otherwise)};
  return Expr(n);
}

Expr Expr::lambda(std::vector<std::string> params, std::vector<bool> has_default,
                  std::vector<Expr> defaults, Expr body, Span s) {
  if (has_default.size() != params.size()) throw std::invalid_argument("lambda: default flags");
  std::size_t count = 0;
  for (bool d : has_default) count += d ? 1 : 0;
  if (count != defaults.size()) throw std::invalid_argument("lambda: default count");
  auto n = make(ExprKind::Lambda, s);
  n->params = std::move(params);
  n->has_default = std::move(has_default);
  n->kids = std::move(defaults);
  n->kids.push_back(std::move(body));
  return Expr(n);
}

Expr Expr::error(Span s) { return Expr(make(ExprKind::Error, s)); }

ExprKind Expr::kind() const { return node_->kind; }
Span Expr::span() const { return node_->span; }
int64_t Expr::int_value() const { return node_->i; }
double Expr::float_value() const { return node_->f; }
bool Expr::bool_value() const { return node_->b; }
const std::string& Expr::text() const { return node_->s; }
BinaryOp Expr::binary_op() const { return node_->bop; }
UnaryOp Expr::unary_op() const { return node_->uop; }
int64_t Expr::slice_lo() const { return node_->lo; }
int64_t Expr::slice_hi() const { return node_->hi; }
const std::vector<std::string>& Expr::lambda_params() const { return node_->params; }
const std::vector<bool>& Expr::lambda_has_default() const { return node_->has_default; }

const std::vector<Expr>& Expr::children() const {
  return node_ ? node_->kids : no_children();
}

std::vector<Expr> Expr::args() const {
  return std::vector<Expr>(children().begin() + 1, children().end());
}

std::string Expr::callee_name() const {
  if (!is(ExprKind::Call) || !callee().is(ExprKind::Var)) return {};
  return callee().text();
}

std::vector<Expr> Expr::lambda_defaults() const {
  return std::vector<Expr>(children().begin(), children().end() - 1);
}

std::optional<Expr> Expr::lambda_default(std::size_t i) const {
  const auto& flags = lambda_has_default();
  if (i >= flags.size() || !flags[i]) return std::nullopt;
  std::size_t k = 0;
  for (std::size_t j = 0; j < i; ++j) k += flags[j] ? 1 : 0;
  return child(k);
}

bool Expr::is_literal() const {
  switch (kind()) {
    case ExprKind::IntLit: case ExprKind::FloatLit:
    case ExprKind::BoolLit: case ExprKind::StrLit:
      return true;
    default:
      return false;
  }
}

Expr Expr::with_children(std::vector<Expr> kids) const {
  if (kids.size() != children().size()) throw std::invalid_argument("with_children: arity");
  auto n = std::make_shared<Node>(*node_);
  n->kids = std::move(kids);
  return Expr(n);
}

Expr Expr::with_span(Span s) const {
  auto n = std::make_shared<Node>(*node_);
  n->span = s;
  return Expr(n);
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const Node& x = *a.node_;
  const Node& y = *b.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case ExprKind::IntLit: if (x.i != y.i) return false; break;
    case ExprKind::FloatLit: if (std::memcmp(&x.f, &y.f, sizeof(double)) != 0) return false; break;
    case ExprKind::BoolLit: if (x.b != y.b) return false; break;
    case ExprKind::StrLit: case ExprKind::Var: if (x.s != y.s) return false; break;
    case ExprKind::BinOp: if (x.bop != y.bop) return false; break;
    case ExprKind::Unary: if (x.uop != y.uop) return false; break;
    case ExprKind::Slice: if (x.lo != y.lo || x.hi != y.hi) return false; break;
    case ExprKind::Lambda:
      if (x.params != y.params || x.has_default != y.has_default) return false;
      break;
    default: break;
  }
  if (x.kids.size() != y.kids.size()) return false;
  for (std::size_t i = 0; i < x.kids.size(); ++i)
    if (!(x.kids[i] == y.kids[i])) return false;
  return true;
}

std::string path_text(const Path& p) {
  std::string out = "[";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(p[i]);
  }
  return out + "]";
}

bool path_valid(const Expr& e, const Path& p) {
  const Expr* cur = &e;
  for (std::size_t idx : p) {
    if (idx >= cur->size()) return false;
    cur = &cur->child(idx);
  }
  return true;
}

const Expr& expr_at(const Expr& e, const Path& p) {
  const Expr* cur = &e;
  for (std::size_t idx : p) {
    if (idx >= cur->size()) throw InvalidPath("invalid path " + path_text(p));
    cur = &cur->child(idx);
  }
  return *cur;
}

namespace {

Expr replace_rec(const Expr& e, const Path& p, std::size_t depth, const Expr& sub) {
  if (depth == p.size()) return sub;
  if (p[depth] >= e.size()) throw InvalidPath("invalid path " + path_text(p));
  std::vector<Expr> kids = e.children();
  kids[p[depth]] = replace_rec(kids[p[depth]], p, depth + 1, sub);
  return e.with_children(std::move(kids));
}

void subterms_rec(const Expr& e, Path& cur, std::vector<std::pair<Path, Expr>>& out) {
  out.emplace_back(cur, e);
  for (std::size_t i = 0; i < e.size(); ++i) {
    cur.push_back(i);
    subterms_rec(e.child(i), cur, out);
    cur.pop_back();
  }
}

void free_rec(const Expr& e, std::multiset<std::string>& bound, std::set<std::string>& out) {
  if (e.is(ExprKind::Var)) {
    if (!bound.count(e.text())) out.insert(e.text());
    return;
  }
  if (e.is(ExprKind::Lambda)) {
    for (std::size_t i = 0; i + 1 < e.size(); ++i) free_rec(e.child(i), bound, out);
    for (const auto& p : e.lambda_params()) bound.insert(p);
    free_rec(e.lambda_body(), bound, out);
    for (const auto& p : e.lambda_params()) bound.erase(bound.find(p));
    return;
  }
  for (const auto& c : e.children()) free_rec(c, bound, out);
}

void names_rec(const Expr& e, std::set<std::string>& out) {
  if (e.is(ExprKind::Var)) out.insert(e.text());
  if (e.is(ExprKind::Lambda))
    for (const auto& p : e.lambda_params()) out.insert(p);
  for (const auto& c : e.children()) names_rec(c, out);
}

Expr subst_rec(const Expr& e, const std::map<std::string, Expr>& env) {
  if (env.empty()) return e;
  switch (e.kind()) {
    case ExprKind::Var: {
      auto it = env.find(e.text());
      return it == env.end() ? e : it->second;
    }
    case ExprKind::Lambda: {
      std::vector<Expr> kids;
      for (std::size_t i = 0; i + 1 < e.size(); ++i) kids.push_back(subst_rec(e.child(i), env));
      std::map<std::string, Expr> inner = env;
      for (const auto& p : e.lambda_params()) inner.erase(p);
      kids.push_back(subst_rec(e.lambda_body(), inner));
      return e.with_children(std::move(kids));
    }
    default: {
      if (e.size() == 0) return e;
      std::vector<Expr> kids;
      kids.reserve(e.size());
      for (const auto& c : e.children()) kids.push_back(subst_rec(c, env));
      return e.with_children(std::move(kids));
    }
  }
}

using Scope = std::vector<std::pair<std::string, std::string>>;

bool alpha_rec(const Expr& a, const Expr& b, std::map<std::string, int>& la,
               std::map<std::string, int>& lb, int depth) {
  if (a.kind() != b.kind()) return false;
  if (a.is(ExprKind::Var)) {
    auto ia = la.find(a.text());
    auto ib = lb.find(b.text());
    bool ba = ia != la.end(), bb = ib != lb.end();
    if (ba != bb) return false;
    if (ba) return ia->second == ib->second;
    return a.text() == b.text();
  }
  if (a.is(ExprKind::Lambda)) {
    if (a.lambda_has_default() != b.lambda_has_default()) return false;
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
      if (!alpha_rec(a.child(i), b.child(i), la, lb, depth)) return false;
    auto sa = la, sb = lb;
    int level = depth;
    for (std::size_t i = 0; i < a.lambda_params().size(); ++i) {
      la[a.lambda_params()[i]] = level;
      lb[b.lambda_params()[i]] = level;
      ++level;
    }
    bool ok = alpha_rec(a.lambda_body(), b.lambda_body(), la, lb, level);
    la = std::move(sa);
    lb = std::move(sb);
    return ok;
  }
  if (a.size() != b.size()) return false;
  if (a.size() == 0) return a == b;
  if (!(a.with_children(b.children()) == b)) {
    // payload differs (operator, slice bounds)
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!alpha_rec(a.child(i), b.child(i), la, lb, depth)) return false;
  return true;
}

}  // namespace

Expr replace_at(const Expr& e, const Path& p, const Expr& sub) { return replace_rec(e, p, 0, sub); }

bool is_prefix(const Path& prefix, const Path& p) {
  return prefix.size() <= p.size() && std::equal(prefix.begin(), prefix.end(), p.begin());
}

std::vector<std::pair<Path, Expr>> subterms(const Expr& e) {
  std::vector<std::pair<Path, Expr>> out;
  Path cur;
  subterms_rec(e, cur, out);
  return out;
}

std::set<std::string> free_vars(const Expr& e) {
  std::multiset<std::string> bound;
  std::set<std::string> out;
  free_rec(e, bound, out);
  return out;
}

bool occurs_free(const Expr& e, const std::string& name) { return free_vars(e).count(name) > 0; }

std::set<std::string> all_names(const Expr& e) {
  std::set<std::string> out;
  names_rec(e, out);
  return out;
}

Expr substitute(const Expr& e, const std::string& name, const Expr& value) {
  return subst_rec(e, {{name, value}});
}

Expr substitute_all(const Expr& e, const std::vector<std::pair<std::string, Expr>>& bindings) {
  std::map<std::string, Expr> env;
  for (const auto& [k, v] : bindings) env.insert_or_assign(k, v);
  return subst_rec(e, env);
}

bool alpha_equal(const Expr& a, const Expr& b) {
  std::map<std::string, int> la, lb;
  return alpha_rec(a, b, la, lb, 0);
}

std::size_t expr_size(const Expr& e) {
  std::size_t n = 1;
  for (const auto& c : e.children()) n += expr_size(c);
  return n;
}

}  // namespace stepwise
