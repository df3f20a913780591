// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "stepwise/analysis.hpp"
#include "stepwise/semantics.hpp"

namespace stepwise {

// ---- trust ----

bool operator==(const FunctionSpec& a, const FunctionSpec& b) {
  if (a.name != b.name || a.params.size() != b.params.size() || a.result != b.result) return false;
  for (std::size_t i = 0; i < a.params.size(); ++i)
    if (a.params[i].name != b.params[i].name || a.params[i].type != b.params[i].type) return false;
  return a.pre == b.pre && a.post == b.post && a.progress == b.progress && a.pmin == b.pmin;
}

FunctionSpec spec_from_stub(const FuncDef& f) {
  FunctionSpec s;
  s.name = f.name;
  s.params = f.params;
  s.result = f.result;
  s.pre = f.spec.pre.value_or(Expr::bool_lit(true));
  s.post = f.spec.post.value_or(Expr::error());
  s.progress = f.spec.progress;
  s.pmin = f.spec.pmin;
  return s;
}

TrustRegistry TrustRegistry::initial(const Program& p) {
  TrustRegistry r;
  for (const auto* prog : {&prelude(), &p}) {
    for (const auto& d : prog->defs) {
      auto f = std::get_if<FuncDef>(&d);
      if (f && f->stub) r.entries_.insert_or_assign(f->name, TrustEntry{spec_from_stub(*f), Provenance::Builtin});
    }
  }
  return r;
}

const TrustEntry* TrustRegistry::find(const std::string& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

TrustRegistry TrustRegistry::with(TrustEntry e) const {
  TrustRegistry r = *this;
  std::string name = e.spec.name;
  r.entries_.insert_or_assign(name, std::move(e));
  return r;
}

bool operator==(const TrustRegistry& a, const TrustRegistry& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (const auto& [k, v] : a.entries_) {
    auto it = b.entries_.find(k);
    if (it == b.entries_.end() || !(it->second.spec == v.spec) || it->second.provenance != v.provenance)
      return false;
  }
  return true;
}

// ---- ground evaluation ----

std::optional<Expr> eval_ground(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::IntLit:
    case ExprKind::FloatLit:
    case ExprKind::BoolLit:
    case ExprKind::StrLit:
    case ExprKind::Error:
      return e;
    case ExprKind::Unary: {
      auto x = eval_ground(e.child(0));
      if (!x || x->is(ExprKind::Error)) return x;
      return apply_unary(e.unary_op(), *x);
    }
    case ExprKind::BinOp: {
      auto l = eval_ground(e.child(0));
      if (!l || l->is(ExprKind::Error)) return l;
      BinaryOp op = e.binary_op();
      if (op == BinaryOp::And && l->is_bool(false)) return l;
      if (op == BinaryOp::Or && l->is_bool(true)) return l;
      auto r = eval_ground(e.child(1));
      if (!r || r->is(ExprKind::Error)) return r;
      return apply_binary(op, *l, *r);
    }
    case ExprKind::Slice: {
      auto b = eval_ground(e.child(0));
      if (!b || b->is(ExprKind::Error)) return b;
      return apply_slice(*b, e.slice_lo(), e.slice_hi());
    }
    case ExprKind::Cond: {
      auto g = eval_ground(e.child(1));
      if (!g || g->is(ExprKind::Error)) return g;
      if (!g->is(ExprKind::BoolLit)) return std::nullopt;
      return eval_ground(e.child(g->bool_value() ? 0 : 2));
    }
    case ExprKind::Call: {
      std::string name = e.callee_name();
      if (!is_primitive_function(name)) return std::nullopt;
      std::vector<Expr> args;
      for (const auto& a : e.args()) {
        auto v = eval_ground(a);
        if (!v || v->is(ExprKind::Error)) return v;
        args.push_back(*v);
      }
      return apply_primitive(name, args);
    }
    default:
      return std::nullopt;
  }
}

// ---- guards ----

namespace {

Expr negate(const Expr& g) { return Expr::unary(UnaryOp::Not, g); }

bool mentions_any(const Expr& g, const std::vector<std::string>& names) {
  for (const auto& n : names)
    if (occurs_free(g, n)) return true;
  return false;
}

void drop_rebound(std::vector<Expr>& guards, const std::vector<std::string>& names) {
  guards.erase(std::remove_if(guards.begin(), guards.end(), [&](const Expr& g) { return mentions_any(g, names); }),
               guards.end());
}

}  // namespace

Position position_at(const Expr& root, const Path& path, const std::vector<Expr>& root_guards) {
  Position pos;
  pos.guards = root_guards;
  const Expr* cur = &root;
  for (std::size_t i : path) {
    if (i >= cur->size()) throw InvalidPath("no child " + std::to_string(i) + " at " + print_expr(*cur));
    if (cur->is(ExprKind::Cond)) {
      if (i == 0) pos.guards.push_back(cur->child(1));
      if (i == 2) pos.guards.push_back(negate(cur->child(1)));
    } else if (cur->is(ExprKind::BinOp) && i == 1) {
      if (cur->binary_op() == BinaryOp::And) pos.guards.push_back(cur->child(0));
      if (cur->binary_op() == BinaryOp::Or) pos.guards.push_back(negate(cur->child(0)));
    } else if (cur->is(ExprKind::Lambda) && i + 1 == cur->size()) {
      drop_rebound(pos.guards, cur->lambda_params());
      for (const auto& p : cur->lambda_params()) pos.bound.insert(p);
    }
    cur = &cur->child(i);
  }
  return pos;
}

// ---- safety ----

const char* reason_name(UnsafeReason r) {
  switch (r) {
    case UnsafeReason::None: return "None";
    case UnsafeReason::UntrustedCallee: return "UntrustedCallee";
    case UnsafeReason::UnprovablePrecondition: return "UnprovablePrecondition";
    case UnsafeReason::UnsafeVariableDefinition: return "UnsafeVariableDefinition";
    case UnsafeReason::ErrorValue: return "ErrorValue";
  }
  return "?";
}

SafetyEnv::SafetyEnv(std::shared_ptr<const Program> program, TrustRegistry registry, TypeEnv types,
                     std::set<std::string> assumed_safe)
    : program_(std::move(program)),
      registry_(std::move(registry)),
      types_(std::move(types)),
      assumed_(std::move(assumed_safe)),
      cache_(std::make_shared<std::map<std::string, bool>>()) {}

namespace {

std::optional<Type> type_of(const Expr& e, const TypeEnv& env) {
  try {
    return infer_type(e, env);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

bool is_int(const std::optional<Type>& t) { return t && t->is(Type::Kind::Int); }

Expr as_float(const Expr& e, const std::optional<Type>& t) {
  if (!is_int(t)) return e;
  if (e.is(ExprKind::IntLit)) return Expr::float_lit(static_cast<double>(e.int_value()));
  return Expr::call("float", {e});
}

Expr both(Expr a, Expr b) { return Expr::binary(BinaryOp::And, std::move(a), std::move(b)); }

SafetyReport unsafe(const Path& p, UnsafeReason r, std::string msg) { return {false, p, r, std::move(msg)}; }

}  // namespace

std::vector<Expr> SafetyEnv::widen_args(const TrustEntry& entry, const std::vector<Expr>& args,
                                        const TypeEnv* env) const {
  std::vector<Expr> out = args;
  if (entry.provenance != Provenance::Builtin) return out;
  const TypeEnv& te = env ? *env : types_;
  for (std::size_t i = 0; i < out.size() && i < entry.spec.params.size(); ++i) {
    if (!entry.spec.params[i].type.is(Type::Kind::Float)) continue;
    out[i] = as_float(out[i], type_of(out[i], te));
  }
  return out;
}

namespace {

Expr instantiate(const FunctionSpec& s, const Expr& body, const std::vector<Expr>& args) {
  std::vector<std::pair<std::string, Expr>> b;
  for (std::size_t i = 0; i < s.params.size() && i < args.size(); ++i) b.emplace_back(s.params[i].name, args[i]);
  return substitute_all(body, b);
}

}  // namespace

Expr SafetyEnv::instantiate_pre(const TrustEntry& entry, const std::vector<Expr>& args, const TypeEnv* env) const {
  return instantiate(entry.spec, entry.spec.pre, widen_args(entry, args, env));
}

Expr SafetyEnv::instantiate_post(const TrustEntry& entry, const std::vector<Expr>& args,
                                 const TypeEnv* env) const {
  return instantiate(entry.spec, entry.spec.post, widen_args(entry, args, env));
}

std::optional<Expr> SafetyEnv::operator_pre(const Expr& e, const TypeEnv* env) const {
  if (!e.is(ExprKind::BinOp)) return std::nullopt;
  const TypeEnv& te = env ? *env : types_;
  const Expr& l = e.child(0);
  const Expr& r = e.child(1);
  auto lt = type_of(l, te);
  auto rt = type_of(r, te);
  switch (e.binary_op()) {
    case BinaryOp::Div:
    case BinaryOp::FloorDiv:
      return Expr::binary(BinaryOp::Ne, r, is_int(rt) ? Expr::int_lit(0) : Expr::float_lit(0.0));
    case BinaryOp::Pow: {
      if (is_int(lt) && is_int(rt)) return Expr::binary(BinaryOp::Ge, r, Expr::int_lit(0));
      Expr lf = as_float(l, lt);
      Expr zero_base = Expr::binary(BinaryOp::Eq, lf, Expr::float_lit(0.0));
      Expr neg_exp = Expr::binary(BinaryOp::Lt, r, is_int(rt) ? Expr::int_lit(0) : Expr::float_lit(0.0));
      Expr pre = Expr::unary(UnaryOp::Not, both(zero_base, neg_exp));
      if (!is_int(rt)) {
        Expr nonneg = Expr::binary(BinaryOp::Ge, lf, Expr::float_lit(0.0));
        Expr integral = Expr::call("float.is_integer", {r});
        pre = both(pre, Expr::binary(BinaryOp::Or, nonneg, integral));
      }
      return pre;
    }
    default:
      return std::nullopt;
  }
}

bool SafetyEnv::global_safe(const std::string& name) const {
  auto it = cache_->find(name);
  if (it != cache_->end()) return it->second;
  const VarDef* v = program_->find_var(name);
  if (!v) return false;
  (*cache_)[name] = false;  // a cycle is never safe
  bool ok = check(v->value, {}).safe;
  (*cache_)[name] = ok;
  return ok;
}

SafetyReport SafetyEnv::check(const Expr& e, const std::vector<Expr>& guards,
                              const std::set<std::string>& bound) const {
  std::vector<Expr> g = guards;
  std::set<std::string> b = bound;
  Path p;
  return check_rec(e, g, b, types_, p);
}

SafetyReport SafetyEnv::check_rec(const Expr& e, std::vector<Expr>& guards, std::set<std::string>& bound,
                                  const TypeEnv& types, Path& path) const {
  auto child = [&](std::size_t i) {
    path.push_back(i);
    SafetyReport r = check_rec(e.child(i), guards, bound, types, path);
    path.pop_back();
    return r;
  };
  auto guarded_child = [&](std::size_t i, Expr guard) {
    guards.push_back(std::move(guard));
    SafetyReport r = child(i);
    guards.pop_back();
    return r;
  };
  auto require = [&](const Expr& claim, const std::string& what) -> SafetyReport {
    EntailResult er = entails(guards, claim, types);
    if (er.verdict == Verdict::Proved) return {};
    return unsafe(path, UnsafeReason::UnprovablePrecondition,
                  "cannot show " + print_expr(claim) + " for " + what);
  };

  switch (e.kind()) {
    case ExprKind::IntLit:
    case ExprKind::FloatLit:
    case ExprKind::BoolLit:
    case ExprKind::StrLit:
      return {};
    case ExprKind::Error:
      return unsafe(path, UnsafeReason::ErrorValue, "ERROR is never safe");
    case ExprKind::Var: {
      const std::string& n = e.text();
      if (bound.count(n) || assumed_.count(n)) return {};
      if (program_->find_var(n)) {
        if (global_safe(n)) return {};
        return unsafe(path, UnsafeReason::UnsafeVariableDefinition, "definition of '" + n + "' is not safe");
      }
      return unsafe(path, UnsafeReason::UnsafeVariableDefinition, "'" + n + "' has no safe definition");
    }
    case ExprKind::Unary:
      return child(0);
    case ExprKind::Slice:
      return child(0);
    case ExprKind::Cond: {
      if (auto r = child(1); !r.safe) return r;
      if (auto r = guarded_child(0, e.child(1)); !r.safe) return r;
      return guarded_child(2, negate(e.child(1)));
    }
    case ExprKind::BinOp: {
      BinaryOp op = e.binary_op();
      if (auto r = child(0); !r.safe) return r;
      if (op == BinaryOp::And) return guarded_child(1, e.child(0));
      if (op == BinaryOp::Or) return guarded_child(1, negate(e.child(0)));
      if (auto r = child(1); !r.safe) return r;
      if (auto pre = operator_pre(e, &types)) return require(*pre, std::string("'") + op_text(op) + "'");
      return {};
    }
    case ExprKind::Lambda: {
      for (std::size_t i = 0; i + 1 < e.size(); ++i)
        if (auto r = child(i); !r.safe) return r;
      std::vector<Expr> saved = guards;
      std::set<std::string> saved_bound = bound;
      drop_rebound(guards, e.lambda_params());
      for (const auto& p : e.lambda_params()) bound.insert(p);
      path.push_back(e.size() - 1);
      SafetyReport r = check_rec(e.lambda_body(), guards, bound, types, path);
      path.pop_back();
      guards = std::move(saved);
      bound = std::move(saved_bound);
      return r;
    }
    case ExprKind::Call: {
      std::vector<Expr> args = e.args();
      for (std::size_t i = 1; i < e.size(); ++i)
        if (auto r = child(i); !r.safe) return r;
      const Expr& callee = e.callee();
      if (callee.is(ExprKind::Lambda)) {
        // Parameters are bound to safe arguments or safe defaults.
        const auto& params = callee.lambda_params();
        TypeEnv inner = types;
        for (std::size_t i = 0; i < params.size(); ++i) {
          std::optional<Type> t;
          if (i < args.size()) t = type_of(args[i], types);
          else if (auto d = callee.lambda_default(i)) t = type_of(*d, types);
          if (t) inner = inner.with(params[i], *t);
        }
        for (std::size_t i = 0; i + 1 < callee.size(); ++i) {
          path.insert(path.end(), {0, i});
          SafetyReport r = check_rec(callee.child(i), guards, bound, types, path);
          path.resize(path.size() - 2);
          if (!r.safe) return r;
        }
        std::vector<Expr> saved = guards;
        std::set<std::string> saved_bound = bound;
        drop_rebound(guards, params);
        for (const auto& p : params) bound.insert(p);
        path.insert(path.end(), {0, callee.size() - 1});
        SafetyReport r = check_rec(callee.lambda_body(), guards, bound, inner, path);
        path.resize(path.size() - 2);
        guards = std::move(saved);
        bound = std::move(saved_bound);
        return r;
      }
      std::string name = e.callee_name();
      if (is_primitive_function(name)) return {};
      if (const TrustEntry* t = registry_.find(name)) {
        Expr pre = instantiate_pre(*t, args, &types);
        return require(pre, "'" + name + "'");
      }
      return unsafe(path, UnsafeReason::UntrustedCallee, "'" + (name.empty() ? print_expr(callee) : name) +
                                                             "' is not trusted");
    }
  }
  return {};
}

SafetyReport is_safe(const Expr& e, const std::vector<Expr>& guards, const SafetyEnv& env) {
  return env.check(e, guards);
}

UnsafeLocalError::UnsafeLocalError(std::string l, Expr v, SafetyReport r)
    : std::runtime_error("local '" + l + "' is not safe: " + r.message),
      local(std::move(l)),
      value(std::move(v)),
      report(std::move(r)) {}

Expr normalize_to_expression(const FuncDef& f, const SafetyEnv& env, const std::vector<Expr>& args) {
  if (!args.empty() && args.size() != f.params.size())
    throw std::invalid_argument("'" + f.name + "' takes " + std::to_string(f.params.size()) + " arguments");
  NormalBody nb = normalize_body(f);
  std::vector<std::pair<std::string, Expr>> binding;
  for (std::size_t i = 0; i < args.size(); ++i) binding.emplace_back(f.params[i].name, args[i]);
  std::set<std::string> assumed = env.assumed_safe();
  TypeEnv types = env.types();
  if (args.empty()) {
    for (const auto& p : f.params) {
      assumed.insert(p.name);
      types = types.with(p.name, p.type);
    }
  }
  auto program = std::shared_ptr<const Program>(std::shared_ptr<const Program>{}, &env.program());
  SafetyEnv local(program, env.registry(), types, assumed);
  for (const auto& li : nb.locals) {
    Expr value = substitute_all(li.value, binding);
    std::vector<Expr> guards;
    for (const auto& g : li.guards) guards.push_back(substitute_all(g, binding));
    SafetyReport r = local.check(value, guards);
    if (!r.safe) throw UnsafeLocalError(li.name, value, r);
  }
  return substitute_all(nb.expr, binding);
}

}  // namespace stepwise
