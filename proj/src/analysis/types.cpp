// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "stepwise/analysis.hpp"

namespace stepwise {

TypeError::TypeError(Path p, std::string exp, std::string fnd, const std::string& what)
    : std::runtime_error(what), path(std::move(p)), expected(std::move(exp)), found(std::move(fnd)) {}

bool is_primitive_function(const std::string& name) {
  return name == "float" || name == "float.is_integer" || name == "abs" || name == "len";
}

namespace {

using K = Type::Kind;

[[noreturn]] void fail(const Path& p, const std::string& expected, const Type& found, const std::string& ctx) {
  throw TypeError(p, expected, found.str(),
                  ctx + ": expected " + expected + ", found " + found.str() + " at " + path_text(p));
}

// Least common supertype for conditional branches.
std::optional<Type> join(const Type& a, const Type& b) {
  if (a.is(K::Error)) return b;
  if (b.is(K::Error)) return a;
  if (a == b) return a;
  if (a.numeric() && b.numeric()) return Type::float_t();
  return std::nullopt;
}

Type infer(const Expr& e, const TypeEnv& env, Path& path);

Type infer_child(const Expr& e, std::size_t i, const TypeEnv& env, Path& path) {
  path.push_back(i);
  Type t = infer(e.child(i), env, path);
  path.pop_back();
  return t;
}

Type infer_call(const Expr& e, const TypeEnv& env, Path& path) {
  std::vector<Type> args;
  for (std::size_t i = 1; i < e.size(); ++i) args.push_back(infer_child(e, i, env, path));
  const Expr& callee = e.callee();
  if (callee.is(ExprKind::Lambda)) {
    const auto& ps = callee.lambda_params();
    if (args.size() > ps.size()) fail(path, "at most " + std::to_string(ps.size()) + " arguments",
                                      Type::error_t(), "lambda application");
    TypeEnv inner = env;
    path.push_back(0);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (i < args.size()) {
        inner = inner.with(ps[i], args[i]);
        continue;
      }
      auto d = callee.lambda_default(i);
      if (!d) fail(path, "argument for '" + ps[i] + "'", Type::error_t(), "lambda application");
      std::size_t k = 0;
      for (std::size_t j = 0; j < i; ++j) k += callee.lambda_has_default()[j] ? 1 : 0;
      path.push_back(k);
      Type dt = infer(*d, env, path);
      path.pop_back();
      inner = inner.with(ps[i], dt);
    }
    path.push_back(callee.size() - 1);
    Type r = infer(callee.lambda_body(), inner, path);
    path.pop_back();
    path.pop_back();
    return r;
  }
  if (!callee.is(ExprKind::Var)) fail(path, "a function name", Type::error_t(), "call");
  const std::string& name = callee.text();
  if (is_primitive_function(name)) {
    if (args.size() != 1) fail(path, "one argument", Type::error_t(), name);
    const Type& a = args[0];
    if (name == "len") {
      if (!a.is(K::Str) && !a.is(K::Error)) fail(path, "str", a, name);
      return Type::int_t();
    }
    if (!a.numeric() && !a.is(K::Error)) fail(path, "int or float", a, name);
    if (name == "float") return Type::float_t();
    if (name == "float.is_integer") return Type::bool_t();
    return a.is(K::Error) ? Type::float_t() : a;
  }
  const Type* ft = env.find(name);
  if (!ft) throw TypeError(path, "a defined function", "undefined", "undefined function '" + name + "'");
  if (!ft->is(K::Function)) fail(path, "a function", *ft, "call of '" + name + "'");
  if (ft->params.size() != args.size())
    throw TypeError(path, std::to_string(ft->params.size()) + " arguments", std::to_string(args.size()),
                    "'" + name + "' takes " + std::to_string(ft->params.size()) + " arguments");
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!subtype(args[i], ft->params[i])) {
      path.push_back(i + 1);
      fail(path, ft->params[i].str(), args[i], "argument " + std::to_string(i + 1) + " of '" + name + "'");
    }
  }
  return *ft->result;
}

Type infer(const Expr& e, const TypeEnv& env, Path& path) {
  switch (e.kind()) {
    case ExprKind::IntLit: return Type::int_t();
    case ExprKind::FloatLit: return Type::float_t();
    case ExprKind::BoolLit: return Type::bool_t();
    case ExprKind::StrLit: return Type::str_t();
    case ExprKind::Error: return Type::error_t();
    case ExprKind::Var: {
      const Type* t = env.find(e.text());
      if (!t) throw TypeError(path, "a defined name", "undefined", "undefined name '" + e.text() + "'");
      if (t->is(K::Function)) fail(path, "a value", *t, "function '" + e.text() + "' used as a value");
      return *t;
    }
    case ExprKind::Unary: {
      Type x = infer_child(e, 0, env, path);
      if (e.unary_op() == UnaryOp::Not) {
        if (!x.is(K::Bool) && !x.is(K::Error)) fail(path, "bool", x, "not");
        return Type::bool_t();
      }
      if (!x.numeric() && !x.is(K::Error)) fail(path, "int or float", x, "unary -");
      return x;
    }
    case ExprKind::Slice: {
      Type b = infer_child(e, 0, env, path);
      if (!b.is(K::Str) && !b.is(K::Error)) fail(path, "str", b, "slice");
      return Type::str_t();
    }
    case ExprKind::Cond: {
      Type g = infer_child(e, 1, env, path);
      if (!g.is(K::Bool) && !g.is(K::Error)) fail(path, "bool", g, "conditional test");
      Type x = infer_child(e, 0, env, path);
      Type y = infer_child(e, 2, env, path);
      auto j = join(x, y);
      if (!j) fail(path, x.str(), y, "conditional branches");
      return *j;
    }
    case ExprKind::Call: return infer_call(e, env, path);
    case ExprKind::Lambda:
      fail(path, "an applied lambda", Type::error_t(), "lambda");
    case ExprKind::BinOp: {
      Type l = infer_child(e, 0, env, path);
      Type r = infer_child(e, 1, env, path);
      BinaryOp op = e.binary_op();
      bool le = l.is(K::Error), re = r.is(K::Error);
      auto num = [&](const Type& t) { return t.numeric() || t.is(K::Error); };
      std::string o = op_text(op);
      if (le && re && !is_comparison(op) && op != BinaryOp::And && op != BinaryOp::Or) return Type::error_t();
      switch (op) {
        case BinaryOp::And:
        case BinaryOp::Or:
          if (!l.is(K::Bool) && !le) fail(path, "bool", l, o);
          if (!r.is(K::Bool) && !re) fail(path, "bool", r, o);
          return Type::bool_t();
        case BinaryOp::Eq:
        case BinaryOp::Ne:
          if (!le && !re && l != r) fail(path, l.str(), r, o + " needs operands of one type");
          if (l.is(K::Function)) fail(path, "a value", l, o);
          return Type::bool_t();
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge:
          if (num(l) && num(r)) return Type::bool_t();
          if ((l.is(K::Str) || le) && (r.is(K::Str) || re)) return Type::bool_t();
          fail(path, l.str(), r, o);
        case BinaryOp::Add:
          if ((l.is(K::Str) || le) && (r.is(K::Str) || re) && !(le && re)) return Type::str_t();
          [[fallthrough]];
        case BinaryOp::Sub:
        case BinaryOp::Mul:
        case BinaryOp::Pow:
        case BinaryOp::FloorDiv:
          if (!num(l)) fail(path, "int or float", l, o);
          if (!num(r)) fail(path, "int or float", r, o);
          if ((l.is(K::Int) || le) && (r.is(K::Int) || re)) return Type::int_t();
          return Type::float_t();
        case BinaryOp::Div:
          if (!num(l)) fail(path, "int or float", l, o);
          if (!num(r)) fail(path, "int or float", r, o);
          return Type::float_t();
      }
    }
  }
  fail(path, "an expression", Type::error_t(), "type check");
}

}  // namespace

Type infer_type(const Expr& e, const TypeEnv& env) {
  Path p;
  return infer(e, env, p);
}

TypeEnv global_types(const Program& p) {
  TypeEnv env;
  for (const auto* prog : {&prelude(), &p}) {
    for (const auto& d : prog->defs) {
      if (auto f = std::get_if<FuncDef>(&d)) env.names.insert_or_assign(f->name, f->type());
    }
  }
  for (const auto& d : p.defs) {
    if (auto v = std::get_if<VarDef>(&d)) {
      if (v->type) {
        env.names.insert_or_assign(v->name, *v->type);
      } else {
        try {
          env.names.insert_or_assign(v->name, infer_type(v->value, env));
        } catch (const TypeError&) {
          // reported by type_check
        }
      }
    }
  }
  return env;
}

namespace {

void check_block(const Block& b, TypeEnv env, const FuncDef& f, std::vector<Violation>& out) {
  auto report = [&](const Stmt& s, const std::string& msg) { out.push_back({"TypeError", msg, s.line}); };
  for (const auto& s : b) {
    try {
      switch (s.kind) {
        case Stmt::Kind::Assign: {
          Type t = infer_type(s.value, env);
          if (s.type && !subtype(t, *s.type))
            report(s, "'" + s.name + "' is declared " + s.type->str() + " but defined as " + t.str());
          env = env.with(s.name, s.type ? *s.type : t);
          break;
        }
        case Stmt::Kind::Return: {
          Type t = infer_type(s.value, env);
          if (!subtype(t, f.result))
            report(s, "'" + f.name + "' returns " + f.result.str() + " but the value has type " + t.str());
          break;
        }
        case Stmt::Kind::If: {
          Type g = infer_type(s.value, env);
          if (!g.is(K::Bool)) report(s, "test has type " + g.str() + ", expected bool");
          check_block(s.then_block, env, f, out);
          check_block(s.else_block, env, f, out);
          // A conditional definition is visible after the if.
          if (s.then_block.size() == 1 && s.then_block[0].kind == Stmt::Kind::Assign) {
            const Stmt& a = s.then_block[0];
            Type t = a.type ? *a.type : infer_type(a.value, env);
            env = env.with(a.name, t);
          }
          break;
        }
      }
    } catch (const TypeError& e) {
      report(s, e.what());
    }
  }
}

}  // namespace

TypeCheckResult type_check(const Program& p) {
  TypeCheckResult r;
  r.env = global_types(p);
  TypeEnv running;
  for (const auto* prog : {&prelude(), &p})
    for (const auto& d : prog->defs)
      if (auto f = std::get_if<FuncDef>(&d)) running.names.insert_or_assign(f->name, f->type());
  for (const auto& d : p.defs) {
    if (auto v = std::get_if<VarDef>(&d)) {
      try {
        Type t = infer_type(v->value, running);
        if (v->type && !subtype(t, *v->type))
          r.violations.push_back({"TypeError", "'" + v->name + "' is declared " + v->type->str() +
                                                   " but defined as " + t.str(), v->line});
        running.names.insert_or_assign(v->name, v->type ? *v->type : t);
      } catch (const TypeError& e) {
        r.violations.push_back({"TypeError", e.what(), v->line});
      }
    }
  }
  for (const auto& d : p.defs) {
    auto f = std::get_if<FuncDef>(&d);
    if (!f) continue;
    TypeEnv env = r.env;
    for (const auto& prm : f->params) env = env.with(prm.name, prm.type);
    if (!f->stub) check_block(f->body, env, *f, r.violations);
    auto spec_check = [&](const std::optional<Expr>& e, const char* what, auto accept) {
      if (!e) return;
      try {
        Type t = infer_type(*e, env);
        if (!accept(t))
          r.violations.push_back({"SpecTypeError", std::string(what) + " of '" + f->name + "' has type " + t.str(),
                                  f->line});
      } catch (const TypeError& ex) {
        r.violations.push_back({"SpecTypeError", std::string(what) + " of '" + f->name + "': " + ex.what(), f->line});
      }
    };
    spec_check(f->spec.pre, "precondition", [](const Type& t) { return t.is(K::Bool); });
    spec_check(f->spec.post, "postcondition", [&](const Type& t) { return subtype(t, f->result); });
    spec_check(f->spec.progress, "progress", [](const Type& t) { return t.is(K::Int); });
  }
  try {
    r.goal_type = infer_type(p.goal, r.env);
  } catch (const TypeError& e) {
    r.violations.push_back({"TypeError", std::string("goal: ") + e.what(), 0});
  }
  return r;
}

std::vector<Violation> check_program(const Program& p) {
  auto v = check_grammar(p);
  if (!v.empty()) return v;
  return type_check(p).violations;
}

}  // namespace stepwise
