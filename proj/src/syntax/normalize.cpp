// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "stepwise/program.hpp"

namespace stepwise {

namespace {

// `if c: v = e1 else: v = e2` with matching names.
bool is_cond_assign(const Stmt& s) {
  return s.kind == Stmt::Kind::If && s.then_block.size() == 1 && s.else_block.size() == 1 &&
         s.then_block[0].kind == Stmt::Kind::Assign && s.else_block[0].kind == Stmt::Kind::Assign &&
         s.then_block[0].name == s.else_block[0].name;
}

using Env = std::vector<std::pair<std::string, Expr>>;

Expr normal_block(const Block& b, Env env, std::vector<Expr> guards, std::vector<LocalInit>& locals,
                  const std::string& fname) {
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Stmt& s = b[i];
    bool last = i + 1 == b.size();
    if (s.kind == Stmt::Kind::Assign && !last) {
      Expr v = substitute_all(s.value, env);
      locals.push_back({s.name, v, guards});
      env.emplace_back(s.name, v);
      continue;
    }
    if (is_cond_assign(s) && !last) {
      Expr c = substitute_all(s.value, env);
      Expr v = Expr::cond(substitute_all(s.then_block[0].value, env), c,
                          substitute_all(s.else_block[0].value, env), s.span);
      locals.push_back({s.then_block[0].name, v, guards});
      env.emplace_back(s.then_block[0].name, v);
      continue;
    }
    if (s.kind == Stmt::Kind::Return && last) return substitute_all(s.value, env);
    if (s.kind == Stmt::Kind::If && last && !s.else_block.empty()) {
      Expr c = substitute_all(s.value, env);
      auto gt = guards;
      gt.push_back(c);
      auto ge = guards;
      ge.push_back(Expr::unary(UnaryOp::Not, c));
      Expr x = normal_block(s.then_block, env, gt, locals, fname);
      Expr y = normal_block(s.else_block, env, ge, locals, fname);
      return Expr::cond(x, c, y, s.span);
    }
    throw GrammarError(s.line, "body of '" + fname + "' is not a list of definitions ending in a return");
  }
  throw GrammarError(0, "body of '" + fname + "' has no return");
}

Expr lambda_block(const Block& b, std::size_t from, const std::string& fname) {
  if (from >= b.size()) throw GrammarError(0, "body of '" + fname + "' has no return");
  const Stmt& s = b[from];
  bool last = from + 1 == b.size();
  auto let = [&](const std::string& name, Expr value) {
    Expr body = lambda_block(b, from + 1, fname);
    return Expr::call(Expr::lambda({name}, {true}, {value}, body, s.span), {}, s.span);
  };
  if (s.kind == Stmt::Kind::Assign && !last) return let(s.name, s.value);
  if (is_cond_assign(s) && !last)
    return let(s.then_block[0].name,
               Expr::cond(s.then_block[0].value, s.value, s.else_block[0].value, s.span));
  if (s.kind == Stmt::Kind::Return && last) return s.value;
  if (s.kind == Stmt::Kind::If && last && !s.else_block.empty())
    return Expr::cond(lambda_block(s.then_block, 0, fname), s.value,
                      lambda_block(s.else_block, 0, fname), s.span);
  throw GrammarError(s.line, "body of '" + fname + "' is not a list of definitions ending in a return");
}

}  // namespace

NormalBody normalize_body(const FuncDef& f) {
  if (f.stub) throw GrammarError(f.line, "'" + f.name + "' has no body");
  NormalBody out;
  out.expr = normal_block(f.body, {}, {}, out.locals, f.name);
  return out;
}

Expr lambda_form(const FuncDef& f) {
  if (f.stub) throw GrammarError(f.line, "'" + f.name + "' has no body");
  std::vector<std::string> names;
  for (const auto& p : f.params) names.push_back(p.name);
  std::vector<bool> flags(names.size(), false);
  return Expr::lambda(names, flags, {}, lambda_block(f.body, 0, f.name), f.span);
}

}  // namespace stepwise
