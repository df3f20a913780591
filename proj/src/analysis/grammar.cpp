// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "stepwise/analysis.hpp"

namespace stepwise {

namespace {

struct Checker {
  const Program& p;
  std::vector<Violation> out;
  std::set<std::string> globals;
  std::set<std::string> modules;

  void add(const char* code, std::string msg, int line) { out.push_back({code, std::move(msg), line}); }

  bool known_global(const std::string& n) const {
    if (globals.count(n) || is_primitive_function(n)) return true;
    auto dot = n.find('.');
    if (dot != std::string::npos && modules.count(n.substr(0, dot))) {
      for (const auto& d : prelude().defs)
        if (auto f = std::get_if<FuncDef>(&d); f && f->name == n) return true;
    }
    return false;
  }

  void check_expr(const Expr& e, const std::set<std::string>& scope, int line, const std::string& where,
                  bool allow_lambda) {
    for (const auto& [path, sub] : subterms(e)) {
      if (sub.is(ExprKind::Error)) add("ErrorLiteral", "ERROR cannot be written in " + where, line);
      if (sub.is(ExprKind::Lambda) && !allow_lambda) add("LambdaNotAllowed", "lambda is not allowed in " + where, line);
    }
    for (const auto& n : free_vars(e)) {
      if (scope.count(n) || known_global(n)) continue;
      add("UndefinedName", "'" + n + "' is not defined before its use in " + where, line);
    }
  }

  static bool is_cond_assign(const Stmt& s) {
    return s.kind == Stmt::Kind::If && s.then_block.size() == 1 && s.else_block.size() == 1 &&
           s.then_block[0].kind == Stmt::Kind::Assign && s.else_block[0].kind == Stmt::Kind::Assign;
  }

  void define_local(const Stmt& s, const std::string& name, std::set<std::string>& scope, const FuncDef& f) {
    if (globals.count(name))
      add("ShadowsGlobal", "local '" + name + "' in '" + f.name + "' reuses a global name", s.line);
    else if (scope.count(name))
      add("DuplicateDefinition", "'" + name + "' is defined twice in '" + f.name + "'", s.line);
    scope.insert(name);
  }

  void block(const Block& b, std::set<std::string> scope, const FuncDef& f) {
    if (b.empty()) {
      add("MissingReturn", "'" + f.name + "' has an empty block", f.line);
      return;
    }
    std::string where = "'" + f.name + "'";
    for (std::size_t i = 0; i < b.size(); ++i) {
      const Stmt& s = b[i];
      bool last = i + 1 == b.size();
      switch (s.kind) {
        case Stmt::Kind::Assign:
          check_expr(s.value, scope, s.line, where, false);
          define_local(s, s.name, scope, f);
          if (last) add("MissingReturn", "block in '" + f.name + "' must end with a return", s.line);
          break;
        case Stmt::Kind::Return:
          check_expr(s.value, scope, s.line, where, false);
          if (!last) add("UnreachableCode", "statements after return in '" + f.name + "'", s.line);
          break;
        case Stmt::Kind::If: {
          check_expr(s.value, scope, s.line, where, false);
          if (s.else_block.empty()) {
            add("IfWithoutElse", "every if in '" + f.name + "' needs an else branch", s.line);
            block(s.then_block, scope, f);
            break;
          }
          if (!last) {
            bool returns = !s.then_block.empty() && s.then_block.back().kind != Stmt::Kind::Assign &&
                           s.else_block.back().kind != Stmt::Kind::Assign;
            if (returns) {
              add("UnreachableCode", "statements after an if that returns in '" + f.name + "'", s.line);
              break;
            }
            if (!is_cond_assign(s)) {
              add("NotConditionalDefinition",
                  "an if before the end of a block must define one variable in each branch", s.line);
              break;
            }
            const Stmt& a = s.then_block[0];
            const Stmt& c = s.else_block[0];
            if (a.name != c.name)
              add("ConditionalNameMismatch", "branches define '" + a.name + "' and '" + c.name + "'", s.line);
            if ((a.type && c.type && *a.type != *c.type) || (a.type.has_value() != c.type.has_value()))
              add("ConditionalTypeMismatch", "branches give '" + a.name + "' different types", s.line);
            check_expr(a.value, scope, a.line, where, false);
            check_expr(c.value, scope, c.line, where, false);
            define_local(s, a.name, scope, f);
            break;
          }
          block(s.then_block, scope, f);
          block(s.else_block, scope, f);
          break;
        }
      }
    }
  }

  void run() {
    for (const auto& d : p.defs) {
      if (auto im = std::get_if<ImportDef>(&d)) {
        if (im->module != "math") add("UnknownModule", "no library stubs for module '" + im->module + "'", im->line);
        modules.insert(im->module);
      }
    }
    // Functions may call any function, including later ones.
    std::set<std::string> funcs;
    for (const auto& d : p.defs)
      if (auto f = std::get_if<FuncDef>(&d)) funcs.insert(f->name);
    for (const auto& d : p.defs) {
      if (auto v = std::get_if<VarDef>(&d)) {
        if (globals.count(v->name) || funcs.count(v->name))
          add("DuplicateDefinition", "'" + v->name + "' is defined twice", v->line);
        std::set<std::string> scope(funcs.begin(), funcs.end());
        check_expr(v->value, scope, v->line, "the definition of '" + v->name + "'", false);
        globals.insert(v->name);
      } else if (auto f = std::get_if<FuncDef>(&d)) {
        if (globals.count(f->name)) add("DuplicateDefinition", "'" + f->name + "' is defined twice", f->line);
        globals.insert(f->name);
      }
    }
    std::set<std::string> seen_funcs;
    for (const auto& d : p.defs) {
      auto f = std::get_if<FuncDef>(&d);
      if (!f) continue;
      if (!seen_funcs.insert(f->name).second) continue;
      if (f->name.find('.') != std::string::npos && !f->stub)
        add("DottedDefinition", "only stubs may have dotted names", f->line);
      std::set<std::string> scope;
      for (const auto& prm : f->params) {
        if (globals.count(prm.name))
          add("ShadowsGlobal", "parameter '" + prm.name + "' of '" + f->name + "' reuses a global name", f->line);
        if (!scope.insert(prm.name).second)
          add("DuplicateDefinition", "parameter '" + prm.name + "' repeated in '" + f->name + "'", f->line);
      }
      if (f->stub) {
        if (!f->spec.post) add("MissingSpec", "stub '" + f->name + "' needs a '# post:' comment", f->line);
      } else {
        block(f->body, scope, *f);
      }
      for (const auto* e : {&f->spec.pre, &f->spec.post, &f->spec.progress}) {
        if (!*e) continue;
        for (const auto& n : free_vars(**e)) {
          if (scope.count(n) || known_global(n)) continue;
          add("UndefinedName", "'" + n + "' in the spec of '" + f->name + "' is not a parameter", f->line);
        }
      }
      if ((f->spec.progress.has_value()) != (f->spec.pmin.has_value()))
        add("IncompleteProgress", "'" + f->name + "' needs both '# progress:' and '# pmin:'", f->line);
    }
    check_expr(p.goal, {}, 0, "the goal", true);
  }
};

}  // namespace

std::vector<Violation> check_grammar(const Program& p) {
  Checker c{p, {}, {}, {}};
  c.run();
  return c.out;
}

}  // namespace stepwise
