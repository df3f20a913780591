// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <functional>
#include <sstream>

#include "snm/internal.hpp"

namespace stepwise {

namespace snm {

Expr simpler_guard(const VerificationContext& v, const std::vector<Expr>& args) {
  const FunctionSpec& s = v.spec;
  std::vector<std::pair<std::string, Expr>> at_call, at_entry;
  for (std::size_t i = 0; i < s.params.size() && i < args.size(); ++i) {
    at_call.emplace_back(s.params[i].name, args[i]);
    at_entry.emplace_back(s.params[i].name, v.args.at(i));
  }
  Expr guard = substitute_all(s.pre, at_call);
  if (s.progress && s.pmin) {
    Expr cur = substitute_all(*s.progress, at_entry);
    Expr next = substitute_all(*s.progress, at_call);
    guard = Expr::binary(BinaryOp::And, guard, Expr::binary(BinaryOp::Gt, cur, Expr::int_lit(*s.pmin)));
    guard = Expr::binary(BinaryOp::And, guard, Expr::binary(BinaryOp::Gt, cur, next));
  }
  return guard;
}

}  // namespace snm

namespace {

using snm::Family;

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join_and(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += i + 1 == names.size() ? " and " : ", ";
    out += names[i];
  }
  return out;
}

std::optional<Type> type_or_none(const Expr& e, const TypeEnv& env) {
  try {
    return infer_type(e, env);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

bool block_uses(const Block& b, const std::string& name) {
  for (const auto& s : b) {
    if (occurs_free(s.value, name)) return true;
    if (block_uses(s.then_block, name) || block_uses(s.else_block, name)) return true;
  }
  return false;
}

struct Result {
  Expr replacement;
  std::string label;
  std::optional<std::string> removed;
};

class Applier {
 public:
  Applier(const Trace& t, const RuleApplication& app)
      : t_(t), app_(app), target_(expr_at(t.current(), app.target)), pos_(t.position(app.target)),
        env_(t.safety_env()), types_(t.types()) {}

  Result run() {
    const std::string& r = app_.rule;
    if (r == "arithmetic") return arithmetic();
    if (r == "string-arithmetic") return string_arithmetic();
    if (r == "boolean-arithmetic") return boolean_arithmetic();
    if (r == "name-to-def") return name_to_def();
    if (r == "name-to-body") return name_to_body();
    if (r == "name-to-spec") return name_to_spec();
    if (r == "name-to-spec-simpler") return name_to_spec_simpler();
    if (r == "if-true") return if_literal(true);
    if (r == "if-false") return if_literal(false);
    if (r == "if-irrelevant") return if_irrelevant();
    if (r == "consider-tests") return consider_tests();
    if (r == "cases-split") return cases_split();
    if (r == "func-to-lambda") return func_to_lambda();
    if (r == "beta-param") return beta_param();
    if (r == "func-to-body") return func_to_body();
    if (r == "alpha-fresh") return alpha_fresh();
    throw UnknownRule("unknown rule " + r);
  }

 private:
  [[noreturn]] void fail(const std::string& why) const { throw RuleNotApplicable(app_.rule, why); }

  std::optional<std::string> param(const std::string& key) const {
    auto it = app_.params.find(key);
    if (it == app_.params.end()) return std::nullopt;
    return it->second;
  }

  Expr param_expr(const std::string& key) const {
    try {
      return parse_expr(*param(key));
    } catch (const std::exception& e) {
      fail("cannot parse " + key + ": " + e.what());
    }
  }

  void require_safe(const Expr& e, const std::string& what) const {
    SafetyReport rep = env_.check(e, pos_.guards, pos_.bound);
    if (!rep.safe) fail(what + " " + print_expr(e) + " is not safe: " + rep.message);
  }

  void require_safe_args(const Expr& call) const {
    for (const auto& a : call.args()) require_safe(a, "argument");
  }

  std::string target_text() const { return print_expr(target_); }

  // ---- evaluation ----

  Result collapse_rule(Family f, const std::string& label) {
    auto rs = snm::collapse(target_, f, types_);
    if (rs.empty()) fail("nothing to evaluate in " + target_text());
    return {snm::apply_replacements(target_, rs), label, std::nullopt};
  }

  Result arithmetic() {
    if (!param("to")) return collapse_rule(Family::Numeric, "arithmetic");
    Expr to = param_expr("to");
    std::string eq = " (" + target_text() + " = " + print_expr(to) + ")";
    auto a = eval_ground(target_);
    auto b = eval_ground(to);
    if (a && b) {
      if (!(*a == *b)) fail(print_expr(*a) + " differs from " + print_expr(*b));
      return {to, "arithmetic" + eq, std::nullopt};
    }
    require_safe(target_, "target");
    require_safe(to, "result form");
    auto ta = type_or_none(target_, types_);
    auto tb = type_or_none(to, types_);
    if (!ta || !tb || !subtype(*tb, *ta)) fail("result form has a different type");
    if (!algebra_equal(target_, to, pos_.guards, types_))
      fail("cannot show " + target_text() + " equals " + print_expr(to));
    return {to, "algebra" + eq, std::nullopt};
  }

  Result string_arithmetic() {
    auto rs = snm::collapse(target_, Family::String, types_);
    if (rs.empty()) fail("no string operation on literals in " + target_text());
    const Expr& first = expr_at(target_, rs.front().path);
    std::string op = first.is(ExprKind::Slice) ? "[ ]" : op_text(first.binary_op());
    return {snm::apply_replacements(target_, rs), "string-arithmetic: " + op, std::nullopt};
  }

  // Replaces boolean sub-expressions the guards decide.
  std::optional<Result> by_context() {
    Expr out = target_;
    bool changed = false;
    std::function<void(const Expr&, Path&)> walk = [&](const Expr& e, Path& rel) {
      if (e.is(ExprKind::Lambda)) return;
      if (!e.is_literal() && !e.is(ExprKind::Error)) {
        auto ty = type_or_none(e, types_);
        if (ty && ty->is(Type::Kind::Bool)) {
          Path abs = app_.target;
          abs.insert(abs.end(), rel.begin(), rel.end());
          Position p = t_.position(abs);
          if (env_.check(e, p.guards, p.bound).safe) {
            Verdict v = entails(p.guards, e, types_).verdict;
            if (v != Verdict::Unknown) {
              out = replace_at(out, rel, Expr::bool_lit(v == Verdict::Proved, e.span()));
              changed = true;
              return;
            }
          }
        }
      }
      for (std::size_t i = 0; i < e.size(); ++i) {
        rel.push_back(i);
        walk(e.child(i), rel);
        rel.pop_back();
      }
    };
    Path rel;
    walk(target_, rel);
    if (!changed) return std::nullopt;
    return Result{out, "boolean-arithmetic (context)", std::nullopt};
  }

  Result boolean_arithmetic() {
    auto rs = snm::collapse(target_, Family::Boolean, types_);
    if (!rs.empty()) return {snm::apply_replacements(target_, rs), "boolean-arithmetic", std::nullopt};
    if (target_.is(ExprKind::BinOp) &&
        (target_.binary_op() == BinaryOp::And || target_.binary_op() == BinaryOp::Or)) {
      bool is_and = target_.binary_op() == BinaryOp::And;
      const Expr& l = target_.child(0);
      const Expr& r = target_.child(1);
      if (l.is(ExprKind::BoolLit)) {
        bool keep_right = l.bool_value() == is_and;
        return {keep_right ? r : l, "boolean-arithmetic", std::nullopt};
      }
      if (r.is(ExprKind::BoolLit)) {
        require_safe(l, "left operand");
        bool keep_left = r.bool_value() == is_and;
        return {keep_left ? l : r, "boolean-arithmetic", std::nullopt};
      }
    }
    if (t_.config().auto_context)
      if (auto c = by_context()) return *c;
    fail("no boolean simplification applies to " + target_text());
  }

  // ---- definitions ----

  const VarDef& global_var(const std::string& n) const {
    if (pos_.bound.count(n)) fail(n + " is a lambda parameter here");
    const VarDef* d = t_.program().find_var(n);
    if (!d) fail(n + " has no definition");
    return *d;
  }

  Result name_to_def() {
    auto vars = param("vars");
    if (param("remove") && *param("remove") != "false") return remove_definition(vars);
    if (!vars) {
      if (!target_.is(ExprKind::Var)) fail("target is not a variable");
      const VarDef& d = global_var(target_.text());
      for (const auto& n : free_vars(d.value))
        if (pos_.bound.count(n)) fail("definition of " + d.name + " would be captured by " + n);
      return {d.value, "name-to-def (" + d.name + ")", std::nullopt};
    }
    auto names = split_names(*vars);
    if (names.empty()) fail("no names given");
    std::vector<std::pair<std::string, Expr>> bindings;
    std::set<std::string> inner = snm::binders(target_);
    for (const auto& n : names) {
      const VarDef& d = global_var(n);
      if (!occurs_free(target_, n)) fail(n + " does not occur in " + target_text());
      for (const auto& fv : free_vars(d.value))
        if (inner.count(fv) || pos_.bound.count(fv)) fail("definition of " + n + " would be captured by " + fv);
      bindings.emplace_back(n, d.value);
    }
    return {substitute_all(target_, bindings), "name-to-def (" + join_and(names) + ")", std::nullopt};
  }

  Result remove_definition(const std::optional<std::string>& vars) {
    std::vector<std::string> names;
    if (vars) names = split_names(*vars);
    else if (target_.is(ExprKind::Var)) names = {target_.text()};
    if (names.size() != 1) fail("removal takes exactly one name");
    const std::string& n = names[0];
    if (!t_.program().find_var(n)) fail(n + " has no definition");
    if (occurs_free(t_.current(), n)) fail(n + " is still used");
    for (const auto& def : t_.program().defs) {
      if (auto v = std::get_if<VarDef>(&def); v && v->name != n && occurs_free(v->value, n))
        fail(n + " is still used by " + v->name);
      if (auto f = std::get_if<FuncDef>(&def); f && block_uses(f->body, n)) fail(n + " is still used by " + f->name);
    }
    if (!env_.global_safe(n)) fail("definition of " + n + " is not safe");
    return {target_, "name-to-def (remove " + n + ")", n};
  }

  const Expr& call_target(const char* what) const {
    if (!target_.is(ExprKind::Call)) fail(std::string("target is not ") + what);
    return target_;
  }

  Result name_to_body() {
    const Expr& call = call_target("a call");
    std::string name = call.callee_name();
    if (name.empty()) fail("callee is not a function name");
    if (t_.registry().trusted(name)) fail(name + " is trusted; use name-to-spec");
    const FuncDef* f = t_.program().find_func(name);
    if (!f) fail(name + " is not a defined function");
    if (f->stub) fail(name + " has no body");
    auto args = call.args();
    if (args.size() != f->params.size()) fail("wrong number of arguments");
    require_safe_args(call);
    try {
      return {normalize_to_expression(*f, env_, args), "name-to-body (" + name + ")", std::nullopt};
    } catch (const UnsafeLocalError& e) {
      fail("local " + e.local + " is not safe: " + e.report.message);
    }
  }

  Result name_to_spec() {
    const Expr& call = call_target("a call");
    std::string name = call.callee_name();
    const TrustEntry* entry = t_.registry().find(name);
    if (!entry) fail(name.empty() ? std::string("callee is not a function name") : name + " is not trusted");
    auto args = call.args();
    if (args.size() != entry->spec.params.size()) fail("wrong number of arguments");
    require_safe_args(call);
    Expr pre = env_.instantiate_pre(*entry, args, &types_);
    Expr post = env_.instantiate_post(*entry, args, &types_);
    return {Expr::cond(post, pre, Expr::error(), call.span()), "name-to-spec (" + name + ")", std::nullopt};
  }

  Result name_to_spec_simpler() {
    const Expr& call = call_target("a call");
    const auto& v = t_.verification();
    if (t_.mode() != Mode::Verification || !v) fail("only available while verifying a function");
    std::string name = call.callee_name();
    if (name != v->spec.name) fail("not a call of " + v->spec.name);
    if (!v->body_span.contains(call.span())) fail("call is not inside the inlined body of " + name);
    auto args = call.args();
    if (args.size() != v->spec.params.size()) fail("wrong number of arguments");
    require_safe_args(call);
    std::vector<std::pair<std::string, Expr>> at_call;
    for (std::size_t i = 0; i < args.size(); ++i) at_call.emplace_back(v->spec.params[i].name, args[i]);
    Expr post = substitute_all(v->spec.post, at_call);
    return {Expr::cond(post, snm::simpler_guard(*v, args), Expr::error(), call.span()),
            "name-to-spec-simpler (" + name + ")", std::nullopt};
  }

  // ---- conditionals ----

  const Expr& cond_target() const {
    if (!target_.is(ExprKind::Cond)) fail("target is not a conditional");
    return target_;
  }

  Result if_literal(bool want) {
    const Expr& c = cond_target();
    if (!c.child(1).is_bool(want)) fail(std::string("test is not ") + (want ? "True" : "False"));
    return {c.child(want ? 0 : 2), want ? "if-true" : "if-false", std::nullopt};
  }

  Result if_irrelevant() {
    const Expr& c = cond_target();
    if (!alpha_equal(c.child(0), c.child(2))) fail("branches differ");
    require_safe(c.child(1), "test");
    return {c.child(0), "if-irrelevant", std::nullopt};
  }

  Result consider_tests() {
    if (target_.is_value()) fail("target is already a value");
    auto ty = type_or_none(target_, types_);
    if (ty && ty->is(Type::Kind::Bool)) {
      require_safe(target_, "test");
      EntailResult r = entails(pos_.guards, target_, types_);
      if (r.verdict != Verdict::Unknown)
        return {Expr::bool_lit(r.verdict == Verdict::Proved, target_.span()), "consider-tests", std::nullopt};
    }
    if (target_.is(ExprKind::Var)) {
      if (pos_.bound.count(target_.text())) fail(target_.text() + " is a lambda parameter here");
      auto v = forced_value(pos_.guards, target_.text(), types_);
      if (v && !(*v == target_)) {
        require_safe(*v, "forced value");
        return {*v, "consider-tests", std::nullopt};
      }
    }
    fail("the tests in force do not decide " + target_text());
  }

  Result cases_split() {
    if (!param("guard")) fail("missing guard");
    Expr c = param_expr("guard");
    auto ty = type_or_none(c, types_);
    if (!ty || !ty->is(Type::Kind::Bool)) fail("guard is not a boolean expression");
    require_safe(c, "guard");
    return {Expr::cond(target_, c, target_), "cases-split (" + print_expr(c) + ")", std::nullopt};
  }

  // ---- functions ----

  Result func_to_lambda() {
    Expr name_node = target_;
    if (target_.is(ExprKind::Call)) name_node = target_.callee();
    if (!name_node.is(ExprKind::Var)) fail("target does not name a function");
    const std::string& name = name_node.text();
    if (pos_.bound.count(name)) fail(name + " is a lambda parameter here");
    const FuncDef* f = t_.program().find_func(name);
    if (!f) fail(name + " is not a defined function");
    if (f->stub) fail(name + " has no body");
    Expr lam = lambda_form(*f);
    for (const auto& b : snm::binders(lam))
      if (pos_.bound.count(b)) fail(b + " is already bound here; apply alpha-fresh first");
    Expr out = target_.is(ExprKind::Call) ? replace_at(target_, {0}, lam) : lam;
    return {out, "func-to-lambda (" + name + ")", std::nullopt};
  }

  const Expr& lambda_call() const {
    if (!target_.is(ExprKind::Call) || !target_.callee().is(ExprKind::Lambda))
      fail("target is not a lambda application");
    return target_;
  }

  Result beta_param() {
    const Expr& call = lambda_call();
    const Expr& lam = call.callee();
    const auto& params = lam.lambda_params();
    if (params.empty()) fail("lambda has no parameters");
    std::size_t i = 0;
    if (auto p = param("param")) {
      auto it = std::find(params.begin(), params.end(), *p);
      if (it == params.end()) fail(*p + " is not a parameter");
      i = static_cast<std::size_t>(it - params.begin());
    }
    auto args = call.args();
    std::optional<Expr> value;
    if (i < args.size()) value = args[i];
    else value = lam.lambda_default(i);
    if (!value) fail("no argument for " + params[i]);
    require_safe(*value, "argument");
    std::set<std::string> inner = snm::binders(lam.lambda_body());
    for (std::size_t j = 0; j < params.size(); ++j)
      if (j != i) inner.insert(params[j]);
    for (const auto& fv : free_vars(*value))
      if (inner.count(fv)) fail("argument would be captured by " + fv + "; apply alpha-fresh first");
    Expr body = substitute(lam.lambda_body(), params[i], *value);
    std::vector<std::string> ps;
    std::vector<bool> flags;
    std::vector<Expr> defaults;
    for (std::size_t j = 0; j < params.size(); ++j) {
      if (j == i) continue;
      ps.push_back(params[j]);
      flags.push_back(lam.lambda_has_default()[j]);
      if (auto d = lam.lambda_default(j)) defaults.push_back(*d);
    }
    if (i < args.size()) args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    Expr nl = Expr::lambda(ps, flags, defaults, body, lam.span());
    return {Expr::call(nl, args, call.span()), "beta-param (" + params[i] + ")", std::nullopt};
  }

  Result func_to_body() {
    const Expr& call = lambda_call();
    if (!call.callee().lambda_params().empty()) fail("lambda still has parameters");
    if (!call.args().empty()) fail("application still has arguments");
    return {call.callee().lambda_body(), "func-to-body", std::nullopt};
  }

  Result alpha_fresh() {
    Expr lam = target_;
    bool in_call = false;
    if (target_.is(ExprKind::Call) && target_.callee().is(ExprKind::Lambda)) {
      lam = target_.callee();
      in_call = true;
    }
    if (!lam.is(ExprKind::Lambda)) fail("target is not a lambda");
    const auto& params = lam.lambda_params();
    if (params.empty()) fail("lambda has no parameters");
    std::set<std::string> taken = all_names(t_.current());
    for (const auto& n : t_.program().names()) taken.insert(n);
    for (const auto& n : prelude().names()) taken.insert(n);
    taken.insert(t_.symbolic().begin(), t_.symbolic().end());

    std::map<std::string, std::string> renames;
    if (auto given = param("names")) {
      for (const auto& item : split_names(*given)) {
        auto eq = item.find('=');
        if (eq == std::string::npos) fail("expected old=new in " + item);
        std::string from = item.substr(0, eq), to = item.substr(eq + 1);
        if (std::find(params.begin(), params.end(), from) == params.end()) fail(from + " is not a parameter");
        if (taken.count(to)) fail(to + " is not fresh");
        try {
          if (!parse_expr(to).is(ExprKind::Var)) fail(to + " is not a name");
        } catch (const SyntaxError&) {
          fail(to + " is not a name");
        }
        renames[from] = to;
        taken.insert(to);
      }
    } else {
      for (const auto& p : params) {
        for (int k = 1;; ++k) {
          std::string cand = p + "_" + std::to_string(k);
          if (!taken.count(cand)) {
            renames[p] = cand;
            taken.insert(cand);
            break;
          }
        }
      }
    }
    std::vector<std::pair<std::string, Expr>> bindings;
    std::vector<std::string> ps;
    std::vector<std::string> shown;
    for (const auto& p : params) {
      auto it = renames.find(p);
      if (it == renames.end()) {
        ps.push_back(p);
        continue;
      }
      ps.push_back(it->second);
      bindings.emplace_back(p, Expr::var(it->second));
      shown.push_back(p + " to " + it->second);
    }
    Expr body = substitute_all(lam.lambda_body(), bindings);
    Expr nl = Expr::lambda(ps, lam.lambda_has_default(), lam.lambda_defaults(), body, lam.span());
    Expr out = in_call ? replace_at(target_, {0}, nl) : nl;
    std::string label = "alpha-fresh (";
    for (std::size_t i = 0; i < shown.size(); ++i) label += (i ? ", " : "") + shown[i];
    return {out, label + ")", std::nullopt};
  }

  const Trace& t_;
  const RuleApplication& app_;
  Expr target_;
  Position pos_;
  SafetyEnv env_;
  TypeEnv types_;
};

}  // namespace

Step compute_step(const Trace& t, const RuleApplication& app) {
  const RuleInfo* info = find_rule(app.rule);
  if (!info) throw UnknownRule("unknown rule " + app.rule);
  for (const auto& p : info->params)
    if (p.required && !app.params.count(p.name)) throw RuleNotApplicable(app.rule, "missing parameter " + p.name);
  for (const auto& [k, v] : app.params) {
    bool known = std::any_of(info->params.begin(), info->params.end(), [&](const RuleParam& p) { return p.name == k; });
    if (!known) throw RuleNotApplicable(app.rule, "unknown parameter " + k);
  }
  const Expr& before = t.current();
  if (!path_valid(before, app.target)) throw InvalidPath("no sub-expression at " + path_text(app.target));

  Result r = Applier(t, app).run();
  Expr after = replace_at(before, app.target, r.replacement);

  if (auto tb = type_or_none(before, t.types())) {
    auto ta = type_or_none(after, t.types());
    if (!ta || !subtype(*ta, *tb)) throw RuleNotApplicable(app.rule, "result does not keep the type " + tb->str());
  }
  return Step{app, before, after, r.label, r.removed};
}

std::shared_ptr<const Program> program_after(const Trace& t, const Step& s) {
  if (!s.removed) return nullptr;
  return snm::without_definition(t.program(), *s.removed);
}

Trace apply_rule(const Trace& t, const RuleApplication& app) {
  Step s = compute_step(t, app);
  auto prog = program_after(t, s);
  return t.appended(std::move(s), prog);
}

std::vector<RuleApplication> applicable_rules(const Trace& t, const Path& at) {
  if (!path_valid(t.current(), at)) throw InvalidPath("no sub-expression at " + path_text(at));
  std::vector<RuleApplication> out;
  for (const auto& info : rule_catalog()) {
    bool needs_param = std::any_of(info.params.begin(), info.params.end(), [](const RuleParam& p) { return p.required; });
    if (needs_param) continue;
    RuleApplication app{info.id, at, {}};
    try {
      compute_step(t, app);
      out.push_back(app);
    } catch (const RuleNotApplicable&) {
    }
  }
  return out;
}

}  // namespace stepwise
