// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <sstream>

#include "kernel/internal.hpp"

namespace stepwise {

namespace {

class ExprPayload : public Embedded {
 public:
  explicit ExprPayload(Expr e) : e(std::move(e)) {}
  std::string kind() const override { return "expr"; }
  std::string text() const override { return print_expr(e); }
  bool equals(const Embedded& o) const override {
    auto* p = dynamic_cast<const ExprPayload*>(&o);
    return p && p->e == e;
  }
  Expr e;
};

Expr hole_view(const Context& c) { return replace_at(c.root, c.hole, Expr::var("_")); }

class ContextPayload : public Embedded {
 public:
  explicit ContextPayload(Context c) : c(std::move(c)) {}
  std::string kind() const override { return "ctx"; }
  std::string text() const override { return context_text(c); }
  bool equals(const Embedded& o) const override {
    auto* p = dynamic_cast<const ContextPayload*>(&o);
    return p && p->c.hole == c.hole && hole_view(p->c) == hole_view(c);
  }
  Context c;
};

class SigPayload : public Embedded {
 public:
  explicit SigPayload(std::shared_ptr<const Trace> t) : t(std::move(t)) {}
  std::string kind() const override { return "sig"; }
  std::string text() const override { return "sig"; }
  bool equals(const Embedded& o) const override {
    auto* p = dynamic_cast<const SigPayload*>(&o);
    if (!p) return false;
    if (p->t == t) return true;
    const Trace& a = *t;
    const Trace& b = *p->t;
    auto fn = [](const Trace& x) { return x.verification() ? x.verification()->spec.name : std::string(); };
    return a.program().names() == b.program().names() && a.registry() == b.registry() && a.mode() == b.mode() &&
           a.symbolic() == b.symbolic() && a.config().auto_context == b.config().auto_context && fn(a) == fn(b) &&
           a.root_guards() == b.root_guards();
  }
  std::shared_ptr<const Trace> t;
};

class ParamsPayload : public Embedded {
 public:
  explicit ParamsPayload(std::map<std::string, std::string> p) : p(std::move(p)) {}
  std::string kind() const override { return "params"; }
  std::string text() const override {
    std::string out;
    for (const auto& [k, v] : p) out += (out.empty() ? "" : "; ") + k + "=" + v;
    return out;
  }
  bool equals(const Embedded& o) const override {
    auto* q = dynamic_cast<const ParamsPayload*>(&o);
    return q && q->p == p;
  }
  std::map<std::string, std::string> p;
};

std::shared_ptr<const Trace> empty_sig() {
  static const auto sig = [] {
    auto prog = std::make_shared<const Program>();
    return std::make_shared<const Trace>(prog, TrustRegistry::initial(*prog), Expr::int_lit(0));
  }();
  return sig;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::shared_ptr<const Embedded> embed_expr(Expr e) { return std::make_shared<ExprPayload>(std::move(e)); }
std::shared_ptr<const Embedded> embed_context(Context c) { return std::make_shared<ContextPayload>(std::move(c)); }
std::shared_ptr<const Embedded> embed_sig(std::shared_ptr<const Trace> t) { return std::make_shared<SigPayload>(std::move(t)); }
std::shared_ptr<const Embedded> embed_params(std::map<std::string, std::string> p) {
  return std::make_shared<ParamsPayload>(std::move(p));
}

const Expr* embedded_expr(const Term& t) {
  auto* p = t.is(Term::Kind::Embed) ? dynamic_cast<const ExprPayload*>(t.embed.get()) : nullptr;
  return p ? &p->e : nullptr;
}

const Context* embedded_context(const Term& t) {
  auto* p = t.is(Term::Kind::Embed) ? dynamic_cast<const ContextPayload*>(t.embed.get()) : nullptr;
  return p ? &p->c : nullptr;
}

const Trace* embedded_sig(const Term& t) {
  auto* p = t.is(Term::Kind::Embed) ? dynamic_cast<const SigPayload*>(t.embed.get()) : nullptr;
  return p ? p->t.get() : nullptr;
}

const std::map<std::string, std::string>* embedded_params(const Term& t) {
  auto* p = t.is(Term::Kind::Embed) ? dynamic_cast<const ParamsPayload*>(t.embed.get()) : nullptr;
  return p ? &p->p : nullptr;
}

namespace kern {

bool known_embed(const std::string& kind) {
  return kind == "expr" || kind == "ctx" || kind == "sig" || kind == "params";
}

std::shared_ptr<const Embedded> parse_embed(const std::string& kind, const std::string& text, bool,
                                            const EmbedEnv& env, std::map<std::string, std::string>* pattern_metas,
                                            const std::string& sort) {
  if (kind == "sig") {
    if (trim(text) != "sig") throw LogicError("SortMismatch", 0, "a " + sort + " is written sig");
    return embed_sig(env.sig ? env.sig : empty_sig());
  }
  if (kind == "params") {
    std::map<std::string, std::string> p;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ';')) {
      item = trim(item);
      if (item.empty()) continue;
      auto eq = item.find('=');
      p[trim(item.substr(0, eq))] = eq == std::string::npos ? "true" : trim(item.substr(eq + 1));
    }
    return embed_params(std::move(p));
  }
  Expr e;
  try {
    e = parse_expr(text);
  } catch (const std::exception& ex) {
    throw LogicError("SyntaxError", 0, "cannot parse `" + text + "`: " + ex.what());
  }
  if (kind == "ctx") {
    std::optional<Path> hole;
    for (const auto& [p, sub] : subterms(e)) {
      if (!sub.is(ExprKind::Var) || sub.text() != "_") continue;
      if (hole) throw LogicError("SyntaxError", 0, "context `" + text + "` has more than one hole");
      hole = p;
    }
    if (!hole) throw LogicError("SyntaxError", 0, "context `" + text + "` has no hole _");
    return embed_context({e, *hole});
  }
  if (pattern_metas) {
    for (const auto& [p, sub] : subterms(e)) {
      if (!sub.is(ExprKind::Var) || !std::isupper(static_cast<unsigned char>(sub.text()[0]))) continue;
      auto [it, fresh] = pattern_metas->emplace(sub.text(), sort);
      if (!fresh && it->second != sort)
        throw LogicError("SortMismatch", 0, "metavariable " + sub.text() + " used at sorts " + it->second + " and " + sort);
    }
  }
  return embed_expr(std::move(e));
}

namespace {

bool valid_path(const Expr& e, const Path& p) {
  const Expr* cur = &e;
  for (std::size_t i : p) {
    if (i >= cur->size()) return false;
    cur = &cur->child(i);
  }
  return true;
}

}  // namespace

// Decompose(E, C, P): E is C filled with an instance of P. With C unbound
// the first match in pre-order is taken.
void decompose_action(const Logic& l, const RelationInstance& goal, Subst& s) {
  const Expr* e = embedded_expr(goal.args[0]);
  if (!e) action_failure("Decompose needs a known expression, not " + print_term(l, goal.args[0]));
  const Term& ctx = goal.args[1];
  const Term& pat = goal.args[2];
  const std::string& esort = goal.args[0].sort;
  auto try_at = [&](const Path& p) {
    Subst trial = s;
    const Expr& sub = expr_at(*e, p);
    if (!unify(ctx, Term::embedded(embed_context({*e, p}), ctx.sort), trial)) return false;
    if (const Expr* pattern = embedded_expr(pat)) {
      auto m = match_pattern(*pattern, sub);
      if (!m) return false;
      for (const auto& [name, x] : *m)
        if (!unify(Term::meta(name, esort), Term::embedded(embed_expr(x), esort), trial)) return false;
    } else if (!unify(pat, Term::embedded(embed_expr(sub), esort), trial)) {
      return false;
    }
    s = std::move(trial);
    return true;
  };
  if (const Context* c = embedded_context(ctx)) {
    if (valid_path(*e, c->hole) && try_at(c->hole)) return;
    action_failure(print_term(l, pat) + " does not match " + print_expr(*e) + " at " + context_text(*c));
  }
  for (const auto& [p, sub] : subterms(*e))
    if (try_at(p)) return;
  action_failure("no sub-expression of " + print_expr(*e) + " matches " + print_term(l, pat));
}

// Recompose(C, X, E): E is C with X in its hole.
void recompose_action(const Logic& l, const RelationInstance& goal, Subst& s) {
  const Context* c = embedded_context(goal.args[0]);
  const Expr* x = embedded_expr(goal.args[1]);
  if (!c || !x) action_failure("Recompose needs a known context and filler");
  Expr out = recompose(*c, *x);
  if (!unify(goal.args[2], Term::embedded(embed_expr(out), goal.args[2].sort), s))
    action_failure("recomposed " + print_expr(out) + " differs from " + print_term(l, goal.args[2]));
}

// Reduce(S, R, P, C, X, Y, S2): snm rule R with parameters P rewrites X in
// context C to Y, leaving the state S2.
void reduce_action(const Logic& l, const RelationInstance& goal, Subst& s) {
  const Trace* sig = embedded_sig(goal.args[0]);
  const Term& rule = goal.args[1];
  const Context* c = embedded_context(goal.args[3]);
  const Expr* x = embedded_expr(goal.args[4]);
  if (!sig || !c || !x || !rule.closed()) action_failure("Reduce needs a known state, rule, context and redex");
  std::map<std::string, std::string> params;
  if (const auto* p = embedded_params(goal.args[2])) {
    params = *p;
  } else if (!unify(goal.args[2], Term::embedded(embed_params({}), goal.args[2].sort), s)) {
    action_failure("bad parameters " + print_term(l, goal.args[2]));
  }
  Expr whole = recompose(*c, *x);
  Trace t = sig->restarted(whole);
  Step st;
  try {
    st = compute_step(t, {rule.name, c->hole, params});
  } catch (const RuleNotApplicable& e) {
    action_failure(e.what());
  } catch (const UnknownRule& e) {
    action_failure(e.what());
  }
  Expr out = expr_at(st.after, c->hole);
  if (!(replace_at(whole, c->hole, out) == st.after)) action_failure(rule.name + " rewrote outside its target");
  auto next = std::make_shared<const Trace>(t.appended(st, program_after(t, st)));
  if (!unify(goal.args[5], Term::embedded(embed_expr(out), goal.args[5].sort), s))
    action_failure(rule.name + " gives " + print_expr(out) + ", not " + print_term(l, goal.args[5]));
  if (!unify(goal.args[6], Term::embedded(embed_sig(next), goal.args[6].sort), s))
    action_failure(rule.name + " leaves a different program state");
}

}  // namespace kern

const Logic& snm_bridge_logic() {
  static const Logic l = [] {
    std::string doc =
        "logic snm-bridge\n"
        "sort Sig = embed:sig\n"
        "sort Expr = embed:expr\n"
        "sort Ctx = embed:ctx\n"
        "sort Params = embed:params\n"
        "sort Rule = ident\n"
        "relation Step(Sig, Expr, Expr) action=inference\n"
        "relation Decompose(Expr, Ctx, Expr) action=builtin:decompose\n"
        "relation Recompose(Ctx, Expr, Expr) action=builtin:recompose\n"
        "relation Reduce(Sig, Rule, Params, Ctx, Expr, Expr, Sig) action=builtin:reduce\n"
        "rule done (auto): / Step(S, E, E)\n"
        "rule if-true-ctx: Decompose(E, C, `E1 if True else E2`), Recompose(C, E1, Eout), Step(S, Eout, T)"
        " / Step(S, E, T)\n"
        "rule if-false-ctx: Decompose(E, C, `E1 if False else E2`), Recompose(C, E2, Eout), Step(S, Eout, T)"
        " / Step(S, E, T)\n";
    for (const auto& r : rule_catalog())
      doc += "rule " + r.id + ": Decompose(E, C, X), Reduce(S, " + r.id +
             ", P, C, X, Y, S2), Recompose(C, Y, Eout), Step(S2, Eout, T) / Step(S, E, T)\n";
    return parse_logic(doc);
  }();
  return l;
}

namespace {

const char* bridge_rule(const std::string& snm_rule) {
  if (snm_rule == "if-true") return "if-true-ctx";
  if (snm_rule == "if-false") return "if-false-ctx";
  return nullptr;
}

std::string snm_rule(const std::string& bridge) {
  if (bridge == "if-true-ctx") return "if-true";
  if (bridge == "if-false-ctx") return "if-false";
  return bridge;
}

}  // namespace

BridgeProof trace_to_proof(const Trace& t) {
  auto start = std::make_shared<const Trace>(t.truncated(0));
  BridgeProof out;
  out.goal = {"Step",
              {Term::embedded(embed_sig(start), "Sig"), Term::embedded(embed_expr(t.initial()), "Expr"),
               Term::embedded(embed_expr(t.current()), "Expr")}};
  for (const auto& st : t.steps()) {
    ProofNode n;
    const char* schematic = bridge_rule(st.app.rule);
    n.rule = schematic ? schematic : st.app.rule;
    n.bindings["C"] = Term::embedded(embed_context({st.before, st.app.target}), "Ctx");
    n.bindings["Eout"] = Term::embedded(embed_expr(st.after), "Expr");
    if (!schematic) n.bindings["P"] = Term::embedded(embed_params(st.app.params), "Params");
    out.script.push_back(std::move(n));
  }
  return out;
}

Trace proof_to_trace(const RelationInstance& goal, const std::vector<ProofNode>& script) {
  const Logic& l = snm_bridge_logic();
  CheckReport r = check_proof(l, goal, script);
  if (r.failed_step) {
    const StepReport& f = r.steps[*r.failed_step];
    throw ProofError(f.code, "step " + std::to_string(*r.failed_step) + ": " + f.message);
  }
  if (!r.valid) throw ProofError("OpenGoals", "the proof leaves " + std::to_string(r.final.goals.size()) + " open goals");
  const Trace* sig = embedded_sig(goal.args[0]);
  const Expr* e = embedded_expr(goal.args[1]);
  if (!sig || !e || goal.relation != "Step") throw ProofError("IllFormedGoal", "not a Step goal");
  Trace t = sig->restarted(*e);
  for (const auto& sr : r.steps) {
    if (sr.node.rule.empty() || sr.node.rule[0] == '!') continue;
    auto c = sr.resolved.find("C");
    const Context* ctx = c == sr.resolved.end() ? nullptr : embedded_context(c->second);
    if (!ctx) throw ProofError("IllFormedGoal", "step " + sr.node.rule + " has no context");
    std::map<std::string, std::string> params;
    if (auto p = sr.resolved.find("P"); p != sr.resolved.end())
      if (const auto* pp = embedded_params(p->second)) params = *pp;
    Step st = compute_step(t, {snm_rule(sr.node.rule), ctx->hole, params});
    auto prog = program_after(t, st);
    t.push(std::move(st), prog);
  }
  return t;
}

}  // namespace stepwise
