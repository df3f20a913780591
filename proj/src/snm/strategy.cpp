// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "snm/internal.hpp"

namespace stepwise {

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::LtrApplicative: return "ltr";
    case Strategy::RtlApplicative: return "rtl";
    case Strategy::NormalOrder: return "normal";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(const std::string& s) {
  if (s == "ltr" || s == "ltr-applicative") return Strategy::LtrApplicative;
  if (s == "rtl" || s == "rtl-applicative") return Strategy::RtlApplicative;
  if (s == "normal" || s == "normal-order") return Strategy::NormalOrder;
  return std::nullopt;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Value: return "value";
    case Outcome::Error: return "error";
    case Outcome::Stuck: return "stuck";
    case Outcome::StuckSymbolic: return "stuck-symbolic";
    case Outcome::StepLimit: return "step-limit";
  }
  return "?";
}

namespace {

using snm::Family;

const char* family_rule(Family f) {
  switch (f) {
    case Family::String: return "string-arithmetic";
    case Family::Boolean: return "boolean-arithmetic";
    default: return "arithmetic";
  }
}

class Chooser {
 public:
  Chooser(const Trace& t, Strategy s) : t_(t), s_(s) {}

  std::optional<RuleApplication> choose() {
    Path p;
    return step(t_.current(), p);
  }

  const std::string& reason() const { return reason_; }
  bool symbolic() const { return symbolic_; }

 private:
  RuleApplication app(const char* rule, const Path& p) const { return {rule, p, {}}; }

  std::optional<RuleApplication> stuck(const std::string& why, bool symbolic = false) {
    if (reason_.empty()) {
      reason_ = why;
      symbolic_ = symbolic;
    }
    return std::nullopt;
  }

  bool is_symbolic_var(const Expr& e) const {
    if (!e.is(ExprKind::Var)) return false;
    return t_.symbolic().count(e.text()) || !t_.program().find_var(e.text());
  }

  // Nothing left for the strategy to do inside e.
  bool done(const Expr& e) const { return e.is_value() || is_symbolic_var(e); }

  bool accepts(const RuleApplication& a) const {
    try {
      compute_step(t_, a);
      return true;
    } catch (const RuleNotApplicable&) {
      return false;
    }
  }

  std::vector<std::size_t> ordered(std::vector<std::size_t> idx) const {
    if (s_ == Strategy::RtlApplicative) std::reverse(idx.begin(), idx.end());
    return idx;
  }

  std::optional<RuleApplication> descend(const Expr& e, Path& p, std::size_t i) {
    p.push_back(i);
    auto r = step(e.child(i), p);
    p.pop_back();
    return r;
  }

  std::optional<RuleApplication> step(const Expr& e, Path& p) {
    if (e.is_value()) return std::nullopt;
    if (snm::error_ready(e)) return app("arithmetic", p);
    switch (e.kind()) {
      case ExprKind::Var:
        if (is_symbolic_var(e)) return stuck("no definition for " + e.text(), true);
        return app("name-to-def", p);
      case ExprKind::Cond: {
        const Expr& g = e.child(1);
        if (g.is(ExprKind::BoolLit)) return app(g.bool_value() ? "if-true" : "if-false", p);
        if (done(g)) return stuck("test " + print_expr(g) + " is symbolic", true);
        return descend(e, p, 1);
      }
      case ExprKind::Lambda:
        return stuck("a function is not a value of the subset");
      case ExprKind::BinOp:
        if (e.binary_op() == BinaryOp::And || e.binary_op() == BinaryOp::Or) {
          const Expr& l = e.child(0);
          if (l.is(ExprKind::BoolLit)) return app("boolean-arithmetic", p);
          if (done(l)) return stuck("operand " + print_expr(l) + " is symbolic", true);
          return descend(e, p, 0);
        }
        return operator_step(e, p);
      case ExprKind::Unary:
      case ExprKind::Slice:
        return operator_step(e, p);
      case ExprKind::Call:
        if (e.callee().is(ExprKind::Lambda)) return lambda_call(e, p);
        if (snm::is_operator(e)) return operator_step(e, p);
        return named_call(e, p);
      default:
        return std::nullopt;
    }
  }

  std::optional<RuleApplication> operator_step(const Expr& e, Path& p) {
    Family f = snm::family(e, t_.types());
    if (snm::evaluate(e, f)) return app(family_rule(f), p);
    std::vector<std::size_t> kids(e.size());
    for (std::size_t i = 0; i < kids.size(); ++i) kids[i] = i;
    std::optional<std::size_t> deferred;
    for (std::size_t i : ordered(kids)) {
      const Expr& c = e.child(i);
      if (done(c)) continue;
      // Operators of the same family are evaluated together with e.
      if (snm::is_operator(c) && snm::family(c, t_.types()) == f && snm::evaluate(c, f)) {
        if (!deferred) deferred = i;
        continue;
      }
      return descend(e, p, i);
    }
    // e cannot be evaluated even with its children done, e.g. next to ERROR.
    if (deferred) return descend(e, p, *deferred);
    bool sym = std::any_of(e.children().begin(), e.children().end(), [&](const Expr& c) { return is_symbolic_var(c); });
    return stuck("no rule evaluates " + print_expr(e), sym || !free_vars(e).empty());
  }

  std::optional<RuleApplication> lambda_call(const Expr& e, Path& p) {
    const Expr& lam = e.callee();
    RuleApplication fire = lam.lambda_params().empty() ? app("func-to-body", p) : app("beta-param", p);
    if (s_ == Strategy::NormalOrder && accepts(fire)) return fire;
    // Defaults first, then arguments.
    std::vector<Path> order;
    for (std::size_t i = 0; i + 1 < lam.size(); ++i) order.push_back({0, i});
    for (std::size_t i = 1; i < e.size(); ++i) order.push_back({i});
    if (s_ == Strategy::RtlApplicative) std::reverse(order.begin(), order.end());
    for (const auto& rel : order) {
      const Expr& c = expr_at(e, rel);
      if (done(c)) continue;
      std::size_t depth = p.size();
      p.insert(p.end(), rel.begin(), rel.end());
      auto r = step(c, p);
      p.resize(depth);
      return r;
    }
    return fire;
  }

  std::optional<RuleApplication> named_call(const Expr& e, Path& p) {
    std::string name = e.callee_name();
    const char* rule = nullptr;
    if (t_.registry().trusted(name)) rule = "name-to-spec";
    else if (const FuncDef* f = t_.program().find_func(name); f && !f->stub) rule = "name-to-body";
    if (s_ == Strategy::NormalOrder && rule && accepts(app(rule, p))) return app(rule, p);
    std::vector<std::size_t> args;
    for (std::size_t i = 1; i < e.size(); ++i) args.push_back(i);
    for (std::size_t i : ordered(args)) {
      if (done(e.child(i))) continue;
      return descend(e, p, i);
    }
    if (!rule) return stuck(name.empty() ? "callee is not a function name" : name + " has no body and is not trusted");
    return app(rule, p);
  }

  const Trace& t_;
  Strategy s_;
  std::string reason_;
  bool symbolic_ = false;
};

bool mentions_symbolic(const Trace& t, const Expr& e) {
  for (const auto& n : free_vars(e))
    if (t.symbolic().count(n) || !t.program().defines(n)) return true;
  return false;
}

}  // namespace

std::optional<RuleApplication> next_step(const Trace& t, Strategy s) {
  if (is_terminal(t.current())) return std::nullopt;
  Chooser c(t, s);
  auto r = c.choose();
  if (!r) {
    bool sym = c.symbolic() || mentions_symbolic(t, t.current());
    throw Stuck(c.reason().empty() ? "no rule applies" : c.reason(), t.current(), sym);
  }
  return r;
}

Trace auto_step(const Trace& t, Strategy s) {
  auto app = next_step(t, s);
  if (!app) throw Stuck("already a value", t.current(), false);
  try {
    return apply_rule(t, *app);
  } catch (const RuleNotApplicable& e) {
    throw Stuck(e.what(), t.current(), false);
  }
}

RunResult run_to_value(const Trace& start, Strategy s, std::size_t step_limit) {
  if (step_limit == 0) throw std::invalid_argument("step limit must be positive");
  RunResult r{start, Outcome::Value, ""};
  for (std::size_t n = 0;; ++n) {
    const Expr& cur = r.trace.current();
    if (is_terminal(cur)) {
      r.outcome = cur.is(ExprKind::Error) ? Outcome::Error : Outcome::Value;
      return r;
    }
    if (n >= step_limit) throw StepLimitExceeded(std::move(r.trace), step_limit);
    try {
      auto app = next_step(r.trace, s);
      Step st = compute_step(r.trace, *app);
      auto prog = program_after(r.trace, st);
      r.trace.push(std::move(st), prog);
    } catch (const Stuck& e) {
      r.outcome = e.symbolic ? Outcome::StuckSymbolic : Outcome::Stuck;
      r.reason = e.reason;
      return r;
    } catch (const RuleNotApplicable& e) {
      r.outcome = Outcome::Stuck;
      r.reason = e.what();
      return r;
    }
  }
}

}  // namespace stepwise
