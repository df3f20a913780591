// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "stepwise/verify.hpp"

#include <functional>

#include "stepwise/serialize.hpp"

namespace stepwise {

VerificationError::VerificationError(std::string c, const std::string& msg)
    : std::runtime_error(c + ": " + msg), code(std::move(c)) {}

NotDischarged::NotDischarged(Expr f, Expr t, std::string d)
    : std::runtime_error("not discharged: " + d), final(std::move(f)), target(std::move(t)), diff(std::move(d)) {}

const char* status_name(Obligation::Status s) {
  switch (s) {
    case Obligation::Status::Open: return "open";
    case Obligation::Status::Discharged: return "discharged";
    case Obligation::Status::Failed: return "failed";
  }
  return "?";
}

namespace {

bool calls(const Expr& e, const std::string& name) {
  for (const auto& [p, s] : subterms(e))
    if (s.is(ExprKind::Call) && s.callee_name() == name) return true;
  return false;
}

bool block_calls(const Block& b, const std::string& name) {
  for (const auto& s : b)
    if (calls(s.value, name) || block_calls(s.then_block, name) || block_calls(s.else_block, name)) return true;
  return false;
}

std::vector<std::pair<std::string, Expr>> bind_params(const FunctionSpec& s, const std::vector<Expr>& args) {
  std::vector<std::pair<std::string, Expr>> out;
  for (std::size_t i = 0; i < s.params.size() && i < args.size(); ++i) out.emplace_back(s.params[i].name, args[i]);
  return out;
}

void check_spec_types(const Program& p, const FunctionSpec& s, const TrustRegistry& reg) {
  TypeEnv env = global_types(p);
  std::set<std::string> allowed;
  for (const auto& prm : s.params) {
    env = env.with(prm.name, prm.type);
    allowed.insert(prm.name);
  }
  auto check = [&](const Expr& e, const char* what, const std::function<bool(const Type&)>& ok) {
    for (const auto& n : free_vars(e)) {
      bool trusted_call = reg.trusted(n) || is_primitive_function(n);
      if (!allowed.count(n) && !trusted_call)
        throw VerificationError("SpecTypeError", std::string(what) + " mentions " + n + ", which is not a parameter");
    }
    Type t;
    try {
      t = infer_type(e, env);
    } catch (const std::exception& ex) {
      throw VerificationError("SpecTypeError", std::string(what) + ": " + ex.what());
    }
    if (!ok(t)) throw VerificationError("SpecTypeError", std::string(what) + " has type " + t.str());
  };
  check(s.pre, "precondition", [](const Type& t) { return t.is(Type::Kind::Bool); });
  check(s.post, "postcondition", [&](const Type& t) { return subtype(t, s.result); });
  if (s.progress) check(*s.progress, "progress", [](const Type& t) { return t.is(Type::Kind::Int); });
}

}  // namespace

bool is_recursive(const FuncDef& f) { return block_calls(f.body, f.name); }

FunctionSpec spec_of(const FuncDef& f) { return spec_from_stub(f); }

std::vector<std::string> symbolic_names(const Program& p, std::size_t n) {
  static const char* pool[] = {"x", "y", "z", "w", "u", "v", "p", "q", "r", "s", "t"};
  std::vector<std::string> out;
  auto taken = [&](const std::string& s) { return p.defines(s) || prelude().defines(s); };
  for (const char* c : pool) {
    if (out.size() == n) return out;
    if (!taken(c)) out.push_back(c);
  }
  for (int k = 1; out.size() < n; ++k) {
    std::string s = "x" + std::to_string(k);
    if (!taken(s)) out.push_back(s);
  }
  return out;
}

Verification begin_verification(const Program& p, const FunctionSpec& spec, const TrustRegistry& registry,
                                TraceConfig config) {
  const FuncDef* f = p.find_func(spec.name);
  if (!f) throw VerificationError("UnknownFunction", "no function " + spec.name);
  if (f->stub || registry.trusted(spec.name))
    throw VerificationError("AlreadyTrusted", spec.name + " is already trusted");
  for (const auto& v : check_grammar(p)) throw VerificationError("InvalidProgram", v.message);
  if (auto tc = type_check(p); !tc.ok()) {
    const auto& v = tc.violations.front();
    throw VerificationError(v.code == "SpecTypeError" ? "SpecTypeError" : "InvalidProgram", v.message);
  }
  check_spec_types(p, spec, registry);
  if (is_recursive(*f) && (!spec.progress || !spec.pmin))
    throw VerificationError("MissingProgress", spec.name + " is recursive but declares no progress and pmin");

  Obligation ob;
  ob.spec = spec;
  for (const auto& n : symbolic_names(p, spec.params.size())) ob.args.push_back(Expr::var(n));
  auto b = bind_params(spec, ob.args);
  Expr pre = substitute_all(spec.pre, b);
  ob.initial = Expr::cond(Expr::call(spec.name, ob.args), pre, Expr::error());
  ob.target = Expr::cond(substitute_all(spec.post, b), pre, Expr::error());

  auto prog = std::make_shared<const Program>(p);
  Trace t(prog, registry, ob.initial, Mode::Verification, config);
  t = t.with_verification(VerificationContext{spec, f->span, ob.args}, {pre});
  return {ob, t};
}

Verification begin_verification(const Program& p, const std::string& function, TraceConfig config) {
  const FuncDef* f = p.find_func(function);
  if (!f) throw VerificationError("UnknownFunction", "no function " + function);
  if (!f->spec.post) throw VerificationError("SpecTypeError", function + " has no '# post:' comment");
  return begin_verification(p, spec_of(*f), TrustRegistry::initial(p), config);
}

std::vector<Expr> check_progress(const FunctionSpec& spec, const std::vector<Expr>& entry_args,
                                 const std::vector<Expr>& call_args) {
  if (!spec.progress || !spec.pmin) return {};
  Expr cur = substitute_all(*spec.progress, bind_params(spec, entry_args));
  Expr next = substitute_all(*spec.progress, bind_params(spec, call_args));
  return {Expr::binary(BinaryOp::Gt, cur, Expr::int_lit(*spec.pmin)), Expr::binary(BinaryOp::Gt, cur, next)};
}

std::string expr_diff(const Expr& a, const Expr& b) {
  if (alpha_equal(a, b)) return "";
  // Descend while the shapes agree and exactly one child differs.
  Path p;
  const Expr* x = &a;
  const Expr* y = &b;
  while (x->kind() == y->kind() && x->size() == y->size() && x->size() > 0) {
    std::optional<std::size_t> diff;
    bool many = false;
    for (std::size_t i = 0; i < x->size(); ++i) {
      if (alpha_equal(x->child(i), y->child(i))) continue;
      if (diff) many = true;
      diff = i;
    }
    if (!diff || many) break;
    Expr probe_x = x->with_children(y->children());
    if (!alpha_equal(probe_x, *y)) break;
    p.push_back(*diff);
    x = &x->child(*diff);
    y = &y->child(*diff);
  }
  return "at " + path_text(p) + ": " + print_expr(*x) + " vs " + print_expr(*y);
}

TrustRegistry finish_verification(const Obligation& ob, const Trace& t) {
  if (!alpha_equal(t.current(), ob.target)) throw NotDischarged(t.current(), ob.target, expr_diff(t.current(), ob.target));
  const TrustEntry* existing = t.registry().find(ob.spec.name);
  if (existing && !(existing->provenance == Provenance::Verified && existing->spec == ob.spec))
    throw VerificationError("AlreadyTrusted", ob.spec.name + " was trusted meanwhile");
  return t.registry().with(TrustEntry{ob.spec, Provenance::Verified});
}

namespace {

void flatten_and(const Expr& e, std::vector<Expr>& out) {
  if (e.is(ExprKind::BinOp) && e.binary_op() == BinaryOp::And) {
    flatten_and(e.child(0), out);
    flatten_and(e.child(1), out);
  } else {
    out.push_back(e);
  }
}

std::vector<ConjunctReport> conjuncts_of(const Trace& t) {
  std::vector<ConjunctReport> out;
  for (std::size_t i = 0; i < t.steps().size(); ++i) {
    const Step& s = t.steps()[i];
    if (s.app.rule != "name-to-spec-simpler") continue;
    const Expr& c = expr_at(s.after, s.app.target);
    Position pos = position_at(s.after, s.app.target, t.root_guards());
    std::vector<Expr> parts;
    flatten_and(c.child(1), parts);
    for (const auto& part : parts) out.push_back({part, entails(pos.guards, part, t.types()).verdict, i});
  }
  return out;
}

}  // namespace

VerifyReport verify_function(const Program& p, const std::string& function,
                             const std::optional<std::vector<ScriptStep>>& script, Strategy strategy,
                             std::size_t step_limit, TraceConfig config) {
  Verification v = begin_verification(p, function, config);
  VerifyReport r{v.obligation, v.trace, std::nullopt, "", "", {}, std::nullopt};
  if (script) {
    ReplayResult rr = replay_script(v.trace, *script);
    r.trace = rr.trace;
    r.failed_step = rr.failed_step;
    r.error = rr.error;
  } else {
    try {
      RunResult run = run_to_value(v.trace, strategy, step_limit);
      r.trace = run.trace;
      if (run.outcome == Outcome::Stuck || run.outcome == Outcome::StuckSymbolic) r.error = run.reason;
    } catch (const StepLimitExceeded& e) {
      r.trace = *e.partial;
      r.error = e.what();
    }
  }
  r.conjuncts = conjuncts_of(r.trace);
  try {
    r.registry = finish_verification(r.obligation, r.trace);
    r.obligation.status = Obligation::Status::Discharged;
  } catch (const NotDischarged& e) {
    r.obligation.status = Obligation::Status::Failed;
    r.diff = e.diff;
  }
  return r;
}

nlohmann::json report_to_json(const VerifyReport& r) {
  nlohmann::json j;
  j["function"] = r.obligation.spec.name;
  j["status"] = status_name(r.obligation.status);
  j["initial"] = print_expr(r.obligation.initial);
  j["target"] = print_expr(r.obligation.target);
  j["final"] = print_expr(r.trace.current());
  j["trace"] = trace_to_json(r.trace);
  if (r.failed_step) j["failed_step"] = *r.failed_step;
  if (!r.error.empty()) j["error"] = r.error;
  if (!r.diff.empty()) j["diff"] = r.diff;
  j["conjuncts"] = nlohmann::json::array();
  for (const auto& c : r.conjuncts)
    j["conjuncts"].push_back({{"conjunct", print_expr(c.conjunct)}, {"verdict", verdict_name(c.verdict)}, {"step", c.step}});
  return j;
}

}  // namespace stepwise
