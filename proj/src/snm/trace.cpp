// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "snm/internal.hpp"
#include "stepwise/serialize.hpp"

namespace stepwise {

const std::vector<RuleInfo>& rule_catalog() {
  static const std::vector<RuleInfo> catalog = {
      {"arithmetic", "evaluation", "Evaluate ground numeric operations and comparisons, or rewrite to an equal form.",
       {{"to", false, "result form proved equal to the target"}}},
      {"string-arithmetic", "evaluation", "Evaluate ground string concatenation, slicing and comparison.", {}},
      {"boolean-arithmetic", "evaluation", "Evaluate ground boolean operations and simplify and/or with a literal.",
       {}},
      {"name-to-def", "definitions", "Replace a variable by its definition.",
       {{"vars", false, "comma-separated names replaced everywhere in the target"},
        {"remove", false, "delete the definition of vars once unused"}}},
      {"name-to-body", "definitions", "Replace a call of an untrusted function by its body.", {}},
      {"name-to-spec", "definitions", "Replace a call of a trusted function by its specification.", {}},
      {"name-to-spec-simpler", "definitions",
       "Inside a verification, replace a self-call by the specification guarded by progress.", {}},
      {"if-true", "conditionals", "Select the first branch of a conditional whose test is True.", {}},
      {"if-false", "conditionals", "Select the second branch of a conditional whose test is False.", {}},
      {"if-irrelevant", "conditionals", "Drop a conditional whose branches are identical.", {}},
      {"consider-tests", "conditionals", "Simplify using the tests in force at the target.", {}},
      {"cases-split", "conditionals", "Wrap the target in a conditional on a chosen test.",
       {{"guard", true, "boolean test"}}},
      {"func-to-lambda", "functions", "Replace a function name by its lambda form.", {}},
      {"beta-param", "functions", "Substitute the argument of one lambda parameter.",
       {{"param", false, "parameter name; the first one by default"}}},
      {"func-to-body", "functions", "Remove a lambda application with no parameters.", {}},
      {"alpha-fresh", "functions", "Rename lambda parameters to fresh subscripted names.",
       {{"names", false, "renaming as old=new pairs, comma-separated"}}},
  };
  return catalog;
}

const RuleInfo* find_rule(const std::string& id) {
  for (const auto& r : rule_catalog())
    if (r.id == id) return &r;
  return nullptr;
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Concrete: return "concrete";
    case Mode::Symbolic: return "symbolic";
    case Mode::Verification: return "verification";
  }
  return "?";
}

RuleNotApplicable::RuleNotApplicable(std::string r, std::string why)
    : std::runtime_error(r + ": " + why), rule(std::move(r)), reason(std::move(why)) {}

Stuck::Stuck(std::string why, Expr res, bool sym)
    : std::runtime_error("stuck: " + why), reason(std::move(why)), residual(std::move(res)), symbolic(sym) {}

StepLimitExceeded::StepLimitExceeded(Trace t, std::size_t n)
    : std::runtime_error("step limit " + std::to_string(n) + " exceeded"),
      partial(std::make_shared<const Trace>(std::move(t))),
      limit(n) {}

Trace::Trace(std::shared_ptr<const Program> program, TrustRegistry registry, Expr initial, Mode mode,
             TraceConfig config)
    : program_(std::move(program)),
      initial_program_(program_),
      registry_(std::move(registry)),
      initial_(std::move(initial)),
      mode_(mode),
      config_(config),
      types_(global_types(*program_)) {}

Trace Trace::of_goal(const Program& p, TraceConfig config) {
  auto prog = std::make_shared<const Program>(p);
  return Trace(prog, TrustRegistry::initial(p), p.goal, Mode::Concrete, config);
}

Trace Trace::with_symbolic(const std::string& name, Type t) const {
  Trace out = *this;
  out.symbolic_.insert(name);
  out.types_ = out.types_.with(name, std::move(t));
  if (out.mode_ == Mode::Concrete) out.mode_ = Mode::Symbolic;
  return out;
}

Trace Trace::with_verification(VerificationContext v, std::vector<Expr> root_guards) const {
  Trace out = *this;
  for (std::size_t i = 0; i < v.args.size() && i < v.spec.params.size(); ++i) {
    if (!v.args[i].is(ExprKind::Var)) continue;
    out.symbolic_.insert(v.args[i].text());
    out.types_ = out.types_.with(v.args[i].text(), v.spec.params[i].type);
  }
  out.verification_ = std::move(v);
  out.root_guards_ = std::move(root_guards);
  out.mode_ = Mode::Verification;
  return out;
}

Trace Trace::with_config(TraceConfig c) const {
  Trace out = *this;
  out.config_ = c;
  return out;
}

Trace Trace::appended(Step s, std::shared_ptr<const Program> program) const {
  Trace out = *this;
  out.push(std::move(s), std::move(program));
  return out;
}

void Trace::push(Step s, std::shared_ptr<const Program> program) {
  if (program) program_ = std::move(program);
  steps_.push_back(std::move(s));
}

Trace Trace::truncated(std::size_t n) const {
  if (n >= steps_.size()) return *this;
  Trace out = *this;
  out.steps_.resize(n);
  out.program_ = initial_program_;
  for (const auto& s : out.steps_)
    if (s.removed) out.program_ = snm::without_definition(*out.program_, *s.removed);
  return out;
}

Trace Trace::restarted(Expr e) const {
  Trace out = *this;
  out.steps_.clear();
  out.initial_ = std::move(e);
  out.initial_program_ = program_;
  return out;
}

SafetyEnv Trace::safety_env() const { return SafetyEnv(program_, registry_, types_, symbolic_); }

bool is_terminal(const Expr& e) { return e.is_value(); }

// ---- rendering ----

namespace snm {

std::shared_ptr<const Program> without_definition(const Program& p, const std::string& name) {
  auto out = std::make_shared<Program>(p);
  std::erase_if(out->defs, [&](const Definition& d) {
    if (auto v = std::get_if<VarDef>(&d)) return v->name == name;
    return false;
  });
  return out;
}

}  // namespace snm

std::string render_trace(const Trace& t, std::size_t width) {
  std::string out;
  auto rows = [&](const Expr& e) {
    for (const auto& line : layout_expr(e, width)) out += line + "\n";
  };
  rows(t.initial());
  for (const auto& s : t.steps()) {
    std::string arrow = "--";
    arrow.resize(width + 2, ' ');
    out += arrow + s.label + "\n";
    rows(s.after);
  }
  return out;
}

// ---- structured form ----

nlohmann::json rule_application_to_json(const RuleApplication& a) {
  nlohmann::json j;
  j["rule"] = a.rule;
  j["target"] = a.target;
  j["params"] = a.params;
  return j;
}

RuleApplication rule_application_from_json(const nlohmann::json& j) {
  RuleApplication a;
  a.rule = j.at("rule").get<std::string>();
  if (j.contains("target")) a.target = j.at("target").get<Path>();
  if (j.contains("params")) a.params = j.at("params").get<std::map<std::string, std::string>>();
  return a;
}

nlohmann::json step_to_json(const Step& s) {
  nlohmann::json j = rule_application_to_json(s.app);
  j["label"] = s.label;
  j["before"] = expr_to_json(s.before);
  j["after"] = expr_to_json(s.after);
  j["before_text"] = print_expr(s.before);
  j["after_text"] = print_expr(s.after);
  if (s.removed) j["removed"] = *s.removed;
  return j;
}

nlohmann::json trace_to_json(const Trace& t) {
  nlohmann::json j;
  j["mode"] = mode_name(t.mode());
  j["initial"] = expr_to_json(t.initial());
  j["initial_text"] = print_expr(t.initial());
  j["steps"] = nlohmann::json::array();
  for (const auto& s : t.steps()) j["steps"].push_back(step_to_json(s));
  j["final"] = expr_to_json(t.current());
  j["final_text"] = print_expr(t.current());
  return j;
}

ReplayResult replay_steps(const nlohmann::json& steps, const Trace& start) {
  ReplayResult r{start, std::nullopt, ""};
  if (!steps.is_array()) {
    r.failed_step = 0;
    r.error = "steps must be an array";
    return r;
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    try {
      RuleApplication app = rule_application_from_json(steps[i]);
      Step s = compute_step(r.trace, app);
      if (steps[i].contains("after")) {
        const auto& a = steps[i].at("after");
        Expr claimed = a.is_string() ? parse_expr(a.get<std::string>()) : expr_from_json(a);
        if (!(claimed == s.after))
          throw RuleNotApplicable(app.rule, "recorded result " + print_expr(claimed) + " differs from " +
                                                print_expr(s.after));
      }
      auto prog = program_after(r.trace, s);
      r.trace.push(std::move(s), prog);
    } catch (const std::exception& e) {
      r.failed_step = i;
      r.error = e.what();
      return r;
    }
  }
  return r;
}

}  // namespace stepwise
