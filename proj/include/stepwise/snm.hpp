// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stepwise/analysis.hpp"
#include "stepwise/program.hpp"

namespace stepwise {

// ---- rule catalog ----

struct RuleParam {
  std::string name;
  bool required = false;
  std::string description;
};

struct RuleInfo {
  std::string id;
  std::string family;  // evaluation, definitions, conditionals, functions, verification
  std::string summary;
  std::vector<RuleParam> params;
};

const std::vector<RuleInfo>& rule_catalog();
const RuleInfo* find_rule(const std::string& id);

// ---- traces ----

struct RuleApplication {
  std::string rule;
  Path target;
  std::map<std::string, std::string> params;

  friend bool operator==(const RuleApplication&, const RuleApplication&) = default;
};

struct Step {
  RuleApplication app;
  Expr before;
  Expr after;
  std::string label;  // right-column text
  std::optional<std::string> removed;  // definition dropped by name-to-def removal
};

enum class Mode { Concrete, Symbolic, Verification };
const char* mode_name(Mode m);

// The function whose contract a verification trace is establishing.
struct VerificationContext {
  FunctionSpec spec;
  Span body_span;  // span of f's definition; self-calls must lie inside it
  std::vector<Expr> args;  // the fresh symbolic parameters
};

struct TraceConfig {
  bool auto_context = false;
};

class Trace {
 public:
  Trace(std::shared_ptr<const Program> program, TrustRegistry registry, Expr initial,
        Mode mode = Mode::Concrete, TraceConfig config = {});

  // Concrete trace of p's goal.
  static Trace of_goal(const Program& p, TraceConfig config = {});

  const Program& program() const { return *program_; }
  std::shared_ptr<const Program> program_ptr() const { return program_; }
  const TrustRegistry& registry() const { return registry_; }
  const Expr& initial() const { return initial_; }
  const Expr& current() const { return steps_.empty() ? initial_ : steps_.back().after; }
  const std::vector<Step>& steps() const { return steps_; }
  Mode mode() const { return mode_; }
  const TraceConfig& config() const { return config_; }
  const std::optional<VerificationContext>& verification() const { return verification_; }
  const std::vector<Expr>& root_guards() const { return root_guards_; }
  // Names that stand for unknown values: never substituted by strategies,
  // assumed safe, typed through types().
  const std::set<std::string>& symbolic() const { return symbolic_; }
  const TypeEnv& types() const { return types_; }

  Trace with_symbolic(const std::string& name, Type t) const;
  Trace with_verification(VerificationContext v, std::vector<Expr> root_guards) const;
  Trace with_config(TraceConfig c) const;
  Trace appended(Step s, std::shared_ptr<const Program> program = nullptr) const;
  // In-place append for loops that own the trace.
  void push(Step s, std::shared_ptr<const Program> program = nullptr);
  // Prefix with the first n steps.
  Trace truncated(std::size_t n) const;
  // Same state with no steps, starting from e.
  Trace restarted(Expr e) const;

  SafetyEnv safety_env() const;
  Position position(const Path& p) const { return position_at(current(), p, root_guards_); }

 private:
  std::shared_ptr<const Program> program_;
  std::shared_ptr<const Program> initial_program_;
  TrustRegistry registry_;
  Expr initial_;
  std::vector<Step> steps_;
  Mode mode_;
  TraceConfig config_;
  std::optional<VerificationContext> verification_;
  std::vector<Expr> root_guards_;
  std::set<std::string> symbolic_;
  TypeEnv types_;
};

class RuleNotApplicable : public std::runtime_error {
 public:
  RuleNotApplicable(std::string rule, std::string reason);
  std::string rule, reason;
};

class UnknownRule : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- rule application ----

Trace apply_rule(const Trace& t, const RuleApplication& app);
// Templates (default parameters) that apply_rule accepts at path.
std::vector<RuleApplication> applicable_rules(const Trace& t, const Path& at);

// ---- strategies ----

enum class Strategy { LtrApplicative, RtlApplicative, NormalOrder };
const char* strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(const std::string& s);

class Stuck : public std::runtime_error {
 public:
  Stuck(std::string reason, Expr residual, bool symbolic);
  std::string reason;
  Expr residual;
  bool symbolic;  // a normal form over symbolic names rather than a failure
};

class StepLimitExceeded : public std::runtime_error {
 public:
  StepLimitExceeded(Trace partial, std::size_t limit);
  std::shared_ptr<const Trace> partial;
  std::size_t limit;
};

// The step the strategy would take, without applying it; nullopt at a value.
std::optional<RuleApplication> next_step(const Trace& t, Strategy s);
Trace auto_step(const Trace& t, Strategy s);

enum class Outcome { Value, Error, Stuck, StuckSymbolic, StepLimit };
const char* outcome_name(Outcome o);

struct RunResult {
  Trace trace;
  Outcome outcome;
  std::string reason;
};

constexpr std::size_t kDefaultStepLimit = 10000;

// Throws StepLimitExceeded; a stuck state is reported in the result.
RunResult run_to_value(const Trace& t, Strategy s, std::size_t step_limit = kDefaultStepLimit);

// Terminal literal or ERROR.
bool is_terminal(const Expr& e);

// ---- evaluation contexts ----

class NoMatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluation context: the root expression with a hole at path.
struct Context {
  Expr root;
  Path hole;
};

struct Decomposition {
  Context context;
  Expr matched;
  std::map<std::string, Expr> bindings;
};

// Pattern variables are capitalized identifiers. The first match in
// pre-order wins.
std::optional<std::map<std::string, Expr>> match_pattern(const Expr& pattern, const Expr& e);
Decomposition decompose(const Expr& e, const Expr& pattern);
Expr recompose(const Context& c, const Expr& filler);
// `1 + _` style text of a context.
std::string context_text(const Context& c);

// ---- scripts ----

// One line: `rule; at=<expr>; key=value; ...`. `path=0.1` addresses a
// position directly. Without either the first applicable position is used.
struct ScriptStep {
  std::string rule;
  std::optional<std::string> at;
  std::optional<Path> path;
  std::map<std::string, std::string> params;
  int line = 0;
};

class ScriptError : public std::runtime_error {
 public:
  ScriptError(int line, const std::string& msg);
  int line;
};

std::vector<ScriptStep> parse_script(const std::string& text);
std::string print_script_step(const ScriptStep& s);
// Picks the target of a script step in t's current expression.
RuleApplication resolve_step(const Trace& t, const ScriptStep& s);

struct ReplayResult {
  Trace trace;
  std::optional<std::size_t> failed_step;  // index into the script
  std::string error;
  bool ok() const { return !failed_step; }
};

ReplayResult replay_script(const Trace& t, const std::vector<ScriptStep>& script);

// ---- rendering ----

constexpr std::size_t kTraceWidth = 48;

// Two-column text: expression rows, then `--` rows carrying the rule label.
std::string render_trace(const Trace& t, std::size_t width = kTraceWidth);

nlohmann::json rule_application_to_json(const RuleApplication& a);
RuleApplication rule_application_from_json(const nlohmann::json& j);
nlohmann::json step_to_json(const Step& s);
nlohmann::json trace_to_json(const Trace& t);
// Replays the recorded steps on start. A recorded after-expression that
// differs from the one the rule produces fails that step.
ReplayResult replay_steps(const nlohmann::json& steps, const Trace& start);

// ---- internals shared with verify and kernel ----

// Value of e if the ready part of it evaluates without looking at
// variables or non-primitive calls; used by the arithmetic rules.
std::optional<Expr> partial_value(const Expr& e);

// The step app would append, without appending it.
Step compute_step(const Trace& t, const RuleApplication& app);
// The program after s (differs only for definition removal).
std::shared_ptr<const Program> program_after(const Trace& t, const Step& s);

// Equality of two expressions by the algebra whitelist under guards.
bool algebra_equal(const Expr& a, const Expr& b, const std::vector<Expr>& guards, const TypeEnv& env);

}  // namespace stepwise
