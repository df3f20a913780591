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

#include "stepwise/snm.hpp"

namespace stepwise {

// ---- terms ----

// Payload of an embedded sort: snm expressions, contexts, trace states.
class Embedded {
 public:
  virtual ~Embedded() = default;
  virtual std::string kind() const = 0;
  virtual std::string text() const = 0;
  virtual bool equals(const Embedded& other) const = 0;
};

struct Term {
  enum class Kind { Meta, Apply, Embed };
  Kind kind = Kind::Apply;
  std::string name;  // metavariable or function symbol
  std::string sort;
  std::vector<Term> args;
  std::shared_ptr<const Embedded> embed;

  static Term meta(std::string name, std::string sort);
  static Term apply(std::string symbol, std::vector<Term> args, std::string sort);
  static Term embedded(std::shared_ptr<const Embedded> payload, std::string sort);

  bool is(Kind k) const { return kind == k; }
  bool closed() const;
};

bool operator==(const Term& a, const Term& b);
inline bool operator!=(const Term& a, const Term& b) { return !(a == b); }

struct RelationInstance {
  std::string relation;
  std::vector<Term> args;

  bool closed() const;
};

bool operator==(const RelationInstance& a, const RelationInstance& b);

using Subst = std::map<std::string, Term>;

Term apply_subst(const Term& t, const Subst& s);
RelationInstance apply_subst(const RelationInstance& r, const Subst& s);
// Extends s so that a and b become equal; false (s unspecified) otherwise.
bool unify(const Term& a, const Term& b, Subst& s);
bool unify(const RelationInstance& a, const RelationInstance& b, Subst& s);
void collect_metas(const Term& t, std::map<std::string, std::string>& out);

// ---- logics ----

struct Constructor {
  std::string name;
  std::vector<std::string> args;
};

struct SortDecl {
  std::string name;
  std::vector<Constructor> ctors;
  bool idents = false;   // any lowercase name is a constant of this sort
  std::string embed;     // embedded payload kind, or empty

  // `4` for S(S(S(S(O)))) when the sort has O and S(self).
  bool numerals() const;
  // `[x:p, y:q]` when the sort is a nil/cons list of pairs.
  const Constructor* list_nil() const;
  const Constructor* list_cons() const;
};

struct RelationDecl {
  std::string name;
  std::vector<std::string> sorts;
  std::string action;  // "inference" or a builtin action name

  bool inference() const { return action == "inference"; }
};

struct InferenceRule {
  std::string name;
  std::vector<RelationInstance> premises;
  RelationInstance conclusion;
  // A premise-free rule that discharges matching closed goals on its own.
  bool automatic = false;
  std::map<std::string, std::string> metas;  // name -> sort
};

struct Logic {
  std::string name;
  int version = 1;
  std::vector<SortDecl> sorts;
  std::vector<RelationDecl> relations;
  std::vector<InferenceRule> rules;

  const SortDecl* find_sort(const std::string& n) const;
  const RelationDecl* find_relation(const std::string& n) const;
  const InferenceRule* find_rule(const std::string& n) const;
  // Sort owning the constructor.
  const SortDecl* ctor_sort(const std::string& ctor) const;
};

class LogicError : public std::runtime_error {
 public:
  LogicError(std::string code, int line, const std::string& msg);
  std::string code;  // SyntaxError, SignatureError, UnknownSort, UnknownBuiltinAction
  int line;
};

bool is_builtin_action(const std::string& name);

// Context for embedded payloads written as text, e.g. `sig` for the state
// of a program.
struct EmbedEnv {
  std::shared_ptr<const Trace> sig;
};

Logic parse_logic(const std::string& document);
// Throws LogicError on an ill-sorted term (code SortMismatch) or bad syntax.
Term parse_term(const Logic& l, const std::string& text, const std::string& sort, const EmbedEnv& env = {});
RelationInstance parse_relation(const Logic& l, const std::string& text, const EmbedEnv& env = {});
std::string print_term(const Logic& l, const Term& t);
std::string print_relation(const Logic& l, const RelationInstance& r);
std::string print_logic(const Logic& l);

// ---- proofs ----

class ProofError : public std::runtime_error {
 public:
  ProofError(std::string code, const std::string& msg);
  std::string code;  // UnificationFailure, SortMismatch, UnknownRule, ActionFailure, NoSuchGoal, NotInference
};

struct Goal {
  RelationInstance rel;
  std::optional<std::size_t> origin;  // step whose rule introduced it
};

struct ProofState {
  std::vector<Goal> goals;
};

// Open goals with closed goals matched by automatic rules removed.
ProofState initial_state(const Logic& l, const RelationInstance& goal);

struct ProofNode {
  std::string rule;  // inference rule, or `!action` for a builtin
  Subst bindings;
  std::size_t goal = 0;  // index of the open goal it refines
};

// Applies rule backwards to the open goal goal_index. Builtin premises run
// immediately. step tags new goals and renames leftover metavariables.
ProofState apply_backward(const Logic& l, const ProofState& s, std::size_t goal_index, const InferenceRule& rule,
                          const Subst& bindings, std::size_t step = 0, Subst* resolved = nullptr);
ProofState run_builtin_action(const Logic& l, const ProofState& s, std::size_t goal_index, const std::string& action,
                              std::size_t step = 0);

struct StepReport {
  ProofNode node;
  ProofState before, after;
  enum class Status { Ok, Failed, Skipped } status = Status::Ok;
  std::string code, message;
  Subst resolved;  // the rule's metavariables after the step
};

const char* step_status_name(StepReport::Status s);

struct CheckReport {
  RelationInstance goal;
  std::vector<StepReport> steps;
  std::optional<std::size_t> failed_step;
  ProofState final;
  bool valid = false;
};

// Throws ProofError (code IllFormedGoal) when goal mentions metavariables.
CheckReport check_proof(const Logic& l, const RelationInstance& goal, const std::vector<ProofNode>& script);

// One node per line: `rule [@goal] [Meta=term ...]`; `#` comments.
std::vector<ProofNode> parse_proof_script(const Logic& l, const std::string& text, const EmbedEnv& env = {});
std::vector<ProofNode> proof_script_from_json(const Logic& l, const nlohmann::json& j, const EmbedEnv& env = {});
nlohmann::json proof_script_to_json(const Logic& l, const std::vector<ProofNode>& script);
nlohmann::json logic_to_json(const Logic& l);
nlohmann::json state_to_json(const Logic& l, const ProofState& s);
nlohmann::json check_report_to_json(const Logic& l, const CheckReport& r);

// ---- bridge to the substitution machine ----

std::shared_ptr<const Embedded> embed_expr(Expr e);
std::shared_ptr<const Embedded> embed_context(Context c);
std::shared_ptr<const Embedded> embed_sig(std::shared_ptr<const Trace> state);
std::shared_ptr<const Embedded> embed_params(std::map<std::string, std::string> params);
const Expr* embedded_expr(const Term& t);
const Context* embedded_context(const Term& t);
const Trace* embedded_sig(const Term& t);
const std::map<std::string, std::string>* embedded_params(const Term& t);

// Logic whose Step(sig, e, v) relation holds when e rewrites to v by snm
// rules; every rule of the catalog has a wrapper through Decompose/Recompose.
const Logic& snm_bridge_logic();

struct BridgeProof {
  RelationInstance goal;
  std::vector<ProofNode> script;
};

BridgeProof trace_to_proof(const Trace& t);
// Replays a valid bridge proof as a trace; throws ProofError when invalid.
Trace proof_to_trace(const RelationInstance& goal, const std::vector<ProofNode>& script);

// Logic table loaded from `*.logic` files in dir plus the bridge logic.
std::map<std::string, Logic> load_logics(const std::string& dir);

}  // namespace stepwise
