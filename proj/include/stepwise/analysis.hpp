// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stepwise/program.hpp"

namespace stepwise {

// ---- grammar ----

struct Violation {
  std::string code;  // DuplicateDefinition, ShadowsGlobal, UndefinedName, ...
  std::string message;
  int line = 0;
};

std::vector<Violation> check_grammar(const Program& p);

// ---- types ----

class TypeError : public std::runtime_error {
 public:
  TypeError(Path path, std::string expected, std::string found, const std::string& what);
  Path path;
  std::string expected, found;
};

struct TypeEnv {
  std::map<std::string, Type> names;

  const Type* find(const std::string& n) const {
    auto it = names.find(n);
    return it == names.end() ? nullptr : &it->second;
  }
  TypeEnv with(const std::string& n, Type t) const {
    TypeEnv e = *this;
    e.names.insert_or_assign(n, std::move(t));
    return e;
  }
};

// Names evaluated directly by the arithmetic rules.
bool is_primitive_function(const std::string& name);

// Globals of p (and the prelude) with their declared or inferred types.
TypeEnv global_types(const Program& p);
Type infer_type(const Expr& e, const TypeEnv& env);

struct TypeCheckResult {
  std::vector<Violation> violations;
  TypeEnv env;
  std::optional<Type> goal_type;
  bool ok() const { return violations.empty(); }
};

TypeCheckResult type_check(const Program& p);

// Grammar violations, or type violations when the grammar holds.
std::vector<Violation> check_program(const Program& p);

// ---- trust ----

struct FunctionSpec {
  std::string name;
  std::vector<Param> params;
  Type result;
  Expr pre;   // True when absent
  Expr post;
  std::optional<Expr> progress;
  std::optional<int64_t> pmin;
};

bool operator==(const FunctionSpec& a, const FunctionSpec& b);

enum class Provenance { Builtin, Verified };

struct TrustEntry {
  FunctionSpec spec;
  Provenance provenance = Provenance::Builtin;
};

class TrustRegistry {
 public:
  // Library stubs from the prelude and from p.
  static TrustRegistry initial(const Program& p);

  bool trusted(const std::string& name) const { return entries_.count(name) > 0; }
  const TrustEntry* find(const std::string& name) const;
  TrustRegistry with(TrustEntry e) const;
  const std::map<std::string, TrustEntry>& entries() const { return entries_; }

  friend bool operator==(const TrustRegistry& a, const TrustRegistry& b);

 private:
  std::map<std::string, TrustEntry> entries_;
};

FunctionSpec spec_from_stub(const FuncDef& f);

// ---- entailment ----

enum class Verdict { Proved, Refuted, Unknown };
const char* verdict_name(Verdict v);

struct EntailResult {
  Verdict verdict = Verdict::Unknown;
  std::vector<std::string> unsupported;  // fragments treated as opaque
};

// Decides claim under the conjunction of guards. Integer-typed variables are
// read from env; everything else is matched syntactically.
EntailResult entails(const std::vector<Expr>& guards, const Expr& claim, const TypeEnv& env);

// A value the guards force var to take: a literal when one is provable,
// otherwise the right side of a guard `var==e`.
std::optional<Expr> forced_value(const std::vector<Expr>& guards, const std::string& var, const TypeEnv& env);

// ---- ground evaluation ----

// Value of a closed expression built from literals, operators and primitive
// functions; nullopt if it contains anything else. ERROR for failures.
std::optional<Expr> eval_ground(const Expr& e);

// ---- guards and safety ----

struct Position {
  std::vector<Expr> guards;
  std::set<std::string> bound;  // lambda parameters in scope
};

// Guards in force at path, starting from root_guards.
Position position_at(const Expr& root, const Path& path, const std::vector<Expr>& root_guards = {});

enum class UnsafeReason { None, UntrustedCallee, UnprovablePrecondition, UnsafeVariableDefinition, ErrorValue };
const char* reason_name(UnsafeReason r);

struct SafetyReport {
  bool safe = true;
  Path path;  // offending sub-expression, relative to the checked expression
  UnsafeReason reason = UnsafeReason::None;
  std::string message;
};

class SafetyEnv {
 public:
  SafetyEnv(std::shared_ptr<const Program> program, TrustRegistry registry, TypeEnv types,
            std::set<std::string> assumed_safe = {});

  const Program& program() const { return *program_; }
  const TrustRegistry& registry() const { return registry_; }
  const TypeEnv& types() const { return types_; }
  const std::set<std::string>& assumed_safe() const { return assumed_; }

  SafetyReport check(const Expr& e, const std::vector<Expr>& guards,
                     const std::set<std::string>& bound = {}) const;
  bool global_safe(const std::string& name) const;

  // Precondition of a trusted callee instantiated at args, with int
  // arguments widened for library stubs.
  // env defaults to types().
  Expr instantiate_pre(const TrustEntry& entry, const std::vector<Expr>& args,
                       const TypeEnv* env = nullptr) const;
  Expr instantiate_post(const TrustEntry& entry, const std::vector<Expr>& args,
                        const TypeEnv* env = nullptr) const;
  std::vector<Expr> widen_args(const TrustEntry& entry, const std::vector<Expr>& args,
                               const TypeEnv* env = nullptr) const;
  // Implicit precondition of an operator application, or nullopt.
  std::optional<Expr> operator_pre(const Expr& e, const TypeEnv* env = nullptr) const;

 private:
  SafetyReport check_rec(const Expr& e, std::vector<Expr>& guards, std::set<std::string>& bound,
                         const TypeEnv& types, Path& path) const;

  std::shared_ptr<const Program> program_;
  TrustRegistry registry_;
  TypeEnv types_;
  std::set<std::string> assumed_;
  mutable std::shared_ptr<std::map<std::string, bool>> cache_;
};

SafetyReport is_safe(const Expr& e, const std::vector<Expr>& guards, const SafetyEnv& env);

class UnsafeLocalError : public std::runtime_error {
 public:
  UnsafeLocalError(std::string local, Expr value, SafetyReport report);
  std::string local;
  Expr value;
  SafetyReport report;
};

// Body as one expression; throws UnsafeLocalError when a local initializer,
// after substituting args for the parameters, is not safe.
Expr normalize_to_expression(const FuncDef& f, const SafetyEnv& env,
                             const std::vector<Expr>& args = {});

}  // namespace stepwise
