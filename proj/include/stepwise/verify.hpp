// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stepwise/snm.hpp"

namespace stepwise {

class VerificationError : public std::runtime_error {
 public:
  VerificationError(std::string code, const std::string& msg);
  std::string code;  // AlreadyTrusted, SpecTypeError, MissingProgress, UnknownFunction, InvalidProgram
};

class NotDischarged : public std::runtime_error {
 public:
  NotDischarged(Expr final, Expr target, std::string diff);
  Expr final, target;
  std::string diff;
};

struct Obligation {
  enum class Status { Open, Discharged, Failed };
  FunctionSpec spec;
  std::vector<Expr> args;  // fresh symbolic parameters
  Expr initial;            // (f(args) if pre else ERROR)
  Expr target;             // (post if pre else ERROR)
  Status status = Status::Open;
};

const char* status_name(Obligation::Status s);

struct Verification {
  Obligation obligation;
  Trace trace;
};

// Whether f's body calls f.
bool is_recursive(const FuncDef& f);

// Spec from the comment block above f.
FunctionSpec spec_of(const FuncDef& f);

// Fresh symbolic names for f's parameters: x, y, z, ... skipping names the
// program defines.
std::vector<std::string> symbolic_names(const Program& p, std::size_t n);

Verification begin_verification(const Program& p, const FunctionSpec& spec, const TrustRegistry& registry,
                                TraceConfig config = {});
Verification begin_verification(const Program& p, const std::string& function, TraceConfig config = {});

// The conjuncts progr > pmin and progr > progr' for a self-call at call_args;
// empty when the spec declares no progress.
std::vector<Expr> check_progress(const FunctionSpec& spec, const std::vector<Expr>& entry_args,
                                 const std::vector<Expr>& call_args);

// First structural difference between a and b, or empty when alpha-equal.
std::string expr_diff(const Expr& a, const Expr& b);

// Registry with the function promoted; throws NotDischarged.
TrustRegistry finish_verification(const Obligation& ob, const Trace& t);

struct ConjunctReport {
  Expr conjunct;
  Verdict verdict;
  std::size_t step = 0;  // index of the name-to-spec-simpler step
};

struct VerifyReport {
  Obligation obligation;
  Trace trace;
  std::optional<std::size_t> failed_step;
  std::string error;
  std::string diff;
  std::vector<ConjunctReport> conjuncts;
  std::optional<TrustRegistry> registry;  // set when discharged

  bool discharged() const { return obligation.status == Obligation::Status::Discharged; }
};

// Replays script, or runs strategy when there is none, and tries to finish.
VerifyReport verify_function(const Program& p, const std::string& function,
                             const std::optional<std::vector<ScriptStep>>& script,
                             Strategy strategy = Strategy::LtrApplicative,
                             std::size_t step_limit = kDefaultStepLimit, TraceConfig config = {});

nlohmann::json report_to_json(const VerifyReport& r);

}  // namespace stepwise
