// Helpers shared by the snm sources.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stepwise/snm.hpp"

namespace stepwise::snm {

enum class Family { Numeric, String, Boolean, Other };

// Which evaluation rule owns an operator node. Other for non-operators.
Family family(const Expr& e, const TypeEnv& env);
bool is_operator(const Expr& e);

// Evaluation restricted to the operations of one rule. Numeric admits every
// operator plus ERROR propagation; Cond and the boolean connectives belong to
// the conditional and boolean rules.
std::optional<Expr> evaluate(const Expr& e, Family filter);

// A strict child, scanned in evaluation order, is ERROR before any
// unevaluated one.
bool error_ready(const Expr& e);

// Strict children in Python evaluation order.
std::vector<std::size_t> strict_children(const Expr& e);

struct Replacement {
  Path path;  // relative to the scanned root
  Expr value;
};

// Maximal sub-expressions of e the rule for filter can evaluate.
std::vector<Replacement> collapse(const Expr& e, Family filter, const TypeEnv& env);
Expr apply_replacements(const Expr& e, const std::vector<Replacement>& rs);

// Binder names of every lambda in e.
std::set<std::string> binders(const Expr& e);

// Conjuncts name-to-spec-simpler adds for a self-call at args.
Expr simpler_guard(const VerificationContext& v, const std::vector<Expr>& args);

std::shared_ptr<const Program> without_definition(const Program& p, const std::string& name);

}  // namespace stepwise::snm
