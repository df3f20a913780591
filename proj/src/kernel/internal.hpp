// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "stepwise/kernel.hpp"

namespace stepwise::kern {

// `A=t B=u ...` against the sorts of a rule's metavariables.
Subst parse_bindings(const Logic& l, const std::string& text, const std::map<std::string, std::string>& metas,
                     const EmbedEnv& env);

bool known_embed(const std::string& kind);
// Payload for text written in a term of an embedded sort. Capitalized
// variables of quoted patterns are recorded in pattern_metas when given.
std::shared_ptr<const Embedded> parse_embed(const std::string& kind, const std::string& text, bool quoted,
                                            const EmbedEnv& env, std::map<std::string, std::string>* pattern_metas,
                                            const std::string& sort);

// Builtins discharge the goal or throw ProofError("ActionFailure", ...).
using Action = void (*)(const Logic&, const RelationInstance&, Subst&);

struct BuiltinInfo {
  const char* name;
  std::size_t arity;
  Action run;
};

const BuiltinInfo* find_builtin(const std::string& name);

[[noreturn]] void action_failure(const std::string& msg);

void ctx_lookup(const Logic& l, const RelationInstance& goal, Subst& s);
void decompose_action(const Logic& l, const RelationInstance& goal, Subst& s);
void recompose_action(const Logic& l, const RelationInstance& goal, Subst& s);
void reduce_action(const Logic& l, const RelationInstance& goal, Subst& s);

}  // namespace stepwise::kern
