// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "kernel/internal.hpp"

namespace stepwise {

ProofError::ProofError(std::string c, const std::string& msg) : std::runtime_error(msg), code(std::move(c)) {}

namespace kern {

void action_failure(const std::string& msg) { throw ProofError("ActionFailure", msg); }

const BuiltinInfo* find_builtin(const std::string& name) {
  static const BuiltinInfo table[] = {
      {"ctx-lookup", 3, ctx_lookup},
      {"decompose", 3, decompose_action},
      {"recompose", 3, recompose_action},
      {"reduce", 7, reduce_action},
  };
  for (const auto& b : table)
    if (name == b.name) return &b;
  return nullptr;
}

// IsIn(x, p, G): discharged when G binds x to exactly p.
void ctx_lookup(const Logic& l, const RelationInstance& goal, Subst&) {
  const Term& x = goal.args[0];
  const Term& p = goal.args[1];
  const SortDecl* ctx = l.find_sort(goal.args[2].sort);
  const Constructor* cons = ctx ? ctx->list_cons() : nullptr;
  if (!cons || !x.closed()) action_failure(print_relation(l, goal));
  const Term* g = &goal.args[2];
  while (g->is(Term::Kind::Apply) && g->name == cons->name) {
    const Term& key = g->args[0];
    if (!key.is(Term::Kind::Meta) && key == x) {
      if (g->args[1] == p) return;
      action_failure("Proposition does not match");
    }
    g = &g->args[2];
  }
  if (g->is(Term::Kind::Meta)) action_failure(print_relation(l, goal));
  action_failure("Hypothesis not found: " + print_term(l, x));
}

}  // namespace kern

namespace {

void discharge_automatic(const Logic& l, ProofState& s) {
  auto closes = [&](const Goal& g) {
    if (!g.rel.closed()) return false;
    for (const auto& r : l.rules) {
      if (!r.automatic || r.conclusion.relation != g.rel.relation) continue;
      Subst sub;
      if (unify(r.conclusion, g.rel, sub)) return true;
    }
    return false;
  };
  s.goals.erase(std::remove_if(s.goals.begin(), s.goals.end(), closes), s.goals.end());
}

const Goal& goal_at(const ProofState& s, std::size_t i) {
  if (i >= s.goals.size())
    throw ProofError("NoSuchGoal", s.goals.empty() ? "no open goals" : "no open goal " + std::to_string(i));
  return s.goals[i];
}

}  // namespace

ProofState initial_state(const Logic& l, const RelationInstance& goal) {
  ProofState s{{Goal{goal, std::nullopt}}};
  discharge_automatic(l, s);
  return s;
}

ProofState apply_backward(const Logic& l, const ProofState& s, std::size_t goal_index, const InferenceRule& rule,
                          const Subst& bindings, std::size_t step, Subst* resolved) {
  const Goal& g = goal_at(s, goal_index);
  const RelationDecl* rd = l.find_relation(g.rel.relation);
  if (!rd->inference())
    throw ProofError("NotInference", g.rel.relation + " is decided by the builtin action " + rd->action);
  Subst sub;
  for (const auto& [k, v] : bindings) {
    auto it = rule.metas.find(k);
    if (it == rule.metas.end()) throw ProofError("UnknownMetavariable", "rule " + rule.name + " has no metavariable " + k);
    if (it->second != v.sort)
      throw ProofError("SortMismatch", k + " has sort " + it->second + ", not " + v.sort);
    sub[k] = v;
  }
  if (!unify(rule.conclusion, g.rel, sub)) {
    RelationInstance concl = apply_subst(rule.conclusion, sub);
    throw ProofError("UnificationFailure",
                     "conclusion " + print_relation(l, concl) + " of " + rule.name + " does not unify with " +
                         print_relation(l, g.rel));
  }
  std::vector<Goal> fresh;
  for (const auto& p : rule.premises) {
    const RelationDecl* pr = l.find_relation(p.relation);
    if (pr->inference()) {
      fresh.push_back({p, step});
      continue;
    }
    RelationInstance inst = apply_subst(p, sub);
    kern::find_builtin(pr->action)->run(l, inst, sub);
  }
  // Metavariables no premise determined stay open under a step-local name.
  Subst rename;
  for (auto& f : fresh) {
    f.rel = apply_subst(f.rel, sub);
    std::map<std::string, std::string> left;
    for (const auto& a : f.rel.args) collect_metas(a, left);
    for (const auto& [name, sort] : left)
      if (rule.metas.count(name)) rename.emplace(name, Term::meta(name + "#" + std::to_string(step), sort));
  }
  ProofState out;
  for (std::size_t i = 0; i < s.goals.size(); ++i) {
    if (i != goal_index) {
      out.goals.push_back({apply_subst(s.goals[i].rel, sub), s.goals[i].origin});
      continue;
    }
    for (auto& f : fresh) out.goals.push_back({apply_subst(f.rel, rename), f.origin});
  }
  if (resolved) {
    resolved->clear();
    for (const auto& [name, sort] : rule.metas)
      (*resolved)[name] = apply_subst(apply_subst(Term::meta(name, sort), sub), rename);
  }
  discharge_automatic(l, out);
  return out;
}

ProofState run_builtin_action(const Logic& l, const ProofState& s, std::size_t goal_index, const std::string& action,
                              std::size_t) {
  const Goal& g = goal_at(s, goal_index);
  const RelationDecl* rd = l.find_relation(g.rel.relation);
  if (rd->action != action)
    throw ProofError("NotInference", g.rel.relation + " is not decided by " + action);
  Subst sub;
  kern::find_builtin(action)->run(l, g.rel, sub);
  ProofState out;
  for (std::size_t i = 0; i < s.goals.size(); ++i)
    if (i != goal_index) out.goals.push_back({apply_subst(s.goals[i].rel, sub), s.goals[i].origin});
  discharge_automatic(l, out);
  return out;
}

const char* step_status_name(StepReport::Status s) {
  switch (s) {
    case StepReport::Status::Ok: return "ok";
    case StepReport::Status::Failed: return "failed";
    case StepReport::Status::Skipped: return "skipped";
  }
  return "?";
}

CheckReport check_proof(const Logic& l, const RelationInstance& goal, const std::vector<ProofNode>& script) {
  if (!goal.closed()) throw ProofError("IllFormedGoal", "goal " + print_relation(l, goal) + " mentions metavariables");
  CheckReport r;
  r.goal = goal;
  ProofState state = initial_state(l, goal);
  for (std::size_t i = 0; i < script.size(); ++i) {
    const ProofNode& n = script[i];
    StepReport sr;
    sr.node = n;
    sr.before = sr.after = state;
    if (r.failed_step) {
      sr.status = StepReport::Status::Skipped;
      r.steps.push_back(std::move(sr));
      continue;
    }
    try {
      if (!n.rule.empty() && n.rule[0] == '!') {
        state = run_builtin_action(l, state, n.goal, n.rule.substr(1), i);
      } else {
        const InferenceRule* rule = l.find_rule(n.rule);
        if (!rule) throw ProofError("UnknownRule", "no rule " + n.rule + " in logic " + l.name);
        state = apply_backward(l, state, n.goal, *rule, n.bindings, i, &sr.resolved);
      }
      sr.after = state;
    } catch (const ProofError& e) {
      sr.status = StepReport::Status::Failed;
      sr.code = e.code;
      sr.message = e.what();
      r.failed_step = i;
    } catch (const std::exception& e) {
      sr.status = StepReport::Status::Failed;
      sr.code = "ActionFailure";
      sr.message = e.what();
      r.failed_step = i;
    }
    r.steps.push_back(std::move(sr));
  }
  r.final = state;
  r.valid = !r.failed_step && state.goals.empty();
  return r;
}

// ---- scripts ----

namespace {

const std::map<std::string, std::string>& metas_of(const Logic& l, const std::string& rule) {
  static const std::map<std::string, std::string> none;
  if (!rule.empty() && rule[0] == '!') return none;
  const InferenceRule* r = l.find_rule(rule);
  if (!r) throw LogicError("UnknownRule", 0, "no rule " + rule + " in logic " + l.name);
  return r->metas;
}

}  // namespace

std::vector<ProofNode> parse_proof_script(const Logic& l, const std::string& text, const EmbedEnv& env) {
  std::vector<ProofNode> out;
  std::stringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto b = raw.find_first_not_of(" \t\r");
    if (b == std::string::npos || raw[b] == '#') continue;
    std::stringstream words(raw.substr(b));
    ProofNode n;
    words >> n.rule;
    std::string rest;
    std::getline(words, rest);
    auto r = rest.find_first_not_of(" \t");
    rest = r == std::string::npos ? "" : rest.substr(r);
    if (rest.rfind('@', 0) == 0) {
      std::size_t used = 0;
      try {
        n.goal = std::stoul(rest.substr(1), &used);
      } catch (const std::exception&) {
        throw LogicError("SyntaxError", line, "expected a goal index after @");
      }
      rest = rest.substr(1 + used);
    }
    try {
      n.bindings = kern::parse_bindings(l, rest, metas_of(l, n.rule), env);
    } catch (const LogicError& e) {
      throw LogicError(e.code, line, e.what());
    }
    out.push_back(std::move(n));
  }
  return out;
}

std::vector<ProofNode> proof_script_from_json(const Logic& l, const nlohmann::json& j, const EmbedEnv& env) {
  if (j.is_string()) return parse_proof_script(l, j.get<std::string>(), env);
  if (!j.is_array()) throw LogicError("SyntaxError", 0, "script must be text or an array of steps");
  std::vector<ProofNode> out;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("rule") || !item["rule"].is_string())
      throw LogicError("SyntaxError", 0, "each step needs a rule name");
    ProofNode n;
    n.rule = item["rule"].get<std::string>();
    if (item.contains("goal")) {
      if (!item["goal"].is_number_unsigned()) throw LogicError("SyntaxError", 0, "goal must be an index");
      n.goal = item["goal"].get<std::size_t>();
    }
    const auto& metas = metas_of(l, n.rule);
    if (item.contains("bindings")) {
      if (!item["bindings"].is_object()) throw LogicError("SyntaxError", 0, "bindings must be an object");
      for (const auto& [k, v] : item["bindings"].items()) {
        auto it = metas.find(k);
        if (it == metas.end()) throw LogicError("UnknownMetavariable", 0, "rule " + n.rule + " has no metavariable " + k);
        if (!v.is_string()) throw LogicError("SyntaxError", 0, "binding " + k + " must be text");
        n.bindings[k] = parse_term(l, v.get<std::string>(), it->second, env);
      }
    }
    out.push_back(std::move(n));
  }
  return out;
}

nlohmann::json proof_script_to_json(const Logic& l, const std::vector<ProofNode>& script) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& n : script) {
    nlohmann::json j{{"rule", n.rule}, {"goal", n.goal}};
    nlohmann::json b = nlohmann::json::object();
    for (const auto& [k, v] : n.bindings) b[k] = print_term(l, v);
    j["bindings"] = b;
    out.push_back(j);
  }
  return out;
}

nlohmann::json logic_to_json(const Logic& l) {
  nlohmann::json j;
  j["name"] = l.name;
  j["version"] = l.version;
  j["sorts"] = nlohmann::json::array();
  for (const auto& s : l.sorts) {
    nlohmann::json ctors = nlohmann::json::array();
    for (const auto& c : s.ctors) ctors.push_back({{"name", c.name}, {"args", c.args}});
    nlohmann::json sj{{"name", s.name}, {"constructors", ctors}, {"idents", s.idents}, {"numerals", s.numerals()}};
    if (!s.embed.empty()) sj["embed"] = s.embed;
    j["sorts"].push_back(sj);
  }
  j["relations"] = nlohmann::json::array();
  for (const auto& r : l.relations)
    j["relations"].push_back({{"name", r.name}, {"sorts", r.sorts}, {"action", r.inference() ? "inference" : "builtin:" + r.action}});
  j["rules"] = nlohmann::json::array();
  for (const auto& r : l.rules) {
    nlohmann::json prem = nlohmann::json::array();
    for (const auto& p : r.premises) prem.push_back(print_relation(l, p));
    j["rules"].push_back({{"name", r.name},
                          {"premises", prem},
                          {"conclusion", print_relation(l, r.conclusion)},
                          {"automatic", r.automatic},
                          {"metavariables", r.metas}});
  }
  return j;
}

nlohmann::json state_to_json(const Logic& l, const ProofState& s) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& g : s.goals) out.push_back(print_relation(l, g.rel));
  return out;
}

nlohmann::json check_report_to_json(const Logic& l, const CheckReport& r) {
  nlohmann::json j;
  j["logic"] = l.name;
  j["goal"] = print_relation(l, r.goal);
  j["valid"] = r.valid;
  j["failed_step"] = r.failed_step ? nlohmann::json(*r.failed_step) : nlohmann::json(nullptr);
  j["steps"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    const StepReport& s = r.steps[i];
    nlohmann::json sj{{"index", i},
                      {"rule", s.node.rule},
                      {"goal", s.node.goal},
                      {"status", step_status_name(s.status)},
                      {"before", state_to_json(l, s.before)},
                      {"after", state_to_json(l, s.after)}};
    const auto* origin = s.node.goal < s.before.goals.size() ? &s.before.goals[s.node.goal].origin : nullptr;
    sj["parent"] = origin && *origin ? nlohmann::json(**origin) : nlohmann::json(nullptr);
    if (s.status == StepReport::Status::Failed) {
      sj["code"] = s.code;
      sj["message"] = s.message;
    }
    nlohmann::json b = nlohmann::json::object();
    for (const auto& [k, v] : s.resolved) b[k] = print_term(l, v);
    sj["bindings"] = b;
    j["steps"].push_back(sj);
  }
  j["final"] = state_to_json(l, r.final);
  return j;
}

std::map<std::string, Logic> load_logics(const std::string& dir) {
  std::map<std::string, Logic> out;
  out.emplace(snm_bridge_logic().name, snm_bridge_logic());
  if (dir.empty()) return out;
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw LogicError("SyntaxError", 0, "no logic directory " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".logic") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream buf;
    buf << in.rdbuf();
    Logic l;
    try {
      l = parse_logic(buf.str());
    } catch (const LogicError& e) {
      throw LogicError(e.code, e.line, f.filename().string() + ": " + e.what());
    }
    if (out.count(l.name)) throw LogicError("SignatureError", 0, f.filename().string() + ": logic " + l.name + " defined twice");
    out.emplace(l.name, std::move(l));
  }
  return out;
}

}  // namespace stepwise
