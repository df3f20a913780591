// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "stepwise/service.hpp"

#include <algorithm>

#include "stepwise/verify.hpp"

namespace stepwise {

namespace {

using json = nlohmann::json;

HttpResponse reply(int status, json body) {
  body["schema"] = kSchemaVersion;
  return {status, std::move(body)};
}

HttpResponse failure(int status, const std::string& error, const std::vector<std::string>& diagnostics) {
  return reply(status, {{"error", error}, {"diagnostics", diagnostics}});
}

// Thrown while reading a request; becomes a 400 or 422 reply.
struct RequestError {
  int status;
  std::string error;
  std::vector<std::string> diagnostics;
};

const json& field(const json& req, const char* name, json::value_t type) {
  if (!req.contains(name)) throw RequestError{400, "BadRequest", {std::string("missing field ") + name}};
  const json& v = req[name];
  bool ok = v.type() == type || (type == json::value_t::number_unsigned && v.is_number_integer() && v.get<long long>() >= 0);
  if (!ok) throw RequestError{400, "BadRequest", {std::string("field ") + name + " has the wrong type"}};
  return v;
}

std::optional<std::string> optional_string(const json& req, const char* name) {
  if (!req.contains(name) || req[name].is_null()) return std::nullopt;
  return field(req, name, json::value_t::string).get<std::string>();
}

Program read_program(const std::string& text) {
  Program p;
  try {
    p = parse_program(text);
  } catch (const std::exception& e) {
    throw RequestError{400, "SyntaxError", {e.what()}};
  }
  auto v = check_program(p);
  if (!v.empty()) {
    std::vector<std::string> d;
    for (const auto& x : v) d.push_back("line " + std::to_string(x.line) + ": " + x.code + ": " + x.message);
    throw RequestError{422, v.front().code, d};
  }
  return p;
}

json steps_json(const Trace& t) {
  json out = json::array();
  for (std::size_t i = 0; i < t.steps().size(); ++i) {
    json s = step_to_json(t.steps()[i]);
    s["index"] = i;
    out.push_back(s);
  }
  return out;
}

}  // namespace

json snm_logic_json() {
  json rules = json::array();
  for (const auto& r : rule_catalog()) {
    json params = json::array();
    for (const auto& p : r.params)
      params.push_back({{"name", p.name}, {"required", p.required}, {"description", p.description}});
    rules.push_back({{"name", r.id}, {"family", r.family}, {"summary", r.summary}, {"params", params}});
  }
  return {{"name", "snm"}, {"version", 1}, {"sorts", json::array()}, {"relations", json::array()}, {"rules", rules}};
}

Service::Service(ServiceConfig config) : Service(config, load_logics(config.logic_dir)) {}

Service::Service(ServiceConfig config, std::map<std::string, Logic> logics)
    : config_(std::move(config)), logics_(std::move(logics)) {}

HttpResponse Service::list_logics() const {
  json names = json::array();
  std::vector<std::pair<std::string, int>> all{{"snm", 1}};
  for (const auto& [n, l] : logics_) all.emplace_back(n, l.version);
  std::sort(all.begin(), all.end());
  for (const auto& [n, v] : all) names.push_back({{"name", n}, {"version", v}});
  return reply(200, {{"logics", names}});
}

HttpResponse Service::get_logic(const std::string& name) const {
  if (name == "snm") return reply(200, snm_logic_json());
  auto it = logics_.find(name);
  if (it == logics_.end()) return failure(404, "NotFound", {"no logic " + name});
  return reply(200, logic_to_json(it->second));
}

HttpResponse Service::check(const json& req) const {
  try {
    if (!req.is_object()) throw RequestError{400, "BadRequest", {"request must be an object"}};
    int schema = static_cast<int>(field(req, "schema", json::value_t::number_unsigned).get<long long>());
    if (schema != kSchemaVersion)
      throw RequestError{400, "BadRequest", {"unsupported schema version " + std::to_string(schema)}};
    std::string logic = field(req, "logic", json::value_t::string).get<std::string>();
    if (logic == "snm") return check_snm(req);
    auto it = logics_.find(logic);
    if (it == logics_.end()) return failure(404, "NotFound", {"no logic " + logic});
    return check_kernel(it->second, req);
  } catch (const RequestError& e) {
    return failure(e.status, e.error, e.diagnostics);
  }
}

HttpResponse Service::check_snm(const json& req) const {
  Program p = read_program(field(req, "program", json::value_t::string).get<std::string>());
  TraceConfig tc;
  Strategy strategy = Strategy::LtrApplicative;
  std::size_t limit = config_.step_limit_cap;
  if (req.contains("config")) {
    const json& c = field(req, "config", json::value_t::object);
    if (auto s = optional_string(c, "strategy")) {
      auto parsed = parse_strategy(*s);
      if (!parsed) throw RequestError{400, "BadRequest", {"unknown strategy " + *s}};
      strategy = *parsed;
    }
    if (c.contains("auto_context")) tc.auto_context = field(c, "auto_context", json::value_t::boolean).get<bool>();
    if (c.contains("step_limit")) {
      auto n = field(c, "step_limit", json::value_t::number_unsigned).get<std::size_t>();
      if (n == 0) throw RequestError{400, "BadRequest", {"step_limit must be positive"}};
      limit = std::min(n, config_.step_limit_cap);
    }
  }
  std::optional<std::vector<ScriptStep>> text_script;
  const json* step_list = nullptr;
  if (req.contains("script") && !req["script"].is_null()) {
    const json& s = req["script"];
    if (s.is_string()) {
      try {
        text_script = parse_script(s.get<std::string>());
      } catch (const ScriptError& e) {
        throw RequestError{400, "ScriptError", {e.what()}};
      }
    } else if (s.is_array()) {
      step_list = &s;
    } else {
      throw RequestError{400, "BadRequest", {"script must be text or an array of steps"}};
    }
  }

  json out{{"logic", "snm"}, {"diagnostics", json::array()}};
  if (auto fn = optional_string(req, "verify")) {
    std::optional<Verification> v;
    try {
      v = begin_verification(p, *fn, tc);
    } catch (const VerificationError& e) {
      throw RequestError{422, e.code, {e.what()}};
    }
    VerifyReport r{v->obligation, v->trace, std::nullopt, "", "", {}, std::nullopt};
    if (step_list) {
      ReplayResult rr = replay_steps(*step_list, v->trace);
      r.trace = rr.trace;
      r.failed_step = rr.failed_step;
      r.error = rr.error;
      try {
        r.registry = finish_verification(r.obligation, r.trace);
        r.obligation.status = Obligation::Status::Discharged;
      } catch (const NotDischarged& e) {
        r.obligation.status = Obligation::Status::Failed;
        r.diff = e.diff;
      }
    } else {
      r = verify_function(p, *fn, text_script, strategy, limit, tc);
    }
    out["valid"] = r.discharged();
    out["verification"] = report_to_json(r);
    out["initial"] = print_expr(r.trace.initial());
    out["final"] = print_expr(r.trace.current());
    out["steps"] = steps_json(r.trace);
    out["failed_step"] = r.failed_step ? json(*r.failed_step) : json(nullptr);
    if (!r.error.empty()) out["error"] = r.error;
    out["rendered"] = render_trace(r.trace);
    return reply(200, out);
  }

  Trace start = Trace::of_goal(p, tc);
  if (req.contains("symbolic")) {
    for (const auto& [name, type] : field(req, "symbolic", json::value_t::object).items()) {
      if (!type.is_string()) throw RequestError{400, "BadRequest", {"symbolic types must be text"}};
      try {
        start = start.with_symbolic(name, parse_type(type.get<std::string>()));
      } catch (const std::exception& e) {
        throw RequestError{400, "SyntaxError", {e.what()}};
      }
    }
  }
  Trace t = start;
  out["valid"] = true;
  out["failed_step"] = nullptr;
  if (text_script || step_list) {
    ReplayResult rr = text_script ? replay_script(start, *text_script) : replay_steps(*step_list, start);
    t = rr.trace;
    if (rr.failed_step) {
      out["valid"] = false;
      out["failed_step"] = *rr.failed_step;
      out["error"] = rr.error;
    }
  } else {
    try {
      RunResult run = run_to_value(start, strategy, limit);
      t = run.trace;
      out["outcome"] = outcome_name(run.outcome);
      if (!run.reason.empty()) out["reason"] = run.reason;
    } catch (const StepLimitExceeded& e) {
      t = *e.partial;
      out["outcome"] = outcome_name(Outcome::StepLimit);
      out["reason"] = e.what();
    }
  }
  out["initial"] = print_expr(t.initial());
  out["final"] = print_expr(t.current());
  out["steps"] = steps_json(t);
  out["rendered"] = render_trace(t);
  return reply(200, out);
}

HttpResponse Service::check_kernel(const Logic& l, const json& req) const {
  EmbedEnv env;
  if (auto prog = optional_string(req, "program")) {
    Program p = read_program(*prog);
    env.sig = std::make_shared<const Trace>(Trace::of_goal(p));
  }
  std::string goal_text = field(req, "goal", json::value_t::string).get<std::string>();
  RelationInstance goal;
  std::vector<ProofNode> script;
  try {
    goal = parse_relation(l, goal_text, env);
  } catch (const LogicError& e) {
    throw RequestError{e.code == "SyntaxError" ? 400 : 422, e.code, {e.what()}};
  }
  if (!goal.closed()) throw RequestError{422, "IllFormedGoal", {"goal " + goal_text + " mentions metavariables"}};
  try {
    script = req.contains("script") ? proof_script_from_json(l, req["script"], env) : std::vector<ProofNode>{};
  } catch (const LogicError& e) {
    throw RequestError{e.code == "SyntaxError" ? 400 : 422, e.code, {e.what()}};
  }
  json out = check_report_to_json(l, check_proof(l, goal, script));
  out["diagnostics"] = json::array();
  return reply(200, out);
}

HttpResponse Service::handle(const HttpRequest& req) const {
  const std::string prefix = "/logics/";
  if (req.path == "/logics") {
    if (req.method != "GET") return failure(405, "MethodNotAllowed", {req.method + " " + req.path});
    return list_logics();
  }
  if (req.path.rfind(prefix, 0) == 0 && req.path.size() > prefix.size()) {
    if (req.method != "GET") return failure(405, "MethodNotAllowed", {req.method + " " + req.path});
    return get_logic(req.path.substr(prefix.size()));
  }
  if (req.path == "/check") {
    if (req.method != "POST") return failure(405, "MethodNotAllowed", {req.method + " " + req.path});
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) return failure(400, "BadRequest", {"body is not valid JSON"});
    return check(body);
  }
  return failure(404, "NotFound", {"no endpoint " + req.path});
}

}  // namespace stepwise
