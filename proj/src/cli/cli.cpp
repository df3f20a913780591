// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "stepwise/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stepwise/service.hpp"
#include "stepwise/verify.hpp"

#ifndef STEPWISE_LOGIC_DIR
#define STEPWISE_LOGIC_DIR "logics"
#endif

namespace stepwise {

const char* category_name(ResultCategory c) {
  switch (c) {
    case ResultCategory::Ok: return "ok";
    case ResultCategory::Diagnostics: return "diagnostics";
    case ResultCategory::ErrorResult: return "error-result";
    case ResultCategory::Stuck: return "stuck";
    case ResultCategory::NotDischarged: return "not-discharged";
  }
  return "?";
}

int exit_code(ResultCategory c) {
  switch (c) {
    case ResultCategory::Ok: return 0;
    case ResultCategory::Diagnostics: return 1;
    case ResultCategory::ErrorResult: return 2;
    case ResultCategory::Stuck: return 3;
    case ResultCategory::NotDischarged: return 4;
  }
  return 1;
}

ResultCategory category_of(Outcome o) {
  switch (o) {
    case Outcome::Value:
    case Outcome::StuckSymbolic: return ResultCategory::Ok;
    case Outcome::Error: return ResultCategory::ErrorResult;
    case Outcome::Stuck:
    case Outcome::StepLimit: return ResultCategory::Stuck;
  }
  return ResultCategory::Stuck;
}

namespace {

using json = nlohmann::json;

struct Options {
  std::string strategy = "ltr";
  std::size_t step_limit = kDefaultStepLimit;
  bool auto_context = false;
  std::string format = "two-column";
  std::string listen = "127.0.0.1:8080";
  std::string logics = STEPWISE_LOGIC_DIR;

  std::string file, function, script, logic, goal, program;
  std::vector<std::string> symbolic;
};

// Diagnostics become exit code 1 wherever they are thrown.
struct Diagnostic {
  std::string message;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Diagnostic{"cannot read " + path};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Program load_program(const std::string& path) {
  Program p;
  try {
    p = parse_program(slurp(path));
  } catch (const Diagnostic&) {
    throw;
  } catch (const std::exception& e) {
    throw Diagnostic{path + ": " + e.what()};
  }
  auto v = check_program(p);
  if (!v.empty()) {
    std::string msg;
    for (const auto& x : v) msg += path + ":" + std::to_string(x.line) + ": " + x.code + ": " + x.message + "\n";
    msg.pop_back();
    throw Diagnostic{msg};
  }
  return p;
}

std::vector<ScriptStep> load_script(const std::string& path) {
  try {
    return parse_script(slurp(path));
  } catch (const ScriptError& e) {
    throw Diagnostic{path + ":" + std::to_string(e.line) + ": " + e.what()};
  }
}

Strategy strategy_of(const Options& o) {
  auto s = parse_strategy(o.strategy);
  if (!s) throw Diagnostic{"unknown strategy " + o.strategy};
  return *s;
}

bool structured(const Options& o) { return o.format == "structured"; }

// Category of a trace that a script left behind.
ResultCategory classify_final(const Trace& t, Strategy s, std::string& note) {
  const Expr& e = t.current();
  if (is_terminal(e)) return e.is(ExprKind::Error) ? ResultCategory::ErrorResult : ResultCategory::Ok;
  try {
    if (auto next = next_step(t, s)) {
      note = "script ended before a value; next would be " + next->rule;
      return ResultCategory::Stuck;
    }
  } catch (const Stuck& st) {
    note = st.reason;
    return st.symbolic ? ResultCategory::Ok : ResultCategory::Stuck;
  }
  return ResultCategory::Ok;
}

ResultCategory cmd_trace(const Options& o, std::ostream& out, std::ostream& err) {
  Program p = load_program(o.file);
  Strategy strategy = strategy_of(o);
  TraceConfig tc;
  tc.auto_context = o.auto_context;
  Trace t = Trace::of_goal(p, tc);
  for (const auto& s : o.symbolic) {
    auto colon = s.find(':');
    if (colon == std::string::npos) throw Diagnostic{"--symbolic expects NAME:TYPE, got " + s};
    try {
      t = t.with_symbolic(s.substr(0, colon), parse_type(s.substr(colon + 1)));
    } catch (const std::exception& e) {
      throw Diagnostic{s + ": " + e.what()};
    }
  }

  ResultCategory cat;
  json summary;
  std::string note;
  if (!o.script.empty()) {
    ReplayResult rr = replay_script(t, load_script(o.script));
    t = rr.trace;
    if (rr.failed_step) {
      cat = ResultCategory::Diagnostics;
      note = "step " + std::to_string(*rr.failed_step) + ": " + rr.error;
      summary["failed_step"] = *rr.failed_step;
    } else {
      cat = classify_final(t, strategy, note);
    }
  } else {
    try {
      RunResult run = run_to_value(t, strategy, o.step_limit);
      t = run.trace;
      cat = category_of(run.outcome);
      summary["outcome"] = outcome_name(run.outcome);
      note = run.reason;
    } catch (const StepLimitExceeded& e) {
      t = *e.partial;
      cat = ResultCategory::Stuck;
      summary["outcome"] = outcome_name(Outcome::StepLimit);
      note = e.what();
    }
  }

  if (structured(o)) {
    summary["trace"] = trace_to_json(t);
    summary["final"] = print_expr(t.current());
    summary["category"] = category_name(cat);
    if (!note.empty()) summary["reason"] = note;
    out << summary.dump(2) << "\n";
  } else {
    out << render_trace(t);
  }
  if (!note.empty()) err << category_name(cat) << ": " << note << "\n";
  return cat;
}

ResultCategory cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  Program p = load_program(o.file);
  TraceConfig tc;
  tc.auto_context = o.auto_context;
  std::optional<std::vector<ScriptStep>> script;
  if (!o.script.empty()) script = load_script(o.script);
  std::optional<VerifyReport> report;
  try {
    report = verify_function(p, o.function, script, strategy_of(o), o.step_limit, tc);
  } catch (const VerificationError& e) {
    throw Diagnostic{e.code + ": " + e.what()};
  }
  const VerifyReport& r = *report;
  ResultCategory cat = r.discharged() ? ResultCategory::Ok : ResultCategory::NotDischarged;
  if (structured(o)) {
    out << report_to_json(r).dump(2) << "\n";
  } else {
    out << render_trace(r.trace);
    for (const auto& c : r.conjuncts)
      out << "conjunct " << print_expr(c.conjunct) << ": " << verdict_name(c.verdict) << " (step " << c.step << ")\n";
    if (r.discharged()) {
      out << "Q.E.D.\n";
    } else {
      out << "not discharged\n";
      out << "  reached: " << print_expr(r.trace.current()) << "\n";
      out << "  target:  " << print_expr(r.obligation.target) << "\n";
      if (!r.diff.empty()) out << "  differs: " << r.diff << "\n";
    }
  }
  if (r.failed_step) err << "step " << *r.failed_step << ": " << r.error << "\n";
  return cat;
}

const Logic& find_logic(const std::map<std::string, Logic>& logics, const std::string& name) {
  auto it = logics.find(name);
  if (it == logics.end()) {
    std::string known;
    for (const auto& [n, l] : logics) known += " " + n;
    throw Diagnostic{"unknown logic " + name + " (known:" + known + ")"};
  }
  return it->second;
}

std::map<std::string, Logic> load_all(const Options& o) {
  try {
    return load_logics(o.logics);
  } catch (const LogicError& e) {
    throw Diagnostic{o.logics + ":" + std::to_string(e.line) + ": " + e.code + ": " + e.what()};
  } catch (const std::exception& e) {
    throw Diagnostic{o.logics + ": " + e.what()};
  }
}

std::string goals_text(const Logic& l, const ProofState& s) {
  if (s.goals.empty()) return "(none)";
  std::string out;
  for (std::size_t i = 0; i < s.goals.size(); ++i) {
    if (i) out += ", ";
    out += print_relation(l, s.goals[i].rel);
  }
  return out;
}

ResultCategory cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
  auto logics = load_all(o);
  const Logic& l = find_logic(logics, o.logic);
  EmbedEnv env;
  if (!o.program.empty()) env.sig = std::make_shared<const Trace>(Trace::of_goal(load_program(o.program)));
  RelationInstance goal;
  std::vector<ProofNode> script;
  try {
    goal = parse_relation(l, o.goal, env);
    script = parse_proof_script(l, slurp(o.script), env);
  } catch (const LogicError& e) {
    throw Diagnostic{e.code + ": " + e.what()};
  }
  CheckReport r;
  try {
    r = check_proof(l, goal, script);
  } catch (const ProofError& e) {
    throw Diagnostic{e.code + ": " + e.what()};
  }
  if (structured(o)) {
    out << check_report_to_json(l, r).dump(2) << "\n";
  } else {
    out << "goal: " << print_relation(l, r.goal) << "\n";
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
      const StepReport& s = r.steps[i];
      out << i << ". " << s.node.rule << " @" << s.node.goal << " [" << step_status_name(s.status) << "]\n";
      if (s.status == StepReport::Status::Failed) out << "   " << s.code << ": " << s.message << "\n";
      else if (s.status == StepReport::Status::Ok) out << "   goals: " << goals_text(l, s.after) << "\n";
    }
    if (r.valid) out << "valid\n";
    else out << "invalid; open goals: " << goals_text(l, r.final) << "\n";
  }
  if (r.failed_step) err << "step " << *r.failed_step << " failed\n";
  return r.valid ? ResultCategory::Ok : ResultCategory::NotDischarged;
}

ResultCategory cmd_rules(const Options& o, std::ostream& out) {
  std::string name = o.logic.empty() ? "snm" : o.logic;
  if (name == "snm") {
    for (const auto& r : rule_catalog()) {
      out << r.id << "  [" << r.family << "]  " << r.summary << "\n";
      for (const auto& p : r.params)
        out << "    " << p.name << (p.required ? "" : "?") << "  " << p.description << "\n";
    }
    return ResultCategory::Ok;
  }
  auto logics = load_all(o);
  const Logic& l = find_logic(logics, name);
  for (const auto& r : l.rules) {
    out << r.name << (r.automatic ? " (auto)" : "") << ": ";
    for (std::size_t i = 0; i < r.premises.size(); ++i) out << (i ? ", " : "") << print_relation(l, r.premises[i]);
    out << (r.premises.empty() ? "" : " ") << "/ " << print_relation(l, r.conclusion) << "\n";
  }
  return ResultCategory::Ok;
}

ResultCategory cmd_serve(const Options& o, std::ostream& out) {
  auto colon = o.listen.rfind(':');
  if (colon == std::string::npos) throw Diagnostic{"--listen expects HOST:PORT, got " + o.listen};
  std::string host = o.listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(o.listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw Diagnostic{"bad port in " + o.listen};
  }
  ServiceConfig cfg;
  cfg.logic_dir = o.logics;
  cfg.step_limit_cap = o.step_limit;
  Service service(cfg, load_all(o));
  Server server(service);
  int bound = server.bind(host, port);
  if (bound < 0) throw Diagnostic{"cannot listen on " + o.listen};
  out << "listening on " << host << ":" << bound << std::endl;
  return server.listen() ? ResultCategory::Ok : ResultCategory::Diagnostics;
}

// CLI11 skips environment values its validators reject; report them instead.
std::optional<std::string> bad_environment() {
  const std::pair<const char*, std::vector<std::string>> choices[] = {
      {"STEPWISE_STRATEGY", {"ltr", "rtl", "normal"}},
      {"STEPWISE_FORMAT", {"two-column", "structured"}},
  };
  for (const auto& [name, allowed] : choices) {
    const char* v = std::getenv(name);
    if (v && *v && std::find(allowed.begin(), allowed.end(), v) == allowed.end())
      return std::string(name) + "=" + v + " is not one of the accepted values";
  }
  if (const char* v = std::getenv("STEPWISE_STEP_LIMIT"); v && *v) {
    char* end = nullptr;
    long long n = std::strtoll(v, &end, 10);
    if (*end || n <= 0) return std::string("STEPWISE_STEP_LIMIT=") + v + " is not a positive number";
  }
  return std::nullopt;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Substitution stepper, verifier and proof checker", "stepwise"};
  app.require_subcommand(1, 1);

  auto common = [&o](CLI::App* c) {
    c->add_option("--strategy", o.strategy, "Auto-step order")
        ->check(CLI::IsMember({"ltr", "rtl", "normal"}))
        ->envname("STEPWISE_STRATEGY");
    c->add_option("--step-limit", o.step_limit, "Steps before giving up")
        ->check(CLI::PositiveNumber)
        ->envname("STEPWISE_STEP_LIMIT");
    c->add_flag("--auto-context", o.auto_context, "Let boolean-arithmetic use the tests in force")->envname("STEPWISE_AUTO_CONTEXT");
    c->add_option("--format", o.format, "Output format")
        ->check(CLI::IsMember({"two-column", "structured"}))
        ->envname("STEPWISE_FORMAT");
  };
  auto logic_dir = [&o](CLI::App* c) {
    c->add_option("--logics", o.logics, "Directory of .logic files")->envname("STEPWISE_LOGICS");
  };

  auto* trace = app.add_subcommand("trace", "Step a program's goal to a value");
  common(trace);
  trace->add_option("file", o.file, "Program file")->required();
  trace->add_option("--script", o.script, "Rule script to replay instead of auto-stepping");
  trace->add_option("--symbolic", o.symbolic, "Hold NAME:TYPE as a symbolic value");

  auto* verify = app.add_subcommand("verify", "Verify a function against its spec");
  common(verify);
  verify->add_option("file", o.file, "Program file")->required();
  verify->add_option("function", o.function, "Function to verify")->required();
  verify->add_option("script", o.script, "Rule script");

  auto* check = app.add_subcommand("check", "Check a proof in a logic");
  common(check);
  logic_dir(check);
  check->add_option("logic", o.logic, "Logic name")->required();
  check->add_option("goal", o.goal, "Goal relation")->required();
  check->add_option("proof", o.script, "Proof script file")->required();
  check->add_option("--program", o.program, "Program whose state `sig` denotes");

  auto* rules = app.add_subcommand("rules", "List the rules of a logic");
  logic_dir(rules);
  rules->add_option("logic", o.logic, "Logic name (default snm)");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  common(serve);
  logic_dir(serve);
  serve->add_option("--listen", o.listen, "HOST:PORT")->envname("STEPWISE_LISTEN");

  if (auto bad = bad_environment()) {
    err << *bad << "\n";
    return exit_code(ResultCategory::Diagnostics);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : exit_code(ResultCategory::Diagnostics);
  }

  try {
    ResultCategory c = ResultCategory::Diagnostics;
    if (*trace) c = cmd_trace(o, out, err);
    else if (*verify) c = cmd_verify(o, out, err);
    else if (*check) c = cmd_check(o, out, err);
    else if (*rules) c = cmd_rules(o, out);
    else if (*serve) c = cmd_serve(o, out);
    return exit_code(c);
  } catch (const Diagnostic& d) {
    err << d.message << "\n";
  } catch (const std::exception& e) {
    err << e.what() << "\n";
  }
  return exit_code(ResultCategory::Diagnostics);
}

}  // namespace stepwise
