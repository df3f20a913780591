// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include "snm/internal.hpp"

namespace stepwise {

ScriptError::ScriptError(int l, const std::string& msg)
    : std::runtime_error("script line " + std::to_string(l) + ": " + msg), line(l) {}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Path parse_path(const std::string& s, int line) {
  Path p;
  if (s.empty() || s == "root") return p;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, '.')) {
    try {
      std::size_t used = 0;
      long v = std::stol(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      p.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ScriptError(line, "bad path " + s);
    }
  }
  return p;
}

// Splits on ';' outside string literals.
std::vector<std::string> fields(const std::string& s) {
  std::vector<std::string> out(1);
  char quote = 0;
  for (char c : s) {
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == ';') {
      out.emplace_back();
      continue;
    }
    out.back() += c;
  }
  return out;
}

}  // namespace

std::vector<ScriptStep> parse_script(const std::string& text) {
  std::vector<ScriptStep> out;
  std::stringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string l = trim(raw);
    if (l.empty() || l[0] == '#') continue;
    auto parts = fields(l);
    ScriptStep s;
    s.line = line;
    s.rule = trim(parts[0]);
    if (!find_rule(s.rule)) throw ScriptError(line, "unknown rule " + s.rule);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      std::string f = trim(parts[i]);
      if (f.empty()) continue;
      auto eq = f.find('=');
      // A bare word is a flag, e.g. `remove`.
      std::string key = trim(f.substr(0, eq));
      std::string value = eq == std::string::npos ? "true" : trim(f.substr(eq + 1));
      if (key == "at") s.at = value;
      else if (key == "path") s.path = parse_path(value, line);
      else s.params[key] = value;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string print_script_step(const ScriptStep& s) {
  std::string out = s.rule;
  if (s.at) out += "; at=" + *s.at;
  if (s.path) {
    std::string p;
    for (std::size_t i = 0; i < s.path->size(); ++i) p += (i ? "." : "") + std::to_string((*s.path)[i]);
    out += "; path=" + (p.empty() ? std::string("root") : p);
  }
  for (const auto& [k, v] : s.params) out += "; " + k + "=" + v;
  return out;
}

RuleApplication resolve_step(const Trace& t, const ScriptStep& s) {
  RuleApplication app{s.rule, {}, s.params};
  if (s.path) {
    app.target = *s.path;
    return app;
  }
  std::optional<Expr> want;
  if (s.at) {
    try {
      want = parse_expr(*s.at);
    } catch (const std::exception& e) {
      throw ScriptError(s.line, "cannot parse at=" + *s.at + ": " + e.what());
    }
  }
  // The first matching position where the rule applies; failing that, the
  // first match, so the rule reports why it does not apply.
  std::optional<Path> first;
  for (const auto& [path, sub] : subterms(t.current())) {
    if (want && !(sub == *want)) continue;
    if (!first) first = path;
    app.target = path;
    try {
      compute_step(t, app);
      return app;
    } catch (const RuleNotApplicable&) {
    }
  }
  if (!first) throw ScriptError(s.line, s.at ? "no sub-expression " + *s.at : "nothing to apply " + s.rule + " to");
  app.target = *first;
  return app;
}

ReplayResult replay_script(const Trace& t, const std::vector<ScriptStep>& script) {
  ReplayResult r{t, std::nullopt, ""};
  for (std::size_t i = 0; i < script.size(); ++i) {
    try {
      RuleApplication app = resolve_step(r.trace, script[i]);
      Step s = compute_step(r.trace, app);
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
