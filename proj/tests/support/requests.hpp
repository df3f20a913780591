// Requests shared by the service tests and the acceptance run.
#pragma once

#include <string>
#include <vector>

#include "stepwise/service.hpp"
#include "support/files.hpp"

namespace stepwise::testing {

using nlohmann::json;

inline json even_check(const std::string& goal, std::vector<std::string> rules) {
  json script = json::array();
  for (const auto& r : rules) script.push_back({{"rule", r}});
  return {{"schema", 1}, {"logic", "even"}, {"goal", goal}, {"script", script}};
}

inline json snm_check(const std::string& program, const std::string& script) {
  json j{{"schema", 1}, {"logic", "snm"}, {"program", read_program(program)}};
  if (!script.empty()) j["script"] = read_file(source_path("tests/data/" + script));
  return j;
}

// A mixed batch: listings, kernel and snm checks, verification and failures.
inline std::vector<HttpRequest> mixed_requests() {
  std::vector<HttpRequest> out;
  auto add_post = [&](const json& j) { out.push_back({"POST", "/check", j.dump()}); };
  for (int round = 0; round < 3; ++round) {
    out.push_back({"GET", "/logics", ""});
    out.push_back({"GET", "/logics/even", ""});
    out.push_back({"GET", "/logics/snm", ""});
    out.push_back({"GET", "/logics/nothing", ""});
    add_post(even_check("even(" + std::to_string(2 * round + 2) + ")",
                        std::vector<std::string>(round + 1, "even-nonzero")));
    add_post(even_check("even(4)", {"even-nonzero", "even-nonzero", "even-zero"}));
    add_post(even_check("even(3)", {"even-nonzero", "even-zero"}));
    add_post(even_check("even(4)", {"even-zero"}));
    add_post(snm_check("arith.py", "arith-by-name.script"));
    add_post(snm_check("arith.py", "arith-reordered.script"));
    add_post(snm_check("power.py", ""));
    add_post(snm_check("pow_error.py", ""));
    add_post({{"schema", 1}, {"logic", "snm"}, {"program", read_program("power_verify.py")}, {"verify", "power"},
              {"script", read_file(source_path("tests/data/power-verify.script"))}});
    add_post({{"schema", 1}, {"logic", "even"}, {"goal", "even(p)"}});
    add_post({{"schema", 2}, {"logic", "even"}, {"goal", "even(0)"}});
    out.push_back({"POST", "/check", "{not json"});
  }
  add_post({{"schema", 1}, {"logic", "snm-bridge"}, {"goal", "Step(sig, `1 + (0 if True else 100)`, `1 + 0`)"},
            {"script", json::array({{{"rule", "if-true-ctx"}}})}});
  add_post({{"schema", 1}, {"logic", "first-order"}, {"goal", "IsIn(x, q, [x:p])"},
            {"script", json::array({{{"rule", "!ctx-lookup"}}})}});
  return out;
}

}  // namespace stepwise::testing
