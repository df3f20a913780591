// The traces behind tests/golden, built through the library.
#pragma once

#include <string>
#include <vector>

#include "stepwise/verify.hpp"
#include "support/files.hpp"

namespace stepwise::testing {

struct Sample {
  const char* name;     // golden file stem
  const char* program;  // under programs/
  const char* script;   // under tests/data, empty for an ltr auto run
  const char* symbolic; // NAME:TYPE held symbolic, or empty
  const char* final;    // expected last expression
  std::size_t steps;
};

inline const std::vector<Sample>& samples() {
  static const std::vector<Sample> all = {
      {"arith-by-name", "arith.py", "arith-by-name.script", "", "42", 4},
      {"arith-reordered", "arith.py", "arith-reordered.script", "", "42", 5},
      {"punct", "punct.py", "punct.script", "", "'What is it?'", 5},
      {"pow-spec", "library.py", "pow-spec.script", "", "42.0", 6},
      {"pow-spec-late", "library.py", "pow-spec-late.script", "", "42.0", 6},
      {"power-run", "power.py", "", "", "25", 11},
      {"power-symbolic", "power.py", "power-symbolic.script", "x:float", "x**2", 8},
  };
  return all;
}

inline Trace sample_start(const Sample& f) {
  Trace t = Trace::of_goal(parse_program(read_program(f.program)));
  std::string sym = f.symbolic;
  if (!sym.empty()) {
    auto colon = sym.find(':');
    t = t.with_symbolic(sym.substr(0, colon), parse_type(sym.substr(colon + 1)));
  }
  return t;
}

// Replays the sample's script, or auto-runs ltr when it has none.
inline ReplayResult sample_trace(const Sample& f) {
  Trace t = sample_start(f);
  std::string script = f.script;
  if (script.empty()) return {run_to_value(t, Strategy::LtrApplicative).trace, std::nullopt, ""};
  return replay_script(t, parse_script(read_file(source_path("tests/data/" + script))));
}

inline std::string golden(const std::string& name) { return read_file(source_path("tests/golden/" + name + ".txt")); }

// Verification of power with the scripted discharge.
inline VerifyReport power_verification() {
  Program p = parse_program(read_program("power_verify.py"));
  return verify_function(p, "power", parse_script(read_file(source_path("tests/data/power-verify.script"))));
}

}  // namespace stepwise::testing
