#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stepwise/cli.hpp"
#include "support/samples.hpp"

using namespace stepwise;
using stepwise::testing::source_path;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string program(const std::string& name) { return source_path("programs/" + name); }
std::string data(const std::string& name) { return source_path("tests/data/" + name); }

std::string temp_file(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / ("stepwise-cli-" + name);
  std::ofstream(path) << text;
  return path.string();
}

// Sets an environment variable for the lifetime of the guard.
struct EnvGuard {
  std::string name;
  EnvGuard(std::string n, const std::string& v) : name(std::move(n)) { setenv(name.c_str(), v.c_str(), 1); }
  ~EnvGuard() { unsetenv(name.c_str()); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("result categories map to exit codes") {
  CHECK(exit_code(ResultCategory::Ok) == 0);
  CHECK(exit_code(ResultCategory::Diagnostics) == 1);
  CHECK(exit_code(ResultCategory::ErrorResult) == 2);
  CHECK(exit_code(ResultCategory::Stuck) == 3);
  CHECK(exit_code(ResultCategory::NotDischarged) == 4);
  CHECK(category_of(Outcome::Value) == ResultCategory::Ok);
  CHECK(category_of(Outcome::StuckSymbolic) == ResultCategory::Ok);
  CHECK(category_of(Outcome::Error) == ResultCategory::ErrorResult);
  CHECK(category_of(Outcome::Stuck) == ResultCategory::Stuck);
  CHECK(category_of(Outcome::StepLimit) == ResultCategory::Stuck);
}

TEST_CASE("trace output matches the golden files") {
  for (const auto& f : testing::samples()) {
    INFO(f.name);
    std::vector<std::string> args{"trace", program(f.program)};
    if (*f.script) args.insert(args.end(), {"--script", data(f.script)});
    if (*f.symbolic) args.insert(args.end(), {"--symbolic", f.symbolic});
    Run r = run(args);
    CHECK(r.code == 0);
    CHECK(r.out == testing::golden(f.name));
  }
  Run verified = run({"verify", program("power_verify.py"), "power", data("power-verify.script")});
  CHECK(verified.code == 0);
  CHECK(verified.out == testing::golden("power-verify"));
}

TEST_CASE("trace exit codes") {
  CHECK(run({"trace", program("pow_error.py")}).code == 2);
  CHECK(run({"trace", program("arith.py"), "--step-limit", "2"}).code == 3);
  CHECK(run({"trace", program("arith.py"), "--script", temp_file("bad.script", "if-true\n")}).code == 1);
  CHECK(run({"trace", program("arith.py"), "--script", temp_file("part.script", "name-to-def; at=x\n")}).code == 3);
  CHECK(run({"trace", source_path("programs/missing.py")}).code == 1);
  CHECK(run({"trace", temp_file("ill.py", "x: int = 'a'\n\n# |-\n\nx\n")}).code == 1);
  CHECK(run({"trace", program("arith.py"), "--strategy", "sideways"}).code == 1);
  CHECK(run({}).code == 1);

  Run s = run({"trace", program("arith.py"), "--format", "structured"});
  CHECK(s.code == 0);
  auto j = nlohmann::json::parse(s.out);
  CHECK(j["final"] == "42");
}

TEST_CASE("verify exit codes") {
  Run empty = run({"verify", program("power_verify.py"), "power", temp_file("empty.script", "")});
  CHECK(empty.code == 4);
  CHECK(empty.out.find("not discharged") != std::string::npos);
  CHECK(empty.out.find("differs: at [0]: power(x, y) vs x**y") != std::string::npos);
  CHECK(run({"verify", program("power_verify.py"), "nothing"}).code == 1);
}

TEST_CASE("check and rules") {
  std::string logics = source_path("logics");
  std::string proof4 = temp_file("even4.proof", "even-nonzero\neven-nonzero\neven-zero\n");
  Run ok = run({"check", "even", "even(4)", proof4, "--logics", logics});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("valid\n") != std::string::npos);
  Run odd = run({"check", "even", "even(3)", temp_file("even3.proof", "even-nonzero\neven-zero\n"), "--logics", logics});
  CHECK(odd.code == 4);
  CHECK(run({"check", "nope", "x", proof4, "--logics", logics}).code == 1);
  CHECK(run({"check", "even", "even(p)", proof4, "--logics", logics}).code == 1);

  Run if_true_ctx = run({"check", "snm-bridge", "Step(sig, `1 + (0 if True else 100)`, `1 + 0`)",
                   temp_file("if-true.proof", "if-true-ctx\n"), "--program", program("arith.py")});
  CHECK(if_true_ctx.code == 0);

  Run even = run({"rules", "even", "--logics", logics});
  CHECK(even.code == 0);
  CHECK(even.out == "even-zero: / even(0)\neven-nonzero: even(N) / even(S(S(N)))\n");
  Run snm = run({"rules"});
  CHECK(snm.code == 0);
  CHECK(snm.out.find("name-to-def") != std::string::npos);
}

TEST_CASE("environment defaults and overrides") {
  {
    EnvGuard g("STEPWISE_STEP_LIMIT", "2");
    CHECK(run({"trace", program("arith.py")}).code == 3);
    // A flag wins over the environment.
    CHECK(run({"trace", program("arith.py"), "--step-limit", "100"}).code == 0);
  }
  {
    EnvGuard g("STEPWISE_STEP_LIMIT", "lots");
    Run r = run({"trace", program("arith.py")});
    CHECK(r.code == 1);
    CHECK(r.err.find("STEPWISE_STEP_LIMIT") != std::string::npos);
  }
  {
    EnvGuard g("STEPWISE_FORMAT", "structured");
    CHECK(nlohmann::json::parse(run({"trace", program("arith.py")}).out)["final"] == "42");
  }
  {
    EnvGuard g("STEPWISE_STRATEGY", "sideways");
    CHECK(run({"trace", program("arith.py")}).code == 1);
  }
  {
    EnvGuard g("STEPWISE_LOGICS", source_path("logics"));
    CHECK(run({"rules", "first-order"}).code == 0);
  }
}

}  // TEST_SUITE
