#include <doctest.h>

#include <random>

#include "stepwise/verify.hpp"
#include "support/samples.hpp"
#include "support/reference.hpp"

using namespace stepwise;
using stepwise::testing::read_program;

namespace {

std::string power_src() { return read_program("power_verify.py"); }

std::string mutated(const std::string& call) {
  std::string src = power_src();
  auto at = src.find("power(b, e-1)");
  return src.replace(at, 13, call);
}

Trace apply(const Trace& t, const std::string& rule, const std::string& at = "") {
  ScriptStep s{rule, at.empty() ? std::nullopt : std::optional<std::string>(at), std::nullopt, {}, 0};
  return apply_rule(t, resolve_step(t, s));
}

std::vector<std::string> texts(const std::vector<Expr>& es) {
  std::vector<std::string> out;
  for (const auto& e : es) out.push_back(print_expr(e));
  return out;
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("the obligation wraps the call in its precondition") {
  Program p = parse_program(power_src());
  Verification v = begin_verification(p, "power");
  CHECK(print_expr(v.obligation.initial) == "power(x, y) if y>0 else ERROR");
  CHECK(print_expr(v.obligation.target) == "x**y if y>0 else ERROR");
  CHECK(v.obligation.status == Obligation::Status::Open);
  CHECK(v.trace.mode() == Mode::Verification);
  CHECK(texts(v.trace.root_guards()) == std::vector<std::string>{"y>0"});
  CHECK(v.trace.symbolic().count("x"));
}

TEST_CASE("the scripted discharge of power promotes it") {
  VerifyReport r = testing::power_verification();
  REQUIRE(r.discharged());
  CHECK_FALSE(r.failed_step);
  CHECK(print_expr(r.trace.current()) == "x**y if y>0 else ERROR");
  REQUIRE(r.registry);
  const TrustEntry* e = r.registry->find("power");
  REQUIRE(e);
  CHECK(e->provenance == Provenance::Verified);

  REQUIRE(r.conjuncts.size() == 3);
  std::vector<std::string> cs;
  for (const auto& c : r.conjuncts) {
    cs.push_back(print_expr(c.conjunct));
    CHECK(c.verdict == Verdict::Proved);
  }
  CHECK(cs == std::vector<std::string>{"y-1>0", "y>1", "y>y-1"});

  // The conjuncts hold under the tests in force at the self-call.
  const Step& s = r.trace.steps()[r.conjuncts[0].step];
  CHECK(s.app.rule == "name-to-spec-simpler");
  Position pos = position_at(s.before, s.app.target, r.trace.root_guards());
  auto gs = texts(pos.guards);
  CHECK(std::set<std::string>(gs.begin(), gs.end()) == std::set<std::string>{"y>0", "not y==1"});
  for (const auto& c : r.conjuncts) CHECK(entails(pos.guards, c.conjunct, r.trace.types()).verdict == Verdict::Proved);
}

TEST_CASE("mutated self-calls leave a refuted conjunct") {
  struct Case {
    const char* call;
    const char* at;
    const char* refuted;
  };
  for (const Case& c : {Case{"power(b, e)", "power(x, y)", "y>y"}, Case{"power(b, e+1)", "power(x, y+1)", "y>y+1"}}) {
    INFO(c.call);
    Program p = parse_program(mutated(c.call));
    std::string script = std::string("name-to-body; at=power(x, y)\nname-to-spec-simpler; at=") + c.at + "\n";
    VerifyReport r = verify_function(p, "power", parse_script(script));
    CHECK_FALSE(r.discharged());
    CHECK(r.obligation.status == Obligation::Status::Failed);
    CHECK_FALSE(r.diff.empty());
    bool found = false;
    for (const auto& k : r.conjuncts)
      if (print_expr(k.conjunct) == c.refuted) {
        found = true;
        CHECK(k.verdict == Verdict::Refuted);
      }
    CHECK(found);
    // Even the default strategy cannot finish it.
    CHECK_FALSE(verify_function(p, "power", std::nullopt).discharged());
  }
}

TEST_CASE("an empty script leaves the residual") {
  VerifyReport r = verify_function(parse_program(power_src()), "power", std::vector<ScriptStep>{});
  CHECK_FALSE(r.discharged());
  CHECK(r.trace.steps().empty());
  CHECK(r.diff == "at [0]: power(x, y) vs x**y");
  CHECK_THROWS_AS(finish_verification(r.obligation, r.trace), NotDischarged);
}

TEST_CASE("verification errors") {
  auto code_of = [](const std::string& src, const std::string& fn) {
    try {
      begin_verification(parse_program(src), fn);
    } catch (const VerificationError& e) {
      return e.code;
    }
    return std::string("none");
  };
  std::string no_progress = power_src();
  no_progress.erase(no_progress.find("# progress: e\n"), 14);
  no_progress.erase(no_progress.find("# pmin: 1\n"), 10);
  CHECK(code_of(no_progress, "power") == "MissingProgress");
  CHECK(code_of(power_src(), "nothing") == "UnknownFunction");
  CHECK(code_of("# post: n\ndef opaque(n: int) -> int: ...\n\n# |-\n\nopaque(1)\n", "opaque") == "AlreadyTrusted");
  std::string bad_post = power_src();
  bad_post.replace(bad_post.find("# post: b**e"), 12, "# post: b+'s'");
  CHECK(code_of(bad_post, "power") == "SpecTypeError");

  // A non-recursive function needs no progress measure.
  CHECK(code_of("# post: n+1\ndef inc(n: int) -> int:\n    return n+1\n\n# |-\n\ninc(1)\n", "inc") == "none");

  Program p = parse_program(power_src());
  VerifyReport done = testing::power_verification();
  try {
    begin_verification(p, spec_of(*p.find_func("power")), *done.registry);
    FAIL("expected AlreadyTrusted");
  } catch (const VerificationError& e) {
    CHECK(e.code == "AlreadyTrusted");
  }
}

TEST_CASE("name-to-spec-simpler only rewrites self-calls inside the body") {
  Program p = parse_program(power_src());
  Verification v = begin_verification(p, "power");
  // The call being verified is not yet inside the inlined body.
  CHECK_THROWS_AS(apply(v.trace, "name-to-spec-simpler", "power(x, y)"), RuleNotApplicable);

  Program helper = parse_program(R"(def ident(n: float) -> float:
    return n

# pre: e>0
# post: b**e
# progress: e
# pmin: 1
def power(b: float, e: int) -> float:
    return b if e==1 else ident(b)*power(b, e-1)

# |-

power(2.0, 3)
)");
  Verification h = begin_verification(helper, "power");
  Trace body = apply(h.trace, "name-to-body", "power(x, y)");
  CHECK_THROWS_AS(apply(body, "name-to-spec-simpler", "ident(x)"), RuleNotApplicable);
  CHECK_NOTHROW(apply(body, "name-to-spec-simpler", "power(x, y-1)"));
}

TEST_CASE("progress conjuncts") {
  Program p = parse_program(power_src());
  FunctionSpec s = spec_of(*p.find_func("power"));
  auto cs = check_progress(s, {parse_expr("x"), parse_expr("y")}, {parse_expr("x"), parse_expr("y-1")});
  CHECK(texts(cs) == std::vector<std::string>{"y>1", "y>y-1"});
}

TEST_CASE("a verified function runs through its spec") {
  VerifyReport r = testing::power_verification();
  REQUIRE(r.registry);
  auto prog = std::make_shared<const Program>(parse_program(power_src()));
  Trace t(prog, *r.registry, parse_expr("power(7, 2)"));
  Trace spec = apply(t, "name-to-spec", "power(7, 2)");
  Trace ready = apply(spec, "arithmetic");
  CHECK(print_expr(ready.current()) == "49 if True else ERROR");
  CHECK(print_expr(apply(ready, "if-true").current()) == "49");
  // The oracle: 7**2.
  CHECK(7 * 7 == 49);
}

TEST_CASE("promotion is idempotent") {
  VerifyReport r = testing::power_verification();
  REQUIRE(r.registry);
  TrustRegistry again = r.registry->with(*r.registry->find("power"));
  CHECK(again == *r.registry);
  TrustRegistry twice = finish_verification(r.obligation, r.trace);
  CHECK(twice == *r.registry);
}

TEST_CASE("verified specs agree with execution on ground inputs") {
  VerifyReport r = testing::power_verification();
  REQUIRE(r.discharged());
  Program p = parse_program(power_src());
  const FunctionSpec& spec = r.registry->find("power")->spec;
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> base(-6, 6), expo(1, 7);
  int probes = 0;
  while (probes < 200) {
    double b = base(rng) / 2.0;
    int64_t e = expo(rng);
    std::map<std::string, Expr> args{{"b", Expr::float_lit(b)}, {"e", Expr::int_lit(e)}};
    testing::Reference ref(p);
    if (!ref.eval_closed(spec.pre, args).is_bool(true)) continue;
    Expr call = Expr::call(Expr::var("power"), {Expr::float_lit(b), Expr::int_lit(e)});
    Expr ran = ref.eval_closed(call, {});
    Expr claimed = ref.eval_closed(spec.post, args);
    INFO(b << " ** " << e);
    CHECK(print_expr(ran) == print_expr(claimed));
    ++probes;
  }
}

TEST_CASE("reports serialize") {
  VerifyReport r = testing::power_verification();
  nlohmann::json j = report_to_json(r);
  CHECK(j["status"] == "discharged");
  CHECK(j["conjuncts"].size() == 3);
  CHECK(j["trace"]["steps"].size() == r.trace.steps().size());
}

}  // TEST_SUITE
