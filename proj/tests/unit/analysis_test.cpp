#include <doctest.h>

#include <random>

#include "stepwise/analysis.hpp"
#include "support/files.hpp"
#include "support/reference.hpp"

using namespace stepwise;
using stepwise::testing::read_program;
using stepwise::testing::Reference;

namespace {

bool has_code(const std::vector<Violation>& vs, const std::string& code) {
  for (const auto& v : vs)
    if (v.code == code) return true;
  return false;
}

TypeEnv ints(std::initializer_list<const char*> names) {
  TypeEnv env;
  for (auto n : names) env = env.with(n, Type::int_t());
  return env;
}

Verdict decide(std::vector<std::string> guards, const std::string& claim, const TypeEnv& env) {
  std::vector<Expr> gs;
  for (const auto& g : guards) gs.push_back(parse_expr(g));
  return entails(gs, parse_expr(claim), env).verdict;
}

struct Fixture {
  std::shared_ptr<const Program> program;
  SafetyEnv env;

  static Fixture make(const std::string& src) {
    auto p = std::make_shared<const Program>(parse_program(src));
    return {p, SafetyEnv(p, TrustRegistry::initial(*p), global_types(*p))};
  }
  SafetyReport check(const std::string& e, std::vector<std::string> guards = {}) const {
    std::vector<Expr> gs;
    for (const auto& g : guards) gs.push_back(parse_expr(g));
    return is_safe(parse_expr(e), gs, env);
  }
};

const char* kSqrtProgram = R"(a: int = 5
b: int = 3
x: int = 8
y: int = 2
z: int = 1

# pre: x>=0.0
# post: x**0.5
def sqrt(x: float) -> float: ...

# |-

0
)";

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("grammar accepts the recursive power function") {
  CHECK(check_grammar(parse_program(read_program("power.py"))).empty());
  CHECK(check_grammar(parse_program(read_program("power_verify.py"))).empty());
  CHECK(check_grammar(parse_program(read_program("library.py"))).empty());
}

TEST_CASE("grammar rejects duplicate locals and accepts conditional definitions") {
  auto dup = parse_program(R"(def f(n: int) -> int:
    a: int = 1
    a: int = 2
    return a

# |-

f(1)
)");
  auto vs = check_grammar(dup);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].code == "DuplicateDefinition");

  auto conditional = parse_program(R"(def f(c: bool) -> int:
    if c:
        v: int = 1
    else:
        v: int = 2
    return v+1

# |-

f(True)
)");
  CHECK(check_grammar(conditional).empty());

  auto mismatch = parse_program(R"(def f(c: bool) -> int:
    if c:
        v: int = 1
    else:
        w: int = 2
    return 0

# |-

f(True)
)");
  CHECK(has_code(check_grammar(mismatch), "ConditionalNameMismatch"));
}

TEST_CASE("grammar reports scope violations") {
  auto shadow = parse_program(R"(n = 3

def f(n: int) -> int:
    return n

# |-

f(n)
)");
  CHECK(has_code(check_grammar(shadow), "ShadowsGlobal"));

  auto undefined = parse_program(R"(a = b+1
b = 2

# |-

a
)");
  CHECK(has_code(check_grammar(undefined), "UndefinedName"));

  auto missing = parse_program(R"(def f(n: int) -> int:
    if n>0:
        return 1
    else:
        return 2
    return 3

# |-

f(1)
)");
  CHECK(has_code(check_grammar(missing), "UnreachableCode"));

  auto block_scope = parse_program(R"(def f(n: int) -> int:
    if n>0:
        t: int = 1
        return t
    else:
        return t

# |-

f(1)
)");
  CHECK(has_code(check_grammar(block_scope), "UndefinedName"));

  auto no_module = parse_program(R"(import os

# |-

1
)");
  CHECK(has_code(check_grammar(no_module), "UnknownModule"));
}

TEST_CASE("type checking") {
  auto bad = parse_program(R"(x: str = 'a'
y: bool = True

# |-

x+y
)");
  auto r = type_check(bad);
  CHECK_FALSE(r.ok());
  CHECK(has_code(r.violations, "TypeError"));
  CHECK_THROWS_AS(infer_type(parse_expr("x+y"), global_types(bad)), TypeError);

  auto arith = type_check(parse_program("# |-\n\n2*14+2*7\n"));
  REQUIRE(arith.goal_type);
  CHECK(*arith.goal_type == Type::int_t());

  auto lib = type_check(parse_program(read_program("library.py")));
  CHECK(lib.ok());
  REQUIRE(lib.goal_type);
  CHECK(*lib.goal_type == Type::float_t());

  auto eq = type_check(parse_program("# |-\n\n1==1.0\n"));
  CHECK_FALSE(eq.ok());

  auto spec = type_check(parse_program(R"(# pre: e
# post: b**e
def power(b: float, e: int) -> float:
    return b if e==1 else b*power(b, e-1)

# |-

power(2.0, 3)
)"));
  CHECK(has_code(spec.violations, "SpecTypeError"));

  CHECK(type_check(parse_program(read_program("power_verify.py"))).ok());
}

TEST_CASE("entailment examples") {
  auto env = ints({"y"});
  CHECK(decide({"y>0", "not (y==1)"}, "y>1", env) == Verdict::Proved);
  CHECK(decide({}, "y>y-1", env) == Verdict::Proved);
  CHECK(decide({"y>0"}, "y>1", env) == Verdict::Unknown);
  // y=1 satisfies the guard and falsifies the claim; y=2 the reverse.
  bool witness_false = false, witness_true = false;
  for (int64_t y = -3; y <= 3; ++y) {
    if (!(y > 0)) continue;
    witness_false |= !(y > 1);
    witness_true |= y > 1;
  }
  CHECK(witness_false);
  CHECK(witness_true);

  CHECK(decide({}, "y>y+1", env) == Verdict::Refuted);
  CHECK(decide({"y>0", "y!=1"}, "y-1>0 and y>1 and y>y-1", env) == Verdict::Proved);
  CHECK(decide({"y>0"}, "y==1 or y>=2", env) == Verdict::Proved);
  CHECK(decide({"2*y==7"}, "y>100", env) == Verdict::Proved);
  CHECK(decide({"y>=1", "y<=1"}, "y==1", env) == Verdict::Proved);
  // Opaque atoms match syntactically.
  CHECK(decide({"y//2>3"}, "3<y//2", env) == Verdict::Proved);
  CHECK(decide({"float.is_integer(q)"}, "float.is_integer(q)", env) == Verdict::Proved);
  CHECK(decide({}, "float.is_integer(q)", env) == Verdict::Unknown);
  // Conditionals inside comparisons.
  CHECK(decide({}, "(y if y>0 else -y)>=0", env) == Verdict::Proved);
  // Ground claims are evaluated.
  CHECK(decide({}, "2**3==8", env) == Verdict::Proved);
  CHECK(decide({}, "float(2)>=0.0", env) == Verdict::Proved);
  CHECK(decide({"y>0"}, "float(y)>=0.0", env) == Verdict::Proved);
}

TEST_CASE("entailment is sound on a bounding box") {
  std::mt19937 rng(7);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const char* vars[] = {"x", "y", "z"};
  const char* ops[] = {"<", "<=", ">", ">=", "==", "!="};
  auto term = [&]() {
    std::string t;
    for (int k = 0, n = pick(1, 2); k < n; ++k) {
      int c = pick(-3, 3);
      if (c == 0) c = 1;
      if (!t.empty()) t += "+";
      t += "(" + std::to_string(c) + ")*" + vars[pick(0, 2)];
    }
    return t + "+(" + std::to_string(pick(-5, 5)) + ")";
  };
  auto atom = [&]() {
    std::string a = term() + ops[pick(0, 5)] + std::to_string(pick(-4, 4));
    if (pick(0, 4) == 0) a = "not (" + a + ")";
    return a;
  };
  auto formula = [&]() {
    std::string f = atom();
    if (pick(0, 2) == 0) f = "(" + f + (pick(0, 1) ? " or " : " and ") + atom() + ")";
    return f;
  };
  auto env = ints({"x", "y", "z"});
  Program empty = parse_program("# |-\n\n0\n");
  int decided = 0;
  for (int round = 0; round < 160; ++round) {
    std::vector<Expr> guards;
    for (int k = 0, n = pick(0, 3); k < n; ++k) guards.push_back(parse_expr(formula()));
    Expr claim = parse_expr(formula());
    Verdict v = entails(guards, claim, env).verdict;
    if (v == Verdict::Unknown) continue;
    ++decided;
    Reference ref(empty);
    bool counterexample = false;
    for (int64_t x = -8; x <= 8 && !counterexample; ++x)
      for (int64_t y = -8; y <= 8 && !counterexample; ++y)
        for (int64_t z = -8; z <= 8 && !counterexample; ++z) {
          std::map<std::string, Expr> val{{"x", Expr::int_lit(x)}, {"y", Expr::int_lit(y)}, {"z", Expr::int_lit(z)}};
          bool in = true;
          for (const auto& g : guards) in = in && ref.eval_closed(g, val).is_bool(true);
          if (!in) continue;
          bool c = ref.eval_closed(claim, val).is_bool(true);
          counterexample = (v == Verdict::Proved) ? !c : c;
        }
    INFO("guards/claim: " << print_expr(claim));
    CHECK_FALSE(counterexample);
  }
  CHECK(decided > 20);
}

TEST_CASE("forced values") {
  auto env = ints({"y", "a"});
  auto fv = forced_value({parse_expr("y>0"), parse_expr("y<2")}, "y", env);
  REQUIRE(fv);
  CHECK(print_expr(*fv) == "1");
  fv = forced_value({parse_expr("y==a+1")}, "y", env);
  REQUIRE(fv);
  CHECK(print_expr(*fv) == "a+1");
  CHECK_FALSE(forced_value({parse_expr("y>0")}, "y", env));
}

TEST_CASE("safety examples") {
  auto fx = Fixture::make(kSqrtProgram);
  auto r = fx.check("2*sqrt(a-b)");
  CHECK_FALSE(r.safe);
  CHECK(r.reason == UnsafeReason::UnprovablePrecondition);
  CHECK(r.path == Path{1});

  CHECK(fx.check("2*(sqrt(a-b) if a>b else sqrt(b-a))").safe);
  CHECK(fx.check("sqrt(a-b)", {"a>=b"}).safe);

  CHECK(fx.check("y>0 and x/y>z").safe);
  auto wrong = fx.check("x/y>z and y>0");
  CHECK_FALSE(wrong.safe);
  CHECK(wrong.reason == UnsafeReason::UnprovablePrecondition);
  CHECK(fx.check("y==0 or x//y>z").safe);

  auto untrusted = Fixture::make(R"(def f(n: int) -> int:
    return n

# |-

f(1)
)");
  auto u = untrusted.check("1+f(2)");
  CHECK_FALSE(u.safe);
  CHECK(u.reason == UnsafeReason::UntrustedCallee);
  CHECK(u.path == Path{1});

  auto bad_var = Fixture::make(R"(d = 0
q = 1//d

# |-

q
)");
  auto v = bad_var.check("q+1");
  CHECK_FALSE(v.safe);
  CHECK(v.reason == UnsafeReason::UnsafeVariableDefinition);
  CHECK(bad_var.check("d+1").safe);

  CHECK_FALSE(fx.check("ERROR").safe);
  CHECK(fx.check("2**3").safe);
  CHECK_FALSE(fx.check("2**(a-b-3)").safe);
  CHECK(fx.check("2**(a-b-3) if a-b>=3 else 0").safe);
}

TEST_CASE("library preconditions with literal arguments") {
  auto p = std::make_shared<const Program>(parse_program(read_program("library.py")));
  SafetyEnv env(p, TrustRegistry::initial(*p), global_types(*p));
  CHECK(is_safe(parse_expr("math.pow(5.0, 2.0)"), {}, env).safe);
  CHECK(is_safe(parse_expr("math.pow(5, 2)"), {}, env).safe);
  CHECK_FALSE(is_safe(parse_expr("math.pow(-1.0, 0.5)"), {}, env).safe);
  CHECK_FALSE(is_safe(parse_expr("math.pow(a, b)"), {}, env).safe);
  CHECK(is_safe(parse_expr("math.sqrt(4.0)"), {}, env).safe);
  const TrustEntry* pw = env.registry().find("math.pow");
  REQUIRE(pw);
  CHECK(pw->provenance == Provenance::Builtin);
  auto widened = env.widen_args(*pw, {parse_expr("5"), parse_expr("b")});
  CHECK(print_expr(widened[0]) == "5.0");
  CHECK(print_expr(widened[1]) == "float(b)");
}

TEST_CASE("safety is monotone in the registry") {
  auto fx = Fixture::make(R"(x: int = 4
y: int = 2

def f(n: int) -> int:
    return n+1

def g(n: int) -> int:
    return n-1

# |-

0
)");
  FunctionSpec fs{"f", {{"n", Type::int_t()}}, Type::int_t(), parse_expr("n>0"), parse_expr("n+1"), {}, {}};
  TrustRegistry bigger = fx.env.registry().with({fs, Provenance::Verified});
  SafetyEnv env2(fx.program, bigger, fx.env.types());
  std::mt19937 rng(11);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  std::function<std::string(int)> gen = [&](int d) -> std::string {
    if (d == 0 || pick(3) == 0) {
      const char* leaves[] = {"x", "y", "1", "0", "-2"};
      return leaves[pick(5)];
    }
    switch (pick(6)) {
      case 0: return "(" + gen(d - 1) + "+" + gen(d - 1) + ")";
      case 1: return "(" + gen(d - 1) + "//" + gen(d - 1) + ")";
      case 2: return "f(" + gen(d - 1) + ")";
      case 3: return "g(" + gen(d - 1) + ")";
      case 4: return "(" + gen(d - 1) + " if " + gen(d - 1) + ">0 else " + gen(d - 1) + ")";
      default: return "(" + gen(d - 1) + "*" + gen(d - 1) + ")";
    }
  };
  int flips_to_safe = 0;
  for (int i = 0; i < 300; ++i) {
    Expr e = parse_expr(gen(4));
    bool before = fx.env.check(e, {}).safe;
    bool after = env2.check(e, {}).safe;
    INFO(print_expr(e));
    if (before) CHECK(after);
    flips_to_safe += (!before && after) ? 1 : 0;
  }
  CHECK(flips_to_safe > 0);
}

TEST_CASE("guards in force hold wherever evaluation reaches") {
  std::mt19937 rng(3);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
  std::function<std::string(int)> num;
  std::function<std::string(int)> boolean = [&](int d) -> std::string {
    if (d == 0) return num(0) + (pick(2) ? ">" : "==") + num(0);
    switch (pick(4)) {
      case 0: return "(" + boolean(d - 1) + " and " + boolean(d - 1) + ")";
      case 1: return "(" + boolean(d - 1) + " or " + boolean(d - 1) + ")";
      case 2: return "not " + boolean(d - 1);
      default: return num(d - 1) + "<=" + num(d - 1);
    }
  };
  num = [&](int d) -> std::string {
    if (d == 0 || pick(3) == 0) {
      const char* leaves[] = {"x", "y", "1", "0", "2"};
      return leaves[pick(5)];
    }
    switch (pick(5)) {
      case 0: return "(" + num(d - 1) + "-" + num(d - 1) + ")";
      case 1: return "(" + num(d - 1) + " if " + boolean(d - 1) + " else " + num(d - 1) + ")";
      case 2: return "(lambda w: " + num(d - 1) + ")(" + num(d - 1) + ")";
      case 3: return "(" + num(d - 1) + "//" + num(d - 1) + ")";
      default: return "(" + num(d - 1) + "*" + num(d - 1) + ")";
    }
  };
  Program empty = parse_program("# |-\n\n0\n");
  long checked = 0;
  for (int i = 0; i < 150; ++i) {
    Expr e = parse_expr(num(4));
    for (int64_t x = -3; x <= 3; ++x)
      for (int64_t y = -3; y <= 3; ++y) {
        std::map<std::string, Expr> val{{"x", Expr::int_lit(x)}, {"y", Expr::int_lit(y)}};
        std::vector<Path> visited;
        Reference ref(empty);
        ref.on_visit = [&](const Path& p) { visited.push_back(p); };
        ref.eval_closed(e, val);
        for (const auto& p : visited) {
          Position pos = position_at(e, p);
          Reference check(empty);
          for (const auto& g : pos.guards) {
            INFO(print_expr(e) << " at " << path_text(p) << " guard " << print_expr(g));
            CHECK(check.eval_closed(g, val).is_bool(true));
            ++checked;
          }
        }
      }
  }
  CHECK(checked > 1000);
}

TEST_CASE("position_at tracks guards and binders") {
  Expr e = parse_expr("(a if c else (lambda c: c+1)(b)) and d");
  auto pos = position_at(e, {0, 0});
  REQUIRE(pos.guards.size() == 1);
  CHECK(print_expr(pos.guards[0]) == "c");
  pos = position_at(e, {0, 2, 0, 0});
  CHECK(pos.guards.empty());
  CHECK(pos.bound.count("c"));
  pos = position_at(e, {1});
  REQUIRE(pos.guards.size() == 1);
  CHECK_THROWS_AS(position_at(e, {5}), InvalidPath);
}

TEST_CASE("statement bodies normalize with safe locals") {
  auto p = std::make_shared<const Program>(parse_program(R"(def f(n: int) -> float:
    t: float = 1/n
    return t

def g(n: int) -> float:
    if n!=0:
        t: float = 1/n
    else:
        t: float = 0.0
    return t*2

# |-

g(2)
)"));
  SafetyEnv env(p, TrustRegistry::initial(*p), global_types(*p));
  CHECK_THROWS_AS(normalize_to_expression(*p->find_func("f"), env), UnsafeLocalError);
  CHECK(print_expr(normalize_to_expression(*p->find_func("f"), env, {parse_expr("2")})) == "1/2");
  try {
    normalize_to_expression(*p->find_func("f"), env, {parse_expr("0")});
    FAIL("expected UnsafeLocalError");
  } catch (const UnsafeLocalError& e) {
    CHECK(e.local == "t");
    CHECK(e.report.reason == UnsafeReason::UnprovablePrecondition);
  }
  Expr g = normalize_to_expression(*p->find_func("g"), env);
  CHECK(print_expr(g) == "(1/n if n!=0 else 0.0)*2");
}

TEST_CASE("trust registry is copy on extend") {
  auto p = parse_program(read_program("power_verify.py"));
  TrustRegistry r0 = TrustRegistry::initial(p);
  CHECK(r0.trusted("math.pow"));
  CHECK_FALSE(r0.trusted("power"));
  FunctionSpec s{"power", p.find_func("power")->params, Type::float_t(), parse_expr("e>0"), parse_expr("b**e"),
                 parse_expr("e"), 1};
  TrustRegistry r1 = r0.with({s, Provenance::Verified});
  CHECK(r1.trusted("power"));
  CHECK_FALSE(r0.trusted("power"));
  CHECK_FALSE(r0 == r1);
  CHECK(r1.find("power")->provenance == Provenance::Verified);
}

}
