#include <doctest.h>

#include <fstream>
#include <sstream>

#include "stepwise/program.hpp"
#include "stepwise/serialize.hpp"
#include "support/random_expr.hpp"
#include "support/files.hpp"

using namespace stepwise;

TEST_SUITE("syntax") {

TEST_CASE("parses the three-definition arithmetic program") {
  Program p = parse_program(testing::read_program("arith.py"));
  REQUIRE(p.defs.size() == 3);
  CHECK(std::get<VarDef>(p.defs[0]).name == "a");
  CHECK(std::get<VarDef>(p.defs[2]).name == "x");
  CHECK(print_expr(std::get<VarDef>(p.defs[2]).value) == "2*a+2*b");
  CHECK(p.goal == Expr::var("x"));
}

TEST_CASE("empty definitions section") {
  Program p = parse_program("# |-\n42\n");
  CHECK(p.defs.empty());
  CHECK(p.goal == Expr::int_lit(42));
}

TEST_CASE("parses the recursive power program") {
  Program p = parse_program(testing::read_program("power.py"));
  REQUIRE(p.defs.size() == 3);
  const FuncDef* f = p.find_func("power");
  REQUIRE(f);
  CHECK(f->params.size() == 2);
  CHECK(f->params[0].type == Type::float_t());
  CHECK(f->result == Type::float_t());
  CHECK(p.goal == Expr::call("power", {Expr::var("x"), Expr::var("y")}));
  CHECK(print_expr(normalize_body(*f).expr) == "b if e==1 else b*power(b, e-1)");
}

TEST_CASE("docstrings, string annotations and statement bodies") {
  Program p = parse_program(testing::read_program("punct.py"));
  const FuncDef* f = p.find_func("recPunct");
  REQUIRE(f);
  CHECK(f->doc.find("recommended punctuation") != std::string::npos);
  CHECK(f->params[0].type == Type::str_t());
  CHECK(print_expr(normalize_body(*f).expr) ==
        "sentence+'?' if sentence[0:4]=='What' else sentence+'.'");
}

TEST_CASE("spec comments attach to the next function") {
  Program p = parse_program(testing::read_program("power_verify.py"));
  const FuncDef* f = p.find_func("power");
  REQUIRE(f);
  REQUIRE(f->spec.pre);
  CHECK(print_expr(*f->spec.pre) == "e>0");
  CHECK(print_expr(*f->spec.post) == "b**e");
  CHECK(print_expr(*f->spec.progress) == "e");
  CHECK(f->spec.pmin == 1);
}

TEST_CASE("rejects constructs outside the language") {
  CHECK_THROWS_AS(parse_program("def f(x: int) -> int:\n    while x:\n        return 1\n    return 2\n# |-\nf(1)\n"),
                  GrammarError);
  CHECK_THROWS_AS(parse_program("for i in x:\n    pass\n# |-\n1\n"), GrammarError);
  CHECK_THROWS_AS(parse_program("class A:\n    pass\n# |-\n1\n"), GrammarError);
  CHECK_THROWS_AS(parse_program("def f(x: int) -> int:\n    a: int = 1\n    a += 1\n    return a\n# |-\nf(1)\n"),
                  GrammarError);
  CHECK_THROWS_AS(parse_expr("1 < x < 3"), GrammarError);
  CHECK_THROWS_AS(parse_expr("x % 2"), GrammarError);
  CHECK_THROWS_AS(parse_expr("s[1]"), GrammarError);
}

TEST_CASE("syntax errors carry positions") {
  try {
    parse_program("a: int = (1 +\n# |-\na\n");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.line >= 1);
  }
  CHECK_THROWS_AS(parse_program("a: int = 1\n"), SyntaxError);
  CHECK_THROWS_AS(parse_program("# |-\n1\n2\n"), SyntaxError);
  CHECK_THROWS_AS(parse_program("# |-\n1\n# |-\n2\n"), SyntaxError);
}

TEST_CASE("printing uses minimal parentheses") {
  Expr e = Expr::binary(BinaryOp::Add, Expr::binary(BinaryOp::Mul, Expr::int_lit(2), Expr::int_lit(14)),
                        Expr::binary(BinaryOp::Mul, Expr::int_lit(2), Expr::int_lit(7)));
  CHECK(print_expr(e) == "2*14+2*7");
  CHECK(print_expr(Expr::int_lit(42)) == "42");
  CHECK(print_expr(parse_expr("(a - b) - c")) == "a-b-c");
  CHECK(print_expr(parse_expr("a - (b - c)")) == "a-(b-c)");
  CHECK(print_expr(parse_expr("(2 ** 3) ** 2")) == "(2**3)**2");
  CHECK(print_expr(parse_expr("2 ** 3 ** 2")) == "2**3**2");
  CHECK(print_expr(parse_expr("(-2) ** 2")) == "(-2)**2");
  CHECK(print_expr(parse_expr("-2 ** 2")) == "-2**2");
  CHECK(print_expr(parse_expr("x * (x ** (y-1) if y-1>0 else ERROR)")) == "x*(x**(y-1) if y-1>0 else ERROR)");
  CHECK(print_expr(parse_expr("not (a and b)")) == "not (a and b)");
  CHECK(print_expr(parse_expr("(lambda s: s+'!')('Cool')")) == "(lambda s: s+'!')('Cool')");
  CHECK(print_expr(Expr::unary(UnaryOp::Neg, Expr::int_lit(3))) == "-(3)");
}

TEST_CASE("float and string literals print like the host language") {
  CHECK(print_float(42.0) == "42.0");
  CHECK(print_float(0.1) == "0.1");
  CHECK(print_float(1e16) == "1e+16");
  CHECK(print_float(1e-5) == "1e-05");
  CHECK(print_float(0.0001) == "0.0001");
  CHECK(print_float(-0.0) == "-0.0");
  CHECK(print_float(123456.75) == "123456.75");
  CHECK(quote_string("What is it?") == "'What is it?'");
  CHECK(quote_string("it's") == "\"it's\"");
  CHECK(quote_string("a'b\"c") == "'a\\'b\"c'");
}

TEST_CASE("long conditionals break over lines") {
  Expr e = parse_expr("(x if y==1 else x*power(x, y-1)) if y>0 else ERROR");
  auto lines = layout_expr(e, 40);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "(   (x if y==1 else x*power(x, y-1))");
  CHECK(lines[1] == " if y>0 else");
  CHECK(lines[2] == "    ERROR)");
  std::string joined;
  for (const auto& l : lines) joined += l + "\n";
  CHECK(parse_expr(joined) == e);
  CHECK(layout_expr(parse_expr("1 if a else 2"), 40) == std::vector<std::string>{"(1 if a else 2)"});
}

TEST_CASE("print then parse is the identity on random expressions") {
  testing::RandomExpr gen(7);
  for (int i = 0; i < 1000; ++i) {
    Expr e = gen.make(5);
    std::string text = print_expr(e);
    Expr back = parse_expr(text);
    INFO(text);
    REQUIRE(back == e);
    std::string multi;
    for (const auto& l : layout_expr(e, 30)) multi += l + "\n";
    REQUIRE(parse_expr(multi) == e);
  }
}

TEST_CASE("tree encoding round trips") {
  testing::RandomExpr gen(11);
  for (int i = 0; i < 300; ++i) {
    Expr e = gen.make(4);
    CHECK(expr_from_json(expr_to_json(e)) == e);
  }
  auto j = expr_to_json(parse_expr("2*a"));
  CHECK(j["kind"] == "BinOp");
  CHECK(j["op"] == "*");
  CHECK(j["left"]["value"] == 2);
  CHECK_THROWS(expr_from_json(nlohmann::json{{"kind", "Nope"}}));
}

TEST_CASE("lambda form keeps locals as applied lambdas") {
  Program p = parse_program(
      "def f(x: int) -> int:\n    a: int = x+1\n    return a*a\n# |-\nf(2)\n");
  const FuncDef* f = p.find_func("f");
  CHECK(print_expr(lambda_form(*f)) == "lambda x: (lambda a=x+1: a*a)()");
  NormalBody nb = normalize_body(*f);
  CHECK(print_expr(nb.expr) == "(x+1)*(x+1)");
  REQUIRE(nb.locals.size() == 1);
  CHECK(nb.locals[0].name == "a");
}

TEST_CASE("conditional definitions normalize to conditional initializers") {
  Program p = parse_program(
      "def g(x: int) -> int:\n    if x>0:\n        v: int = 1\n    else:\n        v: int = 2\n    return v+x\n"
      "# |-\ng(3)\n");
  NormalBody nb = normalize_body(*p.find_func("g"));
  CHECK(print_expr(nb.expr) == "(1 if x>0 else 2)+x");
}

TEST_CASE("alpha equality ignores bound names") {
  CHECK(alpha_equal(parse_expr("(lambda a: a+1)(2)"), parse_expr("(lambda b: b+1)(2)")));
  CHECK_FALSE(alpha_equal(parse_expr("(lambda a: a+c)(2)"), parse_expr("(lambda b: b+d)(2)")));
  CHECK_FALSE(alpha_equal(parse_expr("lambda a, b: a"), parse_expr("lambda a, b: b")));
}

}
