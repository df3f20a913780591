// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cmath>
#include <set>

#include "lexer.hpp"
#include "stepwise/program.hpp"

namespace stepwise {

using detail::Tok;
using detail::Token;

SyntaxError::SyntaxError(int l, int c, const std::string& msg)
    : std::runtime_error("syntax error at " + std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
      line(l), col(c), message(msg) {}

GrammarError::GrammarError(int l, const std::string& msg)
    : std::runtime_error("unsupported construct at line " + std::to_string(l) + ": " + msg),
      line(l), message(msg) {}

namespace {

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "and", "or", "not", "if", "else", "elif", "lambda", "True", "False", "ERROR", "def",
      "return", "import", "from", "for", "while", "class", "pass", "in", "is", "None",
      "break", "continue", "global", "nonlocal", "with", "try", "except", "yield", "assert",
      "del", "raise", "async", "await", "finally", "as"};
  return k;
}

const std::set<std::string>& unsupported_statements() {
  static const std::set<std::string> k = {"for", "while", "class", "pass", "break", "continue",
                                          "global", "nonlocal", "with", "try", "yield", "assert",
                                          "del", "raise", "from", "async", "finally"};
  return k;
}

class Parser {
 public:
  Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program(const std::string& src) {
    Program p;
    p.source = src;
    SpecComment pending;
    int pending_line = 0;
    std::string doc;
    while (true) {
      const Token& t = cur();
      if (t.kind == Tok::End) throw SyntaxError(t.line, t.col, "missing '# |-' line before the goal");
      if (t.kind == Tok::Turnstile) {
        next();
        break;
      }
      if (t.kind == Tok::Newline) {
        next();
        continue;
      }
      if (t.kind == Tok::SpecLine) {
        add_spec_line(pending, t);
        pending_line = t.line;
        next();
        continue;
      }
      if (t.kind == Tok::String && peek(1).kind == Tok::Newline) {
        doc = t.text;
        next();
        continue;
      }
      if (t.kind == Tok::Indent) throw SyntaxError(t.line, t.col, "unexpected indentation");
      if (t.kind == Tok::Name && t.text == "def") {
        FuncDef f = funcdef();
        f.spec = pending;
        f.doc = doc;
        pending = {};
        doc.clear();
        p.defs.emplace_back(std::move(f));
        continue;
      }
      if (pending.present())
        throw GrammarError(pending_line, "a spec comment must directly precede a function definition");
      if (t.kind == Tok::Name && t.text == "import") {
        ImportDef im;
        im.line = t.line;
        next();
        im.module = expect_name();
        if (cur().kind == Tok::Op && cur().text == ".")
          throw GrammarError(t.line, "only plain module imports are supported");
        expect_newline();
        p.defs.emplace_back(std::move(im));
        doc.clear();
        continue;
      }
      if (t.kind == Tok::Name && unsupported_statements().count(t.text))
        throw GrammarError(t.line, "'" + t.text + "' is outside the supported language");
      if (t.kind == Tok::Name && t.text == "if")
        throw GrammarError(t.line, "conditional definitions are only allowed inside functions");
      if (t.kind == Tok::Name && !keywords().count(t.text)) {
        VarDef v = vardef();
        v.doc = doc;
        doc.clear();
        p.defs.emplace_back(std::move(v));
        continue;
      }
      throw SyntaxError(t.line, t.col, "expected a definition");
    }
    while (cur().kind == Tok::Newline || cur().kind == Tok::Dedent) next();
    if (cur().kind == Tok::End) throw SyntaxError(cur().line, cur().col, "missing goal expression");
    if (cur().kind == Tok::Turnstile) throw SyntaxError(cur().line, cur().col, "more than one '# |-' line");
    p.goal = expr();
    while (cur().kind == Tok::Newline || cur().kind == Tok::Dedent) next();
    if (cur().kind == Tok::Turnstile) throw SyntaxError(cur().line, cur().col, "more than one '# |-' line");
    if (cur().kind != Tok::End)
      throw SyntaxError(cur().line, cur().col, "exactly one goal expression must follow '# |-'");
    return p;
  }

  Expr lone_expr() {
    Expr e = expr();
    if (cur().kind != Tok::End) throw SyntaxError(cur().line, cur().col, "unexpected '" + cur().text + "'");
    return e;
  }

  Type lone_type() {
    Type t = type();
    if (cur().kind != Tok::End) throw SyntaxError(cur().line, cur().col, "unexpected '" + cur().text + "'");
    return t;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t k) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  void next() {
    if (pos_ + 1 < toks_.size()) ++pos_;
  }
  bool at_op(const char* op) const { return cur().kind == Tok::Op && cur().text == op; }
  bool at_kw(const char* kw) const { return cur().kind == Tok::Name && cur().text == kw; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = cur();
    std::string found = t.kind == Tok::End       ? "end of input"
                        : t.kind == Tok::Newline ? "end of line"
                        : t.kind == Tok::Indent  ? "indent"
                        : t.kind == Tok::Dedent  ? "dedent"
                                                 : "'" + t.text + "'";
    throw SyntaxError(t.line, t.col, msg + ", found " + found);
  }

  void expect_op(const char* op) {
    if (!at_op(op)) fail(std::string("expected '") + op + "'");
    next();
  }

  void expect_newline() {
    if (cur().kind == Tok::End) return;
    if (cur().kind != Tok::Newline) fail("expected end of line");
    next();
  }

  std::string expect_name() {
    if (cur().kind != Tok::Name || keywords().count(cur().text)) fail("expected a name");
    std::string n = cur().text;
    next();
    return n;
  }

  std::string dotted_name() {
    std::string n = expect_name();
    while (at_op(".")) {
      next();
      n += "." + expect_name();
    }
    return n;
  }

  void add_spec_line(SpecComment& spec, const Token& t) {
    std::size_t colon = t.text.find(':');
    std::string key = t.text.substr(0, colon);
    std::string rest = t.text.substr(colon + 1);
    auto sub = [&]() {
      try {
        return Parser(detail::tokenize(rest, true)).lone_expr();
      } catch (const SyntaxError& e) {
        throw SyntaxError(t.line, t.col, "in " + key + " comment: " + e.message);
      }
    };
    auto once = [&](auto& slot) {
      if (slot) throw GrammarError(t.line, "duplicate '" + key + ":' comment");
    };
    if (key == "pre") {
      once(spec.pre);
      spec.pre = sub();
    } else if (key == "post") {
      once(spec.post);
      spec.post = sub();
    } else if (key == "progress") {
      once(spec.progress);
      spec.progress = sub();
    } else {
      once(spec.pmin);
      Expr v = sub();
      if (!v.is(ExprKind::IntLit)) throw SyntaxError(t.line, t.col, "pmin must be an integer literal");
      spec.pmin = v.int_value();
    }
  }

  Type type() {
    std::string n = expect_name();
    if (n == "int") return Type::int_t();
    if (n == "float") return Type::float_t();
    if (n == "bool") return Type::bool_t();
    if (n == "str" || n == "string") return Type::str_t();
    throw GrammarError(toks_[pos_ - 1].line, "unsupported type '" + n + "'");
  }

  VarDef vardef() {
    VarDef v;
    const Token& start = cur();
    v.line = start.line;
    v.name = dotted_name();
    if (v.name.find('.') != std::string::npos) throw GrammarError(start.line, "dotted names cannot be defined");
    if (at_op(":")) {
      next();
      v.type = type();
    }
    if (at_op("+=") || at_op("-=") || at_op("*=") || at_op("/="))
      throw GrammarError(start.line, "reassignment is outside the supported language");
    expect_op("=");
    v.value = expr();
    v.span = {start.begin, toks_[pos_ - 1].end};
    expect_newline();
    return v;
  }

  FuncDef funcdef() {
    FuncDef f;
    const Token& start = cur();
    f.line = start.line;
    next();
    f.name = dotted_name();
    expect_op("(");
    while (!at_op(")")) {
      Param p;
      p.name = expect_name();
      if (!at_op(":")) throw GrammarError(start.line, "parameter '" + p.name + "' needs a type annotation");
      next();
      p.type = type();
      if (at_op("=")) throw GrammarError(start.line, "default parameter values are not supported");
      f.params.push_back(std::move(p));
      if (!at_op(",")) break;
      next();
    }
    expect_op(")");
    if (!at_op("->")) throw GrammarError(start.line, "function '" + f.name + "' needs a return type");
    next();
    f.result = type();
    expect_op(":");
    if (at_op("...")) {
      next();
      f.stub = true;
      f.span = {start.begin, toks_[pos_ - 1].end};
      expect_newline();
      return f;
    }
    if (cur().kind != Tok::Newline) {
      f.body.push_back(simple_stmt());
      f.span = {start.begin, toks_[pos_ - 1].end};
      return f;
    }
    next();
    if (cur().kind != Tok::Indent) fail("expected an indented block");
    next();
    if (cur().kind == Tok::String && peek(1).kind == Tok::Newline) {
      f.doc = cur().text;
      next();
      next();
    }
    if (at_op("...")) {
      next();
      expect_newline();
      f.stub = true;
    } else {
      f.body = block_rest();
    }
    if (cur().kind != Tok::Dedent && cur().kind != Tok::End) fail("expected end of block");
    f.span = {start.begin, toks_[pos_ > 0 ? pos_ - 1 : 0].end};
    if (cur().kind == Tok::Dedent) next();
    return f;
  }

  // Statements until the closing dedent (not consumed).
  Block block_rest() {
    Block b;
    while (cur().kind != Tok::Dedent && cur().kind != Tok::End) {
      if (cur().kind == Tok::Newline) {
        next();
        continue;
      }
      b.push_back(stmt());
    }
    return b;
  }

  Block suite() {
    if (cur().kind != Tok::Newline) {
      Block b;
      b.push_back(simple_stmt());
      return b;
    }
    next();
    if (cur().kind != Tok::Indent) fail("expected an indented block");
    next();
    Block b = block_rest();
    if (cur().kind == Tok::Dedent) next();
    return b;
  }

  Stmt stmt() {
    const Token& t = cur();
    if (t.kind == Tok::Name && t.text == "if") {
      Stmt s;
      s.kind = Stmt::Kind::If;
      s.line = t.line;
      uint32_t b = t.begin;
      next();
      s.value = expr();
      expect_op(":");
      s.then_block = suite();
      if (at_kw("elif")) throw GrammarError(cur().line, "'elif' is outside the supported language");
      if (at_kw("else")) {
        next();
        expect_op(":");
        s.else_block = suite();
      }
      s.span = {b, toks_[pos_ - 1].end};
      return s;
    }
    if (t.kind == Tok::Name && t.text == "elif") throw GrammarError(t.line, "'elif' is outside the supported language");
    if (t.kind == Tok::Name && t.text == "def") throw GrammarError(t.line, "nested functions are not supported");
    if (t.kind == Tok::Name && t.text == "import") throw GrammarError(t.line, "imports must be at top level");
    if (t.kind == Tok::Name && unsupported_statements().count(t.text))
      throw GrammarError(t.line, "'" + t.text + "' is outside the supported language");
    return simple_stmt();
  }

  Stmt simple_stmt() {
    const Token& t = cur();
    Stmt s;
    s.line = t.line;
    uint32_t b = t.begin;
    if (t.kind == Tok::Name && unsupported_statements().count(t.text))
      throw GrammarError(t.line, "'" + t.text + "' is outside the supported language");
    if (t.kind == Tok::Name && t.text == "return") {
      next();
      s.kind = Stmt::Kind::Return;
      s.value = expr();
      s.span = {b, toks_[pos_ - 1].end};
      expect_newline();
      return s;
    }
    if (t.kind == Tok::Name && !keywords().count(t.text) &&
        (peek(1).kind == Tok::Op && (peek(1).text == ":" || peek(1).text == "=" || peek(1).text == "+=" ||
                                     peek(1).text == "-=" || peek(1).text == "*=" || peek(1).text == "/="))) {
      s.kind = Stmt::Kind::Assign;
      s.name = t.text;
      next();
      if (at_op(":")) {
        next();
        s.type = type();
      }
      if (at_op("+=") || at_op("-=") || at_op("*=") || at_op("/="))
        throw GrammarError(t.line, "reassignment is outside the supported language");
      expect_op("=");
      s.value = expr();
      s.span = {b, toks_[pos_ - 1].end};
      expect_newline();
      return s;
    }
    fail("expected an assignment or return");
  }

  // ---- expressions ----

  Span span_from(uint32_t b) const { return {b, toks_[pos_ > 0 ? pos_ - 1 : 0].end}; }

  Expr expr() {
    if (at_kw("lambda")) return lambda();
    uint32_t b = cur().begin;
    Expr then = or_expr();
    if (at_kw("if")) {
      next();
      Expr guard = or_expr();
      if (!at_kw("else")) fail("expected 'else' in conditional expression");
      next();
      Expr other = expr();
      return Expr::cond(then, guard, other, span_from(b));
    }
    return then;
  }

  Expr lambda() {
    uint32_t b = cur().begin;
    next();
    std::vector<std::string> params;
    std::vector<bool> flags;
    std::vector<Expr> defaults;
    while (!at_op(":")) {
      params.push_back(expect_name());
      if (at_op("=")) {
        next();
        defaults.push_back(expr());
        flags.push_back(true);
      } else {
        if (!defaults.empty()) fail("parameter without default follows parameter with default");
        flags.push_back(false);
      }
      if (!at_op(",")) break;
      next();
    }
    expect_op(":");
    std::set<std::string> seen(params.begin(), params.end());
    if (seen.size() != params.size()) fail("duplicate lambda parameter");
    Expr body = expr();
    return Expr::lambda(params, flags, defaults, body, span_from(b));
  }

  Expr or_expr() {
    uint32_t b = cur().begin;
    Expr l = and_expr();
    while (at_kw("or")) {
      next();
      Expr r = and_expr();
      l = Expr::binary(BinaryOp::Or, l, r, span_from(b));
    }
    return l;
  }

  Expr and_expr() {
    uint32_t b = cur().begin;
    Expr l = not_expr();
    while (at_kw("and")) {
      next();
      Expr r = not_expr();
      l = Expr::binary(BinaryOp::And, l, r, span_from(b));
    }
    return l;
  }

  Expr not_expr() {
    if (at_kw("not")) {
      uint32_t b = cur().begin;
      next();
      Expr x = not_expr();
      return Expr::unary(UnaryOp::Not, x, span_from(b));
    }
    return comparison();
  }

  std::optional<BinaryOp> comparison_op() const {
    if (cur().kind == Tok::Name && (cur().text == "in" || cur().text == "is"))
      throw GrammarError(cur().line, "'" + cur().text + "' is outside the supported language");
    if (cur().kind != Tok::Op) return std::nullopt;
    const std::string& t = cur().text;
    if (t == "==") return BinaryOp::Eq;
    if (t == "!=") return BinaryOp::Ne;
    if (t == "<") return BinaryOp::Lt;
    if (t == "<=") return BinaryOp::Le;
    if (t == ">") return BinaryOp::Gt;
    if (t == ">=") return BinaryOp::Ge;
    return std::nullopt;
  }

  Expr comparison() {
    uint32_t b = cur().begin;
    Expr l = additive();
    if (auto op = comparison_op()) {
      next();
      Expr r = additive();
      if (comparison_op()) throw GrammarError(cur().line, "chained comparisons are not supported");
      return Expr::binary(*op, l, r, span_from(b));
    }
    return l;
  }

  Expr additive() {
    uint32_t b = cur().begin;
    Expr l = term();
    while (at_op("+") || at_op("-")) {
      BinaryOp op = at_op("+") ? BinaryOp::Add : BinaryOp::Sub;
      next();
      Expr r = term();
      l = Expr::binary(op, l, r, span_from(b));
    }
    return l;
  }

  Expr term() {
    uint32_t b = cur().begin;
    Expr l = unary();
    while (at_op("*") || at_op("/") || at_op("//") || at_op("%") || at_op("@")) {
      if (at_op("%") || at_op("@"))
        throw GrammarError(cur().line, "operator '" + cur().text + "' is not supported");
      BinaryOp op = at_op("*") ? BinaryOp::Mul : at_op("/") ? BinaryOp::Div : BinaryOp::FloorDiv;
      next();
      Expr r = unary();
      l = Expr::binary(op, l, r, span_from(b));
    }
    return l;
  }

  Expr unary() {
    if (at_op("-")) {
      uint32_t b = cur().begin;
      const Token& n = peek(1);
      bool fold = n.kind == Tok::Number && !(peek(2).kind == Tok::Op && peek(2).text == "**");
      next();
      if (fold) {
        Token num = cur();
        next();
        return number(num, true, span_from(b));
      }
      Expr x = unary();
      return Expr::unary(UnaryOp::Neg, x, span_from(b));
    }
    if (at_op("+") || at_op("~")) throw GrammarError(cur().line, "unary '" + cur().text + "' is not supported");
    return power();
  }

  Expr power() {
    uint32_t b = cur().begin;
    Expr base = postfix();
    if (at_op("**")) {
      next();
      Expr exp = unary();
      return Expr::binary(BinaryOp::Pow, base, exp, span_from(b));
    }
    return base;
  }

  int64_t slice_bound() {
    if (cur().kind != Tok::Number) fail("slice bounds must be non-negative integer literals");
    Expr v = number(cur(), false, {});
    next();
    if (!v.is(ExprKind::IntLit)) fail("slice bounds must be integers");
    return v.int_value();
  }

  Expr postfix() {
    uint32_t b = cur().begin;
    Expr e = atom();
    while (true) {
      if (at_op("(")) {
        next();
        std::vector<Expr> args;
        while (!at_op(")")) {
          if (cur().kind == Tok::Name && peek(1).kind == Tok::Op && peek(1).text == "=")
            throw GrammarError(cur().line, "keyword arguments are not supported");
          args.push_back(expr());
          if (!at_op(",")) break;
          next();
        }
        expect_op(")");
        e = Expr::call(e, args, span_from(b));
        continue;
      }
      if (at_op("[")) {
        next();
        int64_t lo = slice_bound();
        if (!at_op(":")) throw GrammarError(cur().line, "only slices s[lo:hi] are supported");
        next();
        int64_t hi = slice_bound();
        expect_op("]");
        e = Expr::slice(e, lo, hi, span_from(b));
        continue;
      }
      return e;
    }
  }

  Expr number(const Token& t, bool negative, Span s) {
    if (s.empty()) s = {t.begin, t.end};
    std::string text = (negative ? "-" : "") + t.text;
    bool is_float = t.text.find_first_of(".eE") != std::string::npos;
    if (!is_float) {
      int64_t v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size())
        throw SyntaxError(t.line, t.col, "integer literal out of range: " + text);
      return Expr::int_lit(v, s);
    }
    double v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size() || !std::isfinite(v))
      throw SyntaxError(t.line, t.col, "float literal out of range: " + text);
    return Expr::float_lit(v, s);
  }

  Expr atom() {
    const Token& t = cur();
    Span s{t.begin, t.end};
    switch (t.kind) {
      case Tok::Number: {
        Token copy = t;
        next();
        return number(copy, false, s);
      }
      case Tok::String: {
        std::string v = t.text;
        next();
        while (cur().kind == Tok::String) {
          v += cur().text;
          s.end = cur().end;
          next();
        }
        return Expr::str_lit(v, s);
      }
      case Tok::Name: {
        if (t.text == "True" || t.text == "False") {
          bool v = t.text == "True";
          next();
          return Expr::bool_lit(v, s);
        }
        if (t.text == "ERROR") {
          next();
          return Expr::error(s);
        }
        if (t.text == "lambda") return lambda();
        if (keywords().count(t.text)) {
          if (t.text == "None") throw GrammarError(t.line, "'None' is outside the supported language");
          fail("unexpected keyword");
        }
        uint32_t b = t.begin;
        std::string n = dotted_name();
        return Expr::var(n, span_from(b));
      }
      case Tok::Op: {
        if (t.text == "(") {
          next();
          if (at_op(")")) fail("empty parentheses");
          Expr e = expr();
          if (at_op(",")) throw GrammarError(cur().line, "tuples are not supported");
          expect_op(")");
          return e;
        }
        if (t.text == "[" || t.text == "{")
          throw GrammarError(t.line, "lists, sets and dictionaries are not supported");
        fail("expected an expression");
      }
      default:
        fail("expected an expression");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Program parse_program(const std::string& text) {
  return Parser(detail::tokenize(text)).program(text);
}

Expr parse_expr(const std::string& text) {
  return Parser(detail::tokenize(text, true)).lone_expr();
}

Type parse_type(const std::string& text) {
  return Parser(detail::tokenize(text, true)).lone_type();
}

}  // namespace stepwise
