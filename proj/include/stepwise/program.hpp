// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "stepwise/expr.hpp"

namespace stepwise {

struct Type {
  enum class Kind { Int, Float, Bool, Str, Function, Error };
  Kind kind = Kind::Error;
  std::vector<Type> params;            // Function only
  std::shared_ptr<const Type> result;  // Function only

  static Type int_t() { return {Kind::Int, {}, nullptr}; }
  static Type float_t() { return {Kind::Float, {}, nullptr}; }
  static Type bool_t() { return {Kind::Bool, {}, nullptr}; }
  static Type str_t() { return {Kind::Str, {}, nullptr}; }
  // Type of ERROR; a subtype of everything.
  static Type error_t() { return {Kind::Error, {}, nullptr}; }
  static Type function(std::vector<Type> params, Type result);

  bool is(Kind k) const { return kind == k; }
  bool numeric() const { return kind == Kind::Int || kind == Kind::Float; }
  std::string str() const;
};

bool operator==(const Type& a, const Type& b);
inline bool operator!=(const Type& a, const Type& b) { return !(a == b); }
// int <: float, ERROR <: everything.
bool subtype(const Type& sub, const Type& super);

struct Stmt;
using Block = std::vector<Stmt>;

struct Stmt {
  enum class Kind { Assign, If, Return };
  Kind kind = Kind::Return;
  std::string name;           // Assign
  std::optional<Type> type;   // Assign
  Expr value;                 // Assign, Return; guard for If
  Block then_block, else_block;
  Span span;
  int line = 0;
};

// Structured spec comment placed directly above a function.
struct SpecComment {
  std::optional<Expr> pre, post, progress;
  std::optional<int64_t> pmin;
  bool present() const { return pre || post || progress || pmin; }
};

struct Param {
  std::string name;
  Type type;
};

struct VarDef {
  std::string name;
  std::optional<Type> type;
  Expr value;
  Span span;
  int line = 0;
  std::string doc;
};

struct FuncDef {
  std::string name;
  std::vector<Param> params;
  Type result;
  Block body;
  // Body is `...`: a declared stub, trusted through its spec.
  bool stub = false;
  SpecComment spec;
  Span span;
  int line = 0;
  std::string doc;

  Type type() const;
};

struct ImportDef {
  std::string module;
  int line = 0;
};

using Definition = std::variant<VarDef, FuncDef, ImportDef>;

struct Program {
  std::vector<Definition> defs;
  Expr goal;
  std::string source;

  const VarDef* find_var(const std::string& name) const;
  const FuncDef* find_func(const std::string& name) const;
  bool defines(const std::string& name) const { return find_var(name) || find_func(name); }
  std::vector<std::string> names() const;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(int line, int col, const std::string& msg);
  int line, col;
  std::string message;
};

class GrammarError : public std::runtime_error {
 public:
  GrammarError(int line, const std::string& msg);
  int line;
  std::string message;
};

Program parse_program(const std::string& text);
Expr parse_expr(const std::string& text);
Type parse_type(const std::string& text);

// Built-in library stubs shared by every program.
const Program& prelude();

// Single-line concrete syntax.
std::string print_expr(const Expr& e);
// Layout that breaks conditionals over several lines when wider than width.
std::vector<std::string> layout_expr(const Expr& e, std::size_t width);
std::string print_float(double v);
std::string quote_string(const std::string& s);
std::string print_stmt_block(const Block& b, int indent);
std::string print_definition(const Definition& d);
std::string print_program(const Program& p);

// Statement form to a single expression. Locals are inlined.
struct LocalInit {
  std::string name;
  Expr value;                 // after substituting earlier locals
  std::vector<Expr> guards;   // tests in force where the local is defined
};

struct NormalBody {
  Expr expr;
  std::vector<LocalInit> locals;
};

NormalBody normalize_body(const FuncDef& f);
// Lambda form: locals become immediately applied single-parameter lambdas.
Expr lambda_form(const FuncDef& f);

}  // namespace stepwise
