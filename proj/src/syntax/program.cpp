// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "stepwise/program.hpp"

namespace stepwise {

Type Type::function(std::vector<Type> params, Type result) {
  Type t;
  t.kind = Kind::Function;
  t.params = std::move(params);
  t.result = std::make_shared<const Type>(std::move(result));
  return t;
}

std::string Type::str() const {
  switch (kind) {
    case Kind::Int: return "int";
    case Kind::Float: return "float";
    case Kind::Bool: return "bool";
    case Kind::Str: return "str";
    case Kind::Error: return "ERROR";
    case Kind::Function: {
      std::string out = "(";
      for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out += ", ";
        out += params[i].str();
      }
      return out + ") -> " + (result ? result->str() : "?");
    }
  }
  return "?";
}

bool operator==(const Type& a, const Type& b) {
  if (a.kind != b.kind) return false;
  if (a.kind != Type::Kind::Function) return true;
  if (a.params != b.params) return false;
  return *a.result == *b.result;
}

bool subtype(const Type& sub, const Type& super) {
  if (sub.is(Type::Kind::Error)) return true;
  if (sub == super) return true;
  return sub.is(Type::Kind::Int) && super.is(Type::Kind::Float);
}

Type FuncDef::type() const {
  std::vector<Type> ps;
  for (const auto& p : params) ps.push_back(p.type);
  return Type::function(std::move(ps), result);
}

const VarDef* Program::find_var(const std::string& name) const {
  for (const auto& d : defs)
    if (auto v = std::get_if<VarDef>(&d); v && v->name == name) return v;
  return nullptr;
}

const FuncDef* Program::find_func(const std::string& name) const {
  for (const auto& d : defs)
    if (auto f = std::get_if<FuncDef>(&d); f && f->name == name) return f;
  return nullptr;
}

std::vector<std::string> Program::names() const {
  std::vector<std::string> out;
  for (const auto& d : defs) {
    if (auto v = std::get_if<VarDef>(&d)) out.push_back(v->name);
    if (auto f = std::get_if<FuncDef>(&d)) out.push_back(f->name);
  }
  return out;
}

const Program& prelude() {
  static const Program p = parse_program(R"(import math

# pre: not (x<0.0 and not float.is_integer(y)) and not (x==0.0 and y<0.0)
# post: x**y
def math.pow(x: float, y: float) -> float: ...

# pre: x>=0.0
# post: x**0.5
def math.sqrt(x: float) -> float: ...

# |-
0
)");
  return p;
}

}  // namespace stepwise
