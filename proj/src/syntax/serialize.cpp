// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "stepwise/serialize.hpp"

namespace stepwise {

using nlohmann::json;

namespace {

const BinaryOp kBinaryOps[] = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::FloorDiv,
                               BinaryOp::Div, BinaryOp::Pow, BinaryOp::Eq,  BinaryOp::Ne,
                               BinaryOp::Lt,  BinaryOp::Le,  BinaryOp::Gt,  BinaryOp::Ge,
                               BinaryOp::And, BinaryOp::Or};

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument("bad expression tree: " + msg); }

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) bad(std::string("missing field '") + name + "'");
  return j.at(name);
}

}  // namespace

json expr_to_json(const Expr& e, bool with_spans) {
  json j;
  j["kind"] = kind_name(e.kind());
  switch (e.kind()) {
    case ExprKind::IntLit: j["value"] = e.int_value(); break;
    case ExprKind::FloatLit: j["value"] = e.float_value(); break;
    case ExprKind::BoolLit: j["value"] = e.bool_value(); break;
    case ExprKind::StrLit: j["value"] = e.text(); break;
    case ExprKind::Var: j["name"] = e.text(); break;
    case ExprKind::BinOp:
      j["op"] = op_text(e.binary_op());
      j["left"] = expr_to_json(e.child(0), with_spans);
      j["right"] = expr_to_json(e.child(1), with_spans);
      break;
    case ExprKind::Unary:
      j["op"] = op_text(e.unary_op());
      j["operand"] = expr_to_json(e.child(0), with_spans);
      break;
    case ExprKind::Slice:
      j["base"] = expr_to_json(e.child(0), with_spans);
      j["lo"] = e.slice_lo();
      j["hi"] = e.slice_hi();
      break;
    case ExprKind::Call: {
      j["callee"] = expr_to_json(e.callee(), with_spans);
      json args = json::array();
      for (std::size_t i = 1; i < e.size(); ++i) args.push_back(expr_to_json(e.child(i), with_spans));
      j["args"] = args;
      break;
    }
    case ExprKind::Cond:
      j["then"] = expr_to_json(e.child(0), with_spans);
      j["guard"] = expr_to_json(e.child(1), with_spans);
      j["else"] = expr_to_json(e.child(2), with_spans);
      break;
    case ExprKind::Lambda: {
      json ps = json::array();
      for (std::size_t i = 0; i < e.lambda_params().size(); ++i) {
        json p{{"name", e.lambda_params()[i]}};
        if (auto d = e.lambda_default(i)) p["default"] = expr_to_json(*d, with_spans);
        ps.push_back(p);
      }
      j["params"] = ps;
      j["body"] = expr_to_json(e.lambda_body(), with_spans);
      break;
    }
    case ExprKind::Error: break;
  }
  if (with_spans) j["span"] = {e.span().begin, e.span().end};
  return j;
}

Expr expr_from_json(const json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  Span s;
  if (j.contains("span") && j["span"].is_array() && j["span"].size() == 2)
    s = {j["span"][0].get<uint32_t>(), j["span"][1].get<uint32_t>()};
  try {
    if (kind == "IntLit") return Expr::int_lit(field(j, "value").get<int64_t>(), s);
    if (kind == "FloatLit") return Expr::float_lit(field(j, "value").get<double>(), s);
    if (kind == "BoolLit") return Expr::bool_lit(field(j, "value").get<bool>(), s);
    if (kind == "StrLit") return Expr::str_lit(field(j, "value").get<std::string>(), s);
    if (kind == "Var") return Expr::var(field(j, "name").get<std::string>(), s);
    if (kind == "Error") return Expr::error(s);
    if (kind == "BinOp") {
      std::string op = field(j, "op").get<std::string>();
      for (BinaryOp b : kBinaryOps)
        if (op == op_text(b))
          return Expr::binary(b, expr_from_json(field(j, "left")), expr_from_json(field(j, "right")), s);
      bad("unknown operator '" + op + "'");
    }
    if (kind == "Unary") {
      std::string op = field(j, "op").get<std::string>();
      if (op != "not" && op != "-") bad("unknown unary operator '" + op + "'");
      return Expr::unary(op == "not" ? UnaryOp::Not : UnaryOp::Neg, expr_from_json(field(j, "operand")), s);
    }
    if (kind == "Slice")
      return Expr::slice(expr_from_json(field(j, "base")), field(j, "lo").get<int64_t>(),
                         field(j, "hi").get<int64_t>(), s);
    if (kind == "Call") {
      std::vector<Expr> args;
      for (const auto& a : field(j, "args")) args.push_back(expr_from_json(a));
      return Expr::call(expr_from_json(field(j, "callee")), args, s);
    }
    if (kind == "Cond")
      return Expr::cond(expr_from_json(field(j, "then")), expr_from_json(field(j, "guard")),
                        expr_from_json(field(j, "else")), s);
    if (kind == "Lambda") {
      std::vector<std::string> names;
      std::vector<bool> flags;
      std::vector<Expr> defaults;
      for (const auto& p : field(j, "params")) {
        names.push_back(field(p, "name").get<std::string>());
        bool has = p.contains("default");
        flags.push_back(has);
        if (has) defaults.push_back(expr_from_json(p.at("default")));
      }
      return Expr::lambda(names, flags, defaults, expr_from_json(field(j, "body")), s);
    }
  } catch (const json::exception& e) {
    bad(e.what());
  }
  bad("unknown kind '" + kind + "'");
}

json type_to_json(const Type& t) {
  if (!t.is(Type::Kind::Function)) return t.str();
  json ps = json::array();
  for (const auto& p : t.params) ps.push_back(type_to_json(p));
  return json{{"params", ps}, {"result", type_to_json(*t.result)}};
}

json program_to_json(const Program& p) {
  json defs = json::array();
  for (const auto& d : p.defs) {
    json j;
    if (auto v = std::get_if<VarDef>(&d)) {
      j = {{"kind", "var"}, {"name", v->name}, {"value", print_expr(v->value)}};
      if (v->type) j["type"] = v->type->str();
    } else if (auto f = std::get_if<FuncDef>(&d)) {
      j = {{"kind", f->stub ? "stub" : "function"}, {"name", f->name}, {"type", type_to_json(f->type())}};
    } else {
      j = {{"kind", "import"}, {"name", std::get<ImportDef>(d).module}};
    }
    j["text"] = print_definition(d);
    defs.push_back(j);
  }
  return json{{"definitions", defs}, {"goal", print_expr(p.goal)}};
}

}  // namespace stepwise
