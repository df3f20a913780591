// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace stepwise {

// Byte offsets into the source a node was parsed from, or copied from.
struct Span {
  uint32_t begin = 0;
  uint32_t end = 0;

  bool empty() const { return begin == end; }
  bool contains(const Span& other) const {
    return !empty() && !other.empty() && begin <= other.begin && other.end <= end;
  }
};

enum class ExprKind {
  IntLit,
  FloatLit,
  BoolLit,
  StrLit,
  Var,
  BinOp,
  Unary,
  Slice,
  Call,
  Cond,
  Lambda,
  Error,
};

enum class BinaryOp {
  Add, Sub, Mul, FloorDiv, Div, Pow,
  Eq, Ne, Lt, Le, Gt, Ge,
  And, Or,
};

enum class UnaryOp { Not, Neg };

const char* op_text(BinaryOp op);
const char* op_text(UnaryOp op);
const char* kind_name(ExprKind kind);
bool is_comparison(BinaryOp op);
bool is_arith(BinaryOp op);

struct Node;

// Immutable expression handle. Copies share structure.
class Expr {
 public:
  Expr();  // ERROR

  static Expr int_lit(int64_t v, Span s = {});
  static Expr float_lit(double v, Span s = {});
  static Expr bool_lit(bool v, Span s = {});
  static Expr str_lit(std::string v, Span s = {});
  static Expr var(std::string name, Span s = {});
  static Expr binary(BinaryOp op, Expr l, Expr r, Span s = {});
  static Expr unary(UnaryOp op, Expr operand, Span s = {});
  static Expr slice(Expr base, int64_t lo, int64_t hi, Span s = {});
  static Expr call(Expr callee, std::vector<Expr> args, Span s = {});
  static Expr call(const std::string& name, std::vector<Expr> args, Span s = {});
  static Expr cond(Expr then, Expr guard, Expr otherwise, Span s = {});
  // params: name and whether it has a default; defaults are given in order.
  static Expr lambda(std::vector<std::string> params, std::vector<bool> has_default,
                     std::vector<Expr> defaults, Expr body, Span s = {});
  static Expr error(Span s = {});

  ExprKind kind() const;
  Span span() const;

  int64_t int_value() const;
  double float_value() const;
  bool bool_value() const;
  // StrLit value or Var name.
  const std::string& text() const;
  BinaryOp binary_op() const;
  UnaryOp unary_op() const;
  int64_t slice_lo() const;
  int64_t slice_hi() const;
  const std::vector<std::string>& lambda_params() const;
  const std::vector<bool>& lambda_has_default() const;

  const std::vector<Expr>& children() const;
  const Expr& child(std::size_t i) const { return children().at(i); }
  std::size_t size() const { return children().size(); }

  // Call helpers.
  const Expr& callee() const { return child(0); }
  std::vector<Expr> args() const;
  // Name of a named call, empty when the callee is not a variable.
  std::string callee_name() const;

  // Lambda helpers.
  const Expr& lambda_body() const { return children().back(); }
  std::vector<Expr> lambda_defaults() const;
  // Default for params[i], or nullopt.
  std::optional<Expr> lambda_default(std::size_t i) const;

  bool is(ExprKind k) const { return kind() == k; }
  bool is_literal() const;
  bool is_value() const { return is_literal() || is(ExprKind::Error); }
  bool is_var(const std::string& name) const { return is(ExprKind::Var) && text() == name; }
  bool is_bool(bool v) const { return is(ExprKind::BoolLit) && bool_value() == v; }

  Expr with_children(std::vector<Expr> kids) const;
  Expr with_span(Span s) const;

  const Node* identity() const { return node_.get(); }

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

using Path = std::vector<std::size_t>;

class InvalidPath : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string path_text(const Path& p);
bool path_valid(const Expr& e, const Path& p);
const Expr& expr_at(const Expr& e, const Path& p);
Expr replace_at(const Expr& e, const Path& p, const Expr& sub);
bool is_prefix(const Path& prefix, const Path& p);

// Pre-order listing of (path, subexpression).
std::vector<std::pair<Path, Expr>> subterms(const Expr& e);

std::set<std::string> free_vars(const Expr& e);
bool occurs_free(const Expr& e, const std::string& name);
// Every identifier anywhere in e, bound or free.
std::set<std::string> all_names(const Expr& e);

// Capture-avoiding only in the sense that bound occurrences are left alone;
// callers check capture separately.
Expr substitute(const Expr& e, const std::string& name, const Expr& value);
Expr substitute_all(const Expr& e, const std::vector<std::pair<std::string, Expr>>& bindings);

// Structural equality up to renaming of lambda parameters.
bool alpha_equal(const Expr& a, const Expr& b);

// Count of nodes, for generators and limits.
std::size_t expr_size(const Expr& e);

}  // namespace stepwise
