// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stepwise/expr.hpp"

namespace stepwise {

// Primitive operations on literal operands. Each returns a literal, ERROR for
// a runtime failure, or nullopt when the operands have the wrong shape.
std::optional<Expr> apply_binary(BinaryOp op, const Expr& l, const Expr& r);
std::optional<Expr> apply_unary(UnaryOp op, const Expr& x);
std::optional<Expr> apply_slice(const Expr& base, int64_t lo, int64_t hi);
std::optional<Expr> apply_primitive(const std::string& name, const std::vector<Expr>& args);

// Python floor division and exact int/float comparison.
double py_floordiv(double a, double b);
int compare_int_float(int64_t i, double d);

std::size_t utf8_length(const std::string& s);
std::string utf8_slice(const std::string& s, int64_t lo, int64_t hi);

}  // namespace stepwise
