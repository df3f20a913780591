// Direct big-step interpreter used as an oracle. It executes statement
// bodies as written and shares no evaluation code with the library.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "stepwise/program.hpp"

namespace stepwise::testing {

struct RefError {};

struct Closure {
  Expr lambda;
  std::shared_ptr<std::map<std::string, struct RefValue>> env;
  Path path;  // position of the lambda in the goal, empty elsewhere
  bool in_goal = false;
};

struct RefValue {
  std::variant<int64_t, double, bool, std::string, Closure> v;
};

class Reference {
 public:
  explicit Reference(const Program& p) : p_(p) {}

  // Called for every goal position evaluation reaches.
  std::function<void(const Path&)> on_visit;
  long steps = 0;
  long max_steps = 2'000'000;

  // The literal the goal evaluates to, or ERROR.
  Expr run() {
    try {
      Path path;
      Env env;
      return to_expr(eval(p_.goal, env, &path));
    } catch (const RefError&) {
      return Expr::error();
    }
  }

  Expr eval_closed(const Expr& e, const std::map<std::string, Expr>& vars) {
    try {
      Env env;
      for (const auto& [k, v] : vars) env[k] = from_literal(v);
      Path path;
      return to_expr(eval(e, env, &path));
    } catch (const RefError&) {
      return Expr::error();
    }
  }

 private:
  using Env = std::map<std::string, RefValue>;

  static RefValue from_literal(const Expr& e) {
    switch (e.kind()) {
      case ExprKind::IntLit: return {e.int_value()};
      case ExprKind::FloatLit: return {e.float_value()};
      case ExprKind::BoolLit: return {e.bool_value()};
      case ExprKind::StrLit: return {e.text()};
      default: throw RefError{};
    }
  }

  static Expr to_expr(const RefValue& v) {
    if (auto i = std::get_if<int64_t>(&v.v)) return Expr::int_lit(*i);
    if (auto d = std::get_if<double>(&v.v)) return Expr::float_lit(*d);
    if (auto b = std::get_if<bool>(&v.v)) return Expr::bool_lit(*b);
    if (auto s = std::get_if<std::string>(&v.v)) return Expr::str_lit(*s);
    throw RefError{};
  }

  static bool is_num(const RefValue& v) { return v.v.index() <= 1; }
  static long double wide(const RefValue& v) {
    if (auto i = std::get_if<int64_t>(&v.v)) return static_cast<long double>(*i);
    return static_cast<long double>(std::get<double>(v.v));
  }
  static double dbl(const RefValue& v) {
    if (auto i = std::get_if<int64_t>(&v.v)) return static_cast<double>(*i);
    return std::get<double>(v.v);
  }
  static RefValue fin(double d) {
    if (!std::isfinite(d)) throw RefError{};
    return {d};
  }
  static bool truth(const RefValue& v) {
    auto b = std::get_if<bool>(&v.v);
    if (!b) throw RefError{};
    return *b;
  }

  static std::u32string decode(const std::string& s) {
    std::u32string out;
    for (std::size_t i = 0; i < s.size();) {
      unsigned char c = s[i];
      int n = c < 0x80 ? 1 : c < 0xE0 ? 2 : c < 0xF0 ? 3 : 4;
      char32_t cp = n == 1 ? c : n == 2 ? (c & 0x1F) : n == 3 ? (c & 0x0F) : (c & 0x07);
      for (int k = 1; k < n && i + k < s.size(); ++k) cp = (cp << 6) | (s[i + k] & 0x3F);
      out.push_back(cp);
      i += n;
    }
    return out;
  }
  static std::string encode(const std::u32string& s) {
    std::string out;
    for (char32_t c : s) {
      if (c < 0x80) {
        out += static_cast<char>(c);
      } else if (c < 0x800) {
        out += static_cast<char>(0xC0 | (c >> 6));
        out += static_cast<char>(0x80 | (c & 0x3F));
      } else if (c < 0x10000) {
        out += static_cast<char>(0xE0 | (c >> 12));
        out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (c & 0x3F));
      } else {
        out += static_cast<char>(0xF0 | (c >> 18));
        out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (c & 0x3F));
      }
    }
    return out;
  }

  RefValue global(const std::string& n) {
    auto it = globals_.find(n);
    if (it != globals_.end()) return it->second;
    const VarDef* v = p_.find_var(n);
    if (!v) throw RefError{};
    Env env;
    RefValue r = eval(v->value, env, nullptr);
    globals_[n] = r;
    return r;
  }

  RefValue arith(BinaryOp op, const RefValue& a, const RefValue& b) {
    if (op == BinaryOp::Add && a.v.index() == 3 && b.v.index() == 3)
      return {std::get<std::string>(a.v) + std::get<std::string>(b.v)};
    if (!is_num(a) || !is_num(b)) throw RefError{};
    auto ia = std::get_if<int64_t>(&a.v);
    auto ib = std::get_if<int64_t>(&b.v);
    if (ia && ib) {
      __int128 x = *ia, y = *ib, r = 0;
      switch (op) {
        case BinaryOp::Add: r = x + y; break;
        case BinaryOp::Sub: r = x - y; break;
        case BinaryOp::Mul: r = x * y; break;
        case BinaryOp::FloorDiv: {
          if (y == 0) throw RefError{};
          r = x / y;
          if (r * y != x && ((x < 0) != (y < 0))) r -= 1;
          break;
        }
        case BinaryOp::Div:
          if (y == 0) throw RefError{};
          return fin(static_cast<double>(*ia) / static_cast<double>(*ib));
        case BinaryOp::Pow: {
          if (y < 0) throw RefError{};
          r = 1;
          for (__int128 k = 0; k < y; ++k) {
            r *= x;
            if (r > std::numeric_limits<int64_t>::max() || r < std::numeric_limits<int64_t>::min()) throw RefError{};
            if (r == 0 || r == 1) {
              if (r == 0) break;
              if (x == 1) break;
            }
            if (x == -1) {
              r = (y % 2 == 0) ? 1 : -1;
              break;
            }
          }
          break;
        }
        default: throw RefError{};
      }
      if (r > std::numeric_limits<int64_t>::max() || r < std::numeric_limits<int64_t>::min()) throw RefError{};
      return {static_cast<int64_t>(r)};
    }
    double x = dbl(a), y = dbl(b);
    switch (op) {
      case BinaryOp::Add: return fin(x + y);
      case BinaryOp::Sub: return fin(x - y);
      case BinaryOp::Mul: return fin(x * y);
      case BinaryOp::Div:
        if (y == 0) throw RefError{};
        return fin(x / y);
      case BinaryOp::FloorDiv: {
        if (y == 0) throw RefError{};
        // CPython float_floor_div
        double mod = std::fmod(x, y);
        double div = (x - mod) / y;
        if (mod != 0 && ((y < 0) != (mod < 0))) div -= 1.0;
        double fd;
        if (div != 0) {
          fd = std::floor(div);
          if (div - fd > 0.5) fd += 1.0;
        } else {
          fd = std::copysign(0.0, x / y);
        }
        return fin(fd);
      }
      case BinaryOp::Pow:
        if (x == 0 && y < 0) throw RefError{};
        if (x < 0 && std::floor(y) != y) throw RefError{};
        return fin(std::pow(x, y));
      default: throw RefError{};
    }
  }

  RefValue compare(BinaryOp op, const RefValue& a, const RefValue& b) {
    int c;
    if (is_num(a) && is_num(b)) {
      long double x = wide(a), y = wide(b);
      if (std::isnan(x) || std::isnan(y)) return {op == BinaryOp::Ne};
      c = x < y ? -1 : x > y ? 1 : 0;
    } else if (a.v.index() == 3 && b.v.index() == 3) {
      int k = std::get<std::string>(a.v).compare(std::get<std::string>(b.v));
      c = k < 0 ? -1 : k > 0 ? 1 : 0;
    } else if (a.v.index() == 2 && b.v.index() == 2) {
      c = std::get<bool>(a.v) == std::get<bool>(b.v) ? 0 : 1;
      if (op != BinaryOp::Eq && op != BinaryOp::Ne) throw RefError{};
    } else {
      throw RefError{};
    }
    switch (op) {
      case BinaryOp::Eq: return {c == 0};
      case BinaryOp::Ne: return {c != 0};
      case BinaryOp::Lt: return {c < 0};
      case BinaryOp::Le: return {c <= 0};
      case BinaryOp::Gt: return {c > 0};
      case BinaryOp::Ge: return {c >= 0};
      default: throw RefError{};
    }
  }

  static Path sub(const Path* p, std::size_t i) {
    Path q = *p;
    q.push_back(i);
    return q;
  }

  RefValue eval_child(const Expr& e, std::size_t i, Env& env, const Path* path) {
    if (!path) return eval(e.child(i), env, nullptr);
    Path q = sub(path, i);
    return eval(e.child(i), env, &q);
  }

  RefValue eval(const Expr& e, Env& env, const Path* path) {
    if (++steps > max_steps) throw RefError{};
    if (path && on_visit) on_visit(*path);
    switch (e.kind()) {
      case ExprKind::IntLit:
      case ExprKind::FloatLit:
      case ExprKind::BoolLit:
      case ExprKind::StrLit:
        return from_literal(e);
      case ExprKind::Error:
        throw RefError{};
      case ExprKind::Var: {
        auto it = env.find(e.text());
        if (it != env.end()) return it->second;
        return global(e.text());
      }
      case ExprKind::Unary: {
        RefValue x = eval_child(e, 0, env, path);
        if (e.unary_op() == UnaryOp::Not) return {!truth(x)};
        if (auto i = std::get_if<int64_t>(&x.v)) {
          if (*i == std::numeric_limits<int64_t>::min()) throw RefError{};
          return {-*i};
        }
        if (auto d = std::get_if<double>(&x.v)) return {-*d};
        throw RefError{};
      }
      case ExprKind::BinOp: {
        BinaryOp op = e.binary_op();
        RefValue l = eval_child(e, 0, env, path);
        if (op == BinaryOp::And) return truth(l) ? RefValue{truth(eval_child(e, 1, env, path))} : RefValue{false};
        if (op == BinaryOp::Or) return truth(l) ? RefValue{true} : RefValue{truth(eval_child(e, 1, env, path))};
        RefValue r = eval_child(e, 1, env, path);
        if (is_comparison(op)) return compare(op, l, r);
        return arith(op, l, r);
      }
      case ExprKind::Slice: {
        RefValue b = eval_child(e, 0, env, path);
        auto s = std::get_if<std::string>(&b.v);
        if (!s) throw RefError{};
        std::u32string u = decode(*s);
        int64_t n = static_cast<int64_t>(u.size());
        int64_t lo = std::min(std::max<int64_t>(e.slice_lo(), 0), n);
        int64_t hi = std::min(std::max<int64_t>(e.slice_hi(), 0), n);
        if (hi <= lo) return {std::string()};
        return {encode(u.substr(lo, hi - lo))};
      }
      case ExprKind::Cond: {
        bool g = truth(eval_child(e, 1, env, path));
        return eval_child(e, g ? 0 : 2, env, path);
      }
      case ExprKind::Lambda: {
        Closure c{e, std::make_shared<Env>(env), path ? *path : Path{}, path != nullptr};
        return {c};
      }
      case ExprKind::Call:
        return call(e, env, path);
    }
    throw RefError{};
  }

  RefValue call(const Expr& e, Env& env, const Path* path) {
    std::vector<RefValue> args;
    for (std::size_t i = 1; i < e.size(); ++i) args.push_back(eval_child(e, i, env, path));
    const Expr& callee = e.callee();
    if (callee.is(ExprKind::Lambda)) {
      RefValue cv = eval_child(e, 0, env, path);
      const Closure& c = std::get<Closure>(cv.v);
      Env inner = *c.env;
      const auto& ps = c.lambda.lambda_params();
      for (std::size_t i = 0; i < ps.size(); ++i) {
        if (i < args.size()) {
          inner[ps[i]] = args[i];
          continue;
        }
        auto d = c.lambda.lambda_default(i);
        if (!d) throw RefError{};
        inner[ps[i]] = eval(*d, *c.env, nullptr);
      }
      if (c.in_goal) {
        Path q = c.path;
        q.push_back(c.lambda.size() - 1);
        return eval(c.lambda.lambda_body(), inner, &q);
      }
      return eval(c.lambda.lambda_body(), inner, nullptr);
    }
    std::string name = callee.text();
    if (name == "float") {
      if (args.size() != 1 || !is_num(args[0])) throw RefError{};
      return {dbl(args[0])};
    }
    if (name == "abs") {
      if (args.size() != 1) throw RefError{};
      if (auto i = std::get_if<int64_t>(&args[0].v)) {
        if (*i == std::numeric_limits<int64_t>::min()) throw RefError{};
        return {*i < 0 ? -*i : *i};
      }
      return {std::fabs(dbl(args[0]))};
    }
    if (name == "len") {
      auto s = std::get_if<std::string>(&args.at(0).v);
      if (!s) throw RefError{};
      return {static_cast<int64_t>(decode(*s).size())};
    }
    if (name == "float.is_integer") {
      double d = dbl(args.at(0));
      return {std::isfinite(d) && std::floor(d) == d};
    }
    if (name == "math.pow") {
      double x = dbl(args.at(0)), y = dbl(args.at(1));
      if (x == 0 && y < 0) throw RefError{};
      if (x < 0 && std::floor(y) != y) throw RefError{};
      return fin(std::pow(x, y));
    }
    if (name == "math.sqrt") {
      double x = dbl(args.at(0));
      if (x < 0) throw RefError{};
      return fin(std::sqrt(x));
    }
    const FuncDef* f = p_.find_func(name);
    if (!f || f->stub || args.size() != f->params.size()) throw RefError{};
    Env local;
    for (std::size_t i = 0; i < args.size(); ++i) local[f->params[i].name] = args[i];
    if (++depth_ > 400) {
      --depth_;
      throw RefError{};
    }
    try {
      RefValue r = exec(f->body, local);
      --depth_;
      return r;
    } catch (...) {
      --depth_;
      throw;
    }
  }

  RefValue exec(const Block& b, Env& env) {
    for (const auto& s : b) {
      switch (s.kind) {
        case Stmt::Kind::Assign:
          env[s.name] = eval(s.value, env, nullptr);
          break;
        case Stmt::Kind::Return:
          return eval(s.value, env, nullptr);
        case Stmt::Kind::If: {
          bool g = truth(eval(s.value, env, nullptr));
          const Block& branch = g ? s.then_block : s.else_block;
          // A conditional definition falls through; a returning if does not.
          if (!branch.empty() && branch.back().kind == Stmt::Kind::Assign) {
            for (const auto& a : branch) env[a.name] = eval(a.value, env, nullptr);
            break;
          }
          return exec(branch, env);
        }
      }
    }
    throw RefError{};
  }

  const Program& p_;
  std::map<std::string, RefValue> globals_;
  int depth_ = 0;
};

}  // namespace stepwise::testing
