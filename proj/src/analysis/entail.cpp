// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

// Linear integer reasoning for guard entailment: formulas are put in
// disjunctive normal form and each disjunct is refuted by Fourier-Motzkin
// elimination with integer tightening. Anything non-linear becomes an opaque
// atom matched by its printed form.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stepwise/analysis.hpp"
#include "stepwise/semantics.hpp"

namespace stepwise {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Proved: return "proved";
    case Verdict::Refuted: return "refuted";
    case Verdict::Unknown: return "unknown";
  }
  return "?";
}

namespace {

struct GiveUp {};

int64_t add(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw GiveUp{};
  return r;
}

int64_t mul(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw GiveUp{};
  return r;
}

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

struct Lin {
  std::map<std::string, int64_t> coef;
  int64_t c = 0;

  void add_scaled(const Lin& o, int64_t k) {
    for (const auto& [v, a] : o.coef) {
      int64_t n = add(coef[v], mul(a, k));
      if (n == 0) coef.erase(v); else coef[v] = n;
    }
    c = add(c, mul(o.c, k));
  }
  bool constant() const { return coef.empty(); }
};

enum class Rel { Le, Eq, Ne };

// lhs REL 0
struct Constraint {
  Lin lhs;
  Rel rel;
};

struct Formula;
using F = std::shared_ptr<const Formula>;

struct Formula {
  enum class K { True, False, Atom, Prop, And, Or, Not } k;
  Constraint atom;
  std::string prop;
  std::vector<F> kids;
};

F mk(Formula::K k) {
  auto f = std::make_shared<Formula>();
  f->k = k;
  return f;
}
F f_true() { return mk(Formula::K::True); }
F f_false() { return mk(Formula::K::False); }
F f_atom(Constraint c) {
  auto f = std::make_shared<Formula>();
  f->k = Formula::K::Atom;
  f->atom = std::move(c);
  return f;
}
F f_prop(std::string key) {
  auto f = std::make_shared<Formula>();
  f->k = Formula::K::Prop;
  f->prop = std::move(key);
  return f;
}
F f_bin(Formula::K k, F a, F b) {
  auto f = std::make_shared<Formula>();
  f->k = k;
  f->kids = {std::move(a), std::move(b)};
  return f;
}
F f_not(F a) {
  auto f = std::make_shared<Formula>();
  f->k = Formula::K::Not;
  f->kids = {std::move(a)};
  return f;
}

class Builder {
 public:
  Builder(const TypeEnv& env, std::vector<std::string>& notes) : env_(env), notes_(notes) {}

  F build(const Expr& e) {
    if (auto v = eval_ground(e)) {
      if (v->is(ExprKind::BoolLit)) return v->bool_value() ? f_true() : f_false();
    }
    switch (e.kind()) {
      case ExprKind::BoolLit: return e.bool_value() ? f_true() : f_false();
      case ExprKind::Unary:
        if (e.unary_op() == UnaryOp::Not) return f_not(build(e.child(0)));
        break;
      case ExprKind::BinOp: {
        BinaryOp op = e.binary_op();
        if (op == BinaryOp::And) return f_bin(Formula::K::And, build(e.child(0)), build(e.child(1)));
        if (op == BinaryOp::Or) return f_bin(Formula::K::Or, build(e.child(0)), build(e.child(1)));
        if (is_comparison(op)) return comparison(e);
        break;
      }
      case ExprKind::Cond: {
        F c = build(e.child(1));
        return f_bin(Formula::K::Or, f_bin(Formula::K::And, c, build(e.child(0))),
                     f_bin(Formula::K::And, f_not(c), build(e.child(2))));
      }
      default: break;
    }
    return f_prop(print_expr(e));
  }

 private:
  F comparison(const Expr& e) {
    const Expr& l = e.child(0);
    const Expr& r = e.child(1);
    BinaryOp op = e.binary_op();
    // Lift a conditional operand: (a if c else b) > 0.
    for (std::size_t side = 0; side < 2; ++side) {
      Path p;
      if (find_arith_cond(e.child(side), p)) {
        p.insert(p.begin(), side);
        const Expr& cond = expr_at(e, p);
        F c = build(cond.child(1));
        F t = build(replace_at(e, p, cond.child(0)));
        F f = build(replace_at(e, p, cond.child(2)));
        return f_bin(Formula::K::Or, f_bin(Formula::K::And, c, t), f_bin(Formula::K::And, f_not(c), f));
      }
    }
    // Booleans compared with literals.
    if (op == BinaryOp::Eq || op == BinaryOp::Ne) {
      bool neg = op == BinaryOp::Ne;
      if (r.is(ExprKind::BoolLit)) {
        F x = build(l);
        return (r.bool_value() != neg) ? x : f_not(x);
      }
      if (l.is(ExprKind::BoolLit)) {
        F x = build(r);
        return (l.bool_value() != neg) ? x : f_not(x);
      }
    }
    auto ll = linear(l);
    auto rl = linear(r);
    if (ll && rl) {
      Lin d = *ll;
      d.add_scaled(*rl, -1);
      Lin nd;
      nd.add_scaled(d, -1);
      switch (op) {
        case BinaryOp::Lt: d.c = add(d.c, 1); return f_atom({d, Rel::Le});
        case BinaryOp::Le: return f_atom({d, Rel::Le});
        case BinaryOp::Gt: nd.c = add(nd.c, 1); return f_atom({nd, Rel::Le});
        case BinaryOp::Ge: return f_atom({nd, Rel::Le});
        case BinaryOp::Eq: return f_atom({d, Rel::Eq});
        case BinaryOp::Ne: return f_atom({d, Rel::Ne});
        default: break;
      }
    }
    notes_.push_back(print_expr(e));
    // Opaque comparison: canonical orientation so a<b and b>a match.
    switch (op) {
      case BinaryOp::Gt: return f_prop(print_expr(Expr::binary(BinaryOp::Lt, r, l)));
      case BinaryOp::Ge: return f_prop(print_expr(Expr::binary(BinaryOp::Le, r, l)));
      case BinaryOp::Ne: return f_not(f_prop(print_expr(Expr::binary(BinaryOp::Eq, l, r))));
      default: return f_prop(print_expr(e));
    }
  }

  static bool find_arith_cond(const Expr& e, Path& p) {
    if (e.is(ExprKind::Cond)) return true;
    bool arith = (e.is(ExprKind::BinOp) && is_arith(e.binary_op())) ||
                 (e.is(ExprKind::Unary) && e.unary_op() == UnaryOp::Neg) ||
                 (e.is(ExprKind::Call) && e.callee_name() == "float");
    if (!arith) return false;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e.is(ExprKind::Call) && i == 0) continue;
      p.push_back(i);
      if (find_arith_cond(e.child(i), p)) return true;
      p.pop_back();
    }
    return false;
  }

  bool int_typed(const Expr& e) const {
    try {
      return infer_type(e, env_).is(Type::Kind::Int);
    } catch (const std::exception&) {
      return false;
    }
  }

  std::optional<Lin> linear(const Expr& e) {
    try {
      return lin(e);
    } catch (const GiveUp&) {
      return std::nullopt;
    }
  }

  Lin lin(const Expr& e) {
    Lin out;
    switch (e.kind()) {
      case ExprKind::IntLit:
        out.c = e.int_value();
        return out;
      case ExprKind::FloatLit: {
        double v = e.float_value();
        if (v != std::floor(v) || std::fabs(v) >= 9007199254740992.0) throw GiveUp{};
        out.c = static_cast<int64_t>(v);
        return out;
      }
      case ExprKind::Var:
        if (!int_typed(e)) throw GiveUp{};
        out.coef[e.text()] = 1;
        return out;
      case ExprKind::Unary:
        if (e.unary_op() != UnaryOp::Neg) throw GiveUp{};
        out.add_scaled(lin(e.child(0)), -1);
        return out;
      case ExprKind::Call:
        if (e.callee_name() == "float" && e.size() == 2 && int_typed(e.child(1))) return lin(e.child(1));
        break;
      case ExprKind::BinOp: {
        BinaryOp op = e.binary_op();
        if (op == BinaryOp::Add || op == BinaryOp::Sub) {
          out = lin(e.child(0));
          out.add_scaled(lin(e.child(1)), op == BinaryOp::Add ? 1 : -1);
          return out;
        }
        if (op == BinaryOp::Mul) {
          std::optional<Lin> a, b;
          try { a = lin(e.child(0)); } catch (const GiveUp&) {}
          try { b = lin(e.child(1)); } catch (const GiveUp&) {}
          if (a && b && a->constant()) {
            out.add_scaled(*b, a->c);
            return out;
          }
          if (a && b && b->constant()) {
            out.add_scaled(*a, b->c);
            return out;
          }
        }
        break;
      }
      default: break;
    }
    // Opaque integer term: the same text always denotes the same value.
    bool has_error = false;
    for (const auto& [p, s] : subterms(e)) has_error = has_error || s.is(ExprKind::Error) || s.is(ExprKind::Lambda);
    if (has_error || !int_typed(e)) throw GiveUp{};
    out.coef["<" + print_expr(e) + ">"] = 1;
    return out;
  }

  const TypeEnv& env_;
  std::vector<std::string>& notes_;
};

struct Conj {
  std::vector<Constraint> cs;
  std::map<std::string, bool> props;
  bool dead = false;
};

constexpr std::size_t kMaxDisjuncts = 512;

std::vector<Conj> product(const std::vector<Conj>& a, const std::vector<Conj>& b) {
  std::vector<Conj> out;
  for (const auto& x : a) {
    for (const auto& y : b) {
      Conj c = x;
      c.cs.insert(c.cs.end(), y.cs.begin(), y.cs.end());
      for (const auto& [k, v] : y.props) {
        auto it = c.props.find(k);
        if (it != c.props.end() && it->second != v) c.dead = true;
        c.props[k] = v;
      }
      if (!c.dead) out.push_back(std::move(c));
      if (out.size() > kMaxDisjuncts) throw GiveUp{};
    }
  }
  return out;
}

std::vector<Conj> dnf(const F& f, bool neg) {
  using K = Formula::K;
  switch (f->k) {
    case K::True: return neg ? std::vector<Conj>{} : std::vector<Conj>{Conj{}};
    case K::False: return neg ? std::vector<Conj>{Conj{}} : std::vector<Conj>{};
    case K::Atom: {
      Constraint c = f->atom;
      if (!neg) return {Conj{{c}, {}, false}};
      if (c.rel == Rel::Eq) return {Conj{{{c.lhs, Rel::Ne}}, {}, false}};
      if (c.rel == Rel::Ne) return {Conj{{{c.lhs, Rel::Eq}}, {}, false}};
      // not (l <= 0)  <=>  -l + 1 <= 0
      Lin n;
      n.add_scaled(c.lhs, -1);
      n.c = add(n.c, 1);
      return {Conj{{{n, Rel::Le}}, {}, false}};
    }
    case K::Prop: {
      Conj c;
      c.props[f->prop] = !neg;
      return {c};
    }
    case K::Not: return dnf(f->kids[0], !neg);
    case K::And:
    case K::Or: {
      bool conj = (f->k == K::And) != neg;
      auto a = dnf(f->kids[0], neg);
      auto b = dnf(f->kids[1], neg);
      if (conj) return product(a, b);
      a.insert(a.end(), b.begin(), b.end());
      if (a.size() > kMaxDisjuncts) throw GiveUp{};
      return a;
    }
  }
  return {};
}

int64_t gcd_of(const Lin& l) {
  int64_t g = 0;
  for (const auto& [v, a] : l.coef) g = std::gcd(g, a < 0 ? -a : a);
  return g;
}

// Substitute var := expr (expr given as a Lin not containing var).
Lin subst(const Lin& l, const std::string& var, const Lin& value) {
  auto it = l.coef.find(var);
  if (it == l.coef.end()) return l;
  Lin out = l;
  int64_t a = it->second;
  out.coef.erase(var);
  out.add_scaled(value, a);
  return out;
}

// True when the constraints have no integer solution. False means "not shown".
bool unsat_le_eq(std::vector<Constraint> cs) {
  // Eliminate equalities.
  while (true) {
    auto it = std::find_if(cs.begin(), cs.end(), [](const Constraint& c) { return c.rel == Rel::Eq; });
    if (it == cs.end()) break;
    Constraint eq = *it;
    cs.erase(it);
    if (eq.lhs.constant()) {
      if (eq.lhs.c != 0) return true;
      continue;
    }
    int64_t g = gcd_of(eq.lhs);
    if (eq.lhs.c % g != 0) return true;
    std::string unit;
    for (const auto& [v, a] : eq.lhs.coef)
      if (a == 1 || a == -1) {
        unit = v;
        break;
      }
    if (unit.empty()) {
      Lin n;
      n.add_scaled(eq.lhs, -1);
      cs.push_back({eq.lhs, Rel::Le});
      cs.push_back({n, Rel::Le});
      continue;
    }
    // a*x + rest = 0  =>  x = -rest/a
    int64_t a = eq.lhs.coef[unit];
    Lin rest = eq.lhs;
    rest.coef.erase(unit);
    Lin value;
    value.add_scaled(rest, a == 1 ? -1 : 1);
    for (auto& c : cs) c.lhs = subst(c.lhs, unit, value);
  }
  // Fourier-Motzkin on the inequalities.
  for (int round = 0; round < 64; ++round) {
    std::vector<Constraint> next;
    std::set<std::string> vars;
    for (auto& c : cs) {
      if (c.lhs.constant()) {
        if (c.lhs.c > 0) return true;
        continue;
      }
      int64_t g = gcd_of(c.lhs);
      if (g > 1) {
        for (auto& [v, a] : c.lhs.coef) a /= g;
        c.lhs.c = -floor_div(-c.lhs.c, g);
      }
      for (const auto& [v, a] : c.lhs.coef) vars.insert(v);
      next.push_back(c);
    }
    cs = std::move(next);
    if (vars.empty()) return false;
    std::string best;
    std::size_t best_cost = SIZE_MAX;
    for (const auto& v : vars) {
      std::size_t pos = 0, neg = 0;
      for (const auto& c : cs) {
        auto it = c.lhs.coef.find(v);
        if (it == c.lhs.coef.end()) continue;
        (it->second > 0 ? pos : neg)++;
      }
      std::size_t cost = pos * neg;
      if (cost < best_cost) {
        best_cost = cost;
        best = v;
      }
    }
    std::vector<Constraint> pos, neg, keep;
    for (auto& c : cs) {
      auto it = c.lhs.coef.find(best);
      if (it == c.lhs.coef.end()) keep.push_back(c);
      else if (it->second > 0) pos.push_back(c);
      else neg.push_back(c);
    }
    for (const auto& p : pos) {
      for (const auto& n : neg) {
        int64_t a = p.lhs.coef.at(best);
        int64_t b = -n.lhs.coef.at(best);
        Lin comb;
        comb.add_scaled(p.lhs, b);
        comb.add_scaled(n.lhs, a);
        comb.coef.erase(best);
        keep.push_back({comb, Rel::Le});
      }
    }
    if (keep.size() > 4000) return false;
    cs = std::move(keep);
  }
  return false;
}

bool unsat(const Conj& c) {
  if (c.dead) return true;
  std::vector<Constraint> base;
  std::vector<Constraint> ne;
  for (const auto& x : c.cs) (x.rel == Rel::Ne ? ne : base).push_back(x);
  if (ne.size() > 8) ne.resize(8);  // dropping constraints keeps refutations sound
  // Each disequality splits into l <= -1 or l >= 1.
  std::size_t n = ne.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<Constraint> cs = base;
    for (std::size_t i = 0; i < n; ++i) {
      Lin l = ne[i].lhs;
      if (mask & (std::size_t{1} << i)) {
        l.c = add(l.c, 1);  // l + 1 <= 0
      } else {
        Lin m;
        m.add_scaled(l, -1);
        m.c = add(m.c, 1);  // -l + 1 <= 0
        l = m;
      }
      cs.push_back({l, Rel::Le});
    }
    if (!unsat_le_eq(cs)) return false;
  }
  return true;
}

bool all_unsat(const std::vector<Conj>& d) {
  for (const auto& c : d)
    if (!unsat(c)) return false;
  return true;
}

}  // namespace

EntailResult entails(const std::vector<Expr>& guards, const Expr& claim, const TypeEnv& env) {
  EntailResult r;
  if (auto v = eval_ground(claim); v && v->is(ExprKind::BoolLit)) {
    r.verdict = v->bool_value() ? Verdict::Proved : Verdict::Refuted;
    return r;
  }
  try {
    Builder b(env, r.unsupported);
    F g = f_true();
    for (const auto& x : guards) g = f_bin(Formula::K::And, g, b.build(x));
    F c = b.build(claim);
    if (all_unsat(dnf(f_bin(Formula::K::And, g, f_not(c)), false))) {
      r.verdict = Verdict::Proved;
    } else if (all_unsat(dnf(f_bin(Formula::K::And, g, c), false))) {
      r.verdict = Verdict::Refuted;
    }
  } catch (const GiveUp&) {
    r.unsupported.push_back("formula too large");
  }
  return r;
}

namespace {

void conjuncts(const Expr& e, std::vector<Expr>& out) {
  if (e.is(ExprKind::BinOp) && e.binary_op() == BinaryOp::And) {
    conjuncts(e.child(0), out);
    conjuncts(e.child(1), out);
    return;
  }
  out.push_back(e);
}

void int_constants(const Expr& e, std::set<int64_t>& out) {
  for (const auto& [p, s] : subterms(e))
    if (s.is(ExprKind::IntLit)) out.insert(s.int_value());
}

}  // namespace

std::optional<Expr> forced_value(const std::vector<Expr>& guards, const std::string& var, const TypeEnv& env) {
  std::vector<Expr> facts;
  for (const auto& g : guards) conjuncts(g, facts);
  const Type* t = env.find(var);
  Expr v = Expr::var(var);
  if (t && t->is(Type::Kind::Int)) {
    std::set<int64_t> consts;
    for (const auto& g : guards) int_constants(g, consts);
    std::set<int64_t> candidates;
    for (int64_t c : consts)
      for (int64_t d : {-1, 0, 1}) {
        int64_t x;
        if (!__builtin_add_overflow(c, d, &x)) candidates.insert(x);
      }
    for (int64_t c : candidates) {
      if (entails(guards, Expr::binary(BinaryOp::Eq, v, Expr::int_lit(c)), env).verdict == Verdict::Proved)
        return Expr::int_lit(c);
    }
  }
  if (t && t->is(Type::Kind::Bool)) {
    for (bool b : {true, false})
      if (entails(guards, b ? v : Expr::unary(UnaryOp::Not, v), env).verdict == Verdict::Proved)
        return Expr::bool_lit(b);
  }
  std::optional<Expr> symbolic;
  for (const auto& f : facts) {
    if (!f.is(ExprKind::BinOp) || f.binary_op() != BinaryOp::Eq) continue;
    for (int side = 0; side < 2; ++side) {
      const Expr& a = f.child(side);
      const Expr& b = f.child(1 - side);
      if (!a.is_var(var) || occurs_free(b, var)) continue;
      if (b.is_literal()) return b;
      if (!symbolic) symbolic = b;
    }
  }
  return symbolic;
}

}  // namespace stepwise
