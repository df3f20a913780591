// Well-typed random ground programs for the oracle comparison. Locals are
// built from operations that cannot fail, so eager and lazy binding agree.
#pragma once

#include <random>
#include <string>
#include <vector>

namespace stepwise::testing {

class RandomProgram {
 public:
  explicit RandomProgram(uint32_t seed) : rng_(seed) {}

  std::string make() {
    globals_.clear();
    funcs_.clear();
    std::string out = "import math\n\n";
    int ng = pick(4);
    for (int i = 0; i < ng; ++i) {
      Ty t = any_type();
      std::string name = "g" + std::to_string(i);
      out += name + ": " + type_name(t) + " = " + expr(t, 2, {}) + "\n";
      globals_.push_back({name, t});
    }
    if (ng) out += "\n";
    int nf = pick(3);
    for (int i = 0; i < nf; ++i) out += function("f" + std::to_string(i)) + "\n";
    if (pick(3) == 0) out += recursive() + "\n";
    std::string goal;
    if (!funcs_.empty() && pick(3)) {
      const Func& f = funcs_[pick(static_cast<int>(funcs_.size()))];
      goal = call_of(f, 3, {});
      if (pick(2)) goal = expr(f.result, 2, {}) + op_for(f.result) + goal;
    } else {
      goal = expr(any_type(), 3, {});
    }
    out += "# |-\n\n" + goal + "\n";
    return out;
  }

 private:
  enum class Ty { Int, Float, Bool, Str };
  struct Named {
    std::string name;
    Ty type;
  };
  struct Func {
    std::string name;
    std::vector<Ty> params;
    Ty result;
  };

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  Ty any_type() { return static_cast<Ty>(pick(4)); }

  static std::string type_name(Ty t) {
    switch (t) {
      case Ty::Int: return "int";
      case Ty::Float: return "float";
      case Ty::Bool: return "bool";
      case Ty::Str: return "str";
    }
    return "int";
  }

  std::string literal(Ty t) {
    switch (t) {
      case Ty::Int: return std::to_string(pick(7) - 2);
      case Ty::Float: {
        static const char* fs[] = {"0.5", "2.0", "-1.5", "0.0", "3.25", "-4.0"};
        return fs[pick(6)];
      }
      case Ty::Bool: return pick(2) ? "True" : "False";
      case Ty::Str: {
        static const char* ss[] = {"''", "'ab'", "'What'", "'x y'", "'?'"};
        return ss[pick(5)];
      }
    }
    return "0";
  }

  // Globals may be unsafe, so safe expressions leave them out.
  std::string leaf(Ty t, const std::vector<Named>& locals, bool with_globals = true) {
    std::vector<std::string> names;
    for (const auto& v : locals)
      if (v.type == t) names.push_back(v.name);
    if (with_globals)
      for (const auto& v : globals_)
        if (v.type == t) names.push_back(v.name);
    if (!names.empty() && pick(2)) return names[pick(static_cast<int>(names.size()))];
    return literal(t);
  }

  std::string call(Ty t, int depth, const std::vector<Named>& locals) {
    std::vector<const Func*> fits;
    for (const auto& f : funcs_)
      if (f.result == t) fits.push_back(&f);
    if (fits.empty()) return leaf(t, locals);
    return call_of(*fits[pick(static_cast<int>(fits.size()))], depth, locals);
  }

  std::string call_of(const Func& f, int depth, const std::vector<Named>& locals) {
    std::string out = f.name + "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      if (i) out += ", ";
      out += f.name[0] == 'r' ? std::to_string(pick(4)) : expr(f.params[i], depth - 1, locals);
    }
    return out + ")";
  }

  // An operator combining two values of type t.
  std::string op_for(Ty t) {
    switch (t) {
      case Ty::Int:
      case Ty::Float: return pick(2) ? "+" : "*";
      case Ty::Bool: return pick(2) ? " and " : " or ";
      case Ty::Str: return "+";
    }
    return "+";
  }

  std::string expr(Ty t, int depth, const std::vector<Named>& locals) {
    if (depth <= 0 || pick(4) == 0) return leaf(t, locals);
    int d = depth - 1;
    auto sub = [&](Ty u) { return expr(u, d, locals); };
    if (pick(6) == 0) return "(" + sub(t) + " if " + sub(Ty::Bool) + " else " + sub(t) + ")";
    if (pick(4) == 0) return call(t, depth, locals);
    switch (t) {
      case Ty::Int:
        switch (pick(7)) {
          case 0: return "(" + sub(Ty::Int) + "+" + sub(Ty::Int) + ")";
          case 1: return "(" + sub(Ty::Int) + "-" + sub(Ty::Int) + ")";
          case 2: return "(" + sub(Ty::Int) + "*" + sub(Ty::Int) + ")";
          case 3: return "(" + sub(Ty::Int) + "//" + sub(Ty::Int) + ")";
          case 4: return "(" + sub(Ty::Int) + "**" + std::to_string(pick(4) - 1) + ")";
          case 5: return "len(" + sub(Ty::Str) + ")";
          default: return "abs(" + sub(Ty::Int) + ")";
        }
      case Ty::Float:
        switch (pick(6)) {
          case 0: return "(" + sub(Ty::Float) + "+" + sub(Ty::Int) + ")";
          case 1: return "(" + sub(Ty::Float) + "*" + sub(Ty::Float) + ")";
          case 2: return "(" + sub(Ty::Int) + "/" + sub(Ty::Int) + ")";
          case 3: return "math.pow(" + sub(Ty::Float) + ", " + sub(Ty::Float) + ")";
          case 4: return "float(" + sub(Ty::Int) + ")";
          default: return "(" + sub(Ty::Float) + "-" + sub(Ty::Float) + ")";
        }
      case Ty::Bool:
        switch (pick(7)) {
          case 0: return "(" + sub(Ty::Bool) + " and " + sub(Ty::Bool) + ")";
          case 1: return "(" + sub(Ty::Bool) + " or " + sub(Ty::Bool) + ")";
          case 2: return "not " + sub(Ty::Bool);
          case 3: return "(" + sub(Ty::Str) + "==" + sub(Ty::Str) + ")";
          case 4: return "(" + sub(Ty::Float) + "<" + sub(Ty::Int) + ")";
          case 5: return "float.is_integer(" + sub(Ty::Float) + ")";
          default: return "(" + sub(Ty::Int) + (pick(2) ? "<=" : "!=") + sub(Ty::Int) + ")";
        }
      case Ty::Str:
        switch (pick(3)) {
          case 0: return "(" + sub(Ty::Str) + "+" + sub(Ty::Str) + ")";
          case 1: return sub(Ty::Str) + "[" + std::to_string(pick(3)) + ":" + std::to_string(pick(4) + 1) + "]";
          default: return leaf(Ty::Str, locals);
        }
    }
    return leaf(t, locals);
  }

  // Expressions that cannot evaluate to ERROR for any arguments.
  std::string safe(Ty t, int depth, const std::vector<Named>& locals) {
    if (depth <= 0 || pick(3) == 0) return leaf(t, locals, false);
    int d = depth - 1;
    switch (t) {
      case Ty::Int: return "(" + safe(Ty::Int, d, locals) + (pick(2) ? "+" : "-") + safe(Ty::Int, d, locals) + ")";
      case Ty::Float: return "(" + safe(Ty::Float, d, locals) + "+" + safe(Ty::Float, d, locals) + ")";
      case Ty::Bool: return "(" + safe(Ty::Int, d, locals) + "<" + safe(Ty::Int, d, locals) + ")";
      case Ty::Str: return "(" + safe(Ty::Str, d, locals) + "+" + safe(Ty::Str, d, locals) + ")";
    }
    return leaf(t, locals, false);
  }

  std::string function(const std::string& name) {
    Func f{name, {}, any_type()};
    std::vector<Named> locals;
    std::string sig = "def " + name + "(";
    int np = pick(3) + 1;
    for (int i = 0; i < np; ++i) {
      Ty t = any_type();
      std::string p = name + "p" + std::to_string(i);
      f.params.push_back(t);
      locals.push_back({p, t});
      sig += (i ? ", " : "") + p + ": " + type_name(t);
    }
    sig += ") -> " + type_name(f.result) + ":\n";
    std::string body;
    if (pick(2)) {
      Ty lt = any_type();
      std::string l = name + "t";
      body += "    " + l + " = " + safe(lt, 2, locals) + "\n";
      locals.push_back({l, lt});
    }
    if (pick(2)) {
      body += "    if " + expr(Ty::Bool, 2, locals) + ":\n";
      body += "        return " + expr(f.result, 2, locals) + "\n";
      body += "    else:\n";
      body += "        return " + expr(f.result, 2, locals) + "\n";
    } else {
      body += "    return " + expr(f.result, 3, locals) + "\n";
    }
    funcs_.push_back(f);
    return sig + body;
  }

  std::string recursive() {
    std::string name = "r" + std::to_string(funcs_.size());
    funcs_.push_back({name, {Ty::Int}, Ty::Int});
    return "def " + name + "(n: int) -> int:\n    return 1 if n<=0 else " + std::to_string(pick(3) + 1) + "*" + name +
           "(n-1)+n\n";
  }

  std::mt19937 rng_;
  std::vector<Named> globals_;
  std::vector<Func> funcs_;
};

}  // namespace stepwise::testing
