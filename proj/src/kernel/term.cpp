// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <set>
#include <sstream>

#include "kernel/internal.hpp"

namespace stepwise {

// ---- terms ----

Term Term::meta(std::string name, std::string sort) {
  Term t;
  t.kind = Kind::Meta;
  t.name = std::move(name);
  t.sort = std::move(sort);
  return t;
}

Term Term::apply(std::string symbol, std::vector<Term> args, std::string sort) {
  Term t;
  t.name = std::move(symbol);
  t.args = std::move(args);
  t.sort = std::move(sort);
  return t;
}

Term Term::embedded(std::shared_ptr<const Embedded> payload, std::string sort) {
  Term t;
  t.kind = Kind::Embed;
  t.embed = std::move(payload);
  t.sort = std::move(sort);
  return t;
}

bool Term::closed() const {
  if (kind == Kind::Meta) return false;
  for (const auto& a : args)
    if (!a.closed()) return false;
  return true;
}

bool operator==(const Term& a, const Term& b) {
  if (a.kind != b.kind || a.sort != b.sort) return false;
  switch (a.kind) {
    case Term::Kind::Meta: return a.name == b.name;
    case Term::Kind::Embed: return a.embed->equals(*b.embed);
    case Term::Kind::Apply: return a.name == b.name && a.args == b.args;
  }
  return false;
}

bool RelationInstance::closed() const {
  for (const auto& a : args)
    if (!a.closed()) return false;
  return true;
}

bool operator==(const RelationInstance& a, const RelationInstance& b) {
  return a.relation == b.relation && a.args == b.args;
}

namespace {

const Term& walk(const Term& t, const Subst& s) {
  const Term* cur = &t;
  while (cur->is(Term::Kind::Meta)) {
    auto it = s.find(cur->name);
    if (it == s.end()) break;
    cur = &it->second;
  }
  return *cur;
}

bool occurs(const std::string& name, const Term& t, const Subst& s) {
  const Term& w = walk(t, s);
  if (w.is(Term::Kind::Meta)) return w.name == name;
  for (const auto& a : w.args)
    if (occurs(name, a, s)) return true;
  return false;
}

}  // namespace

Term apply_subst(const Term& t, const Subst& s) {
  const Term& w = walk(t, s);
  if (w.args.empty()) return w;
  Term out = w;
  for (auto& a : out.args) a = apply_subst(a, s);
  return out;
}

RelationInstance apply_subst(const RelationInstance& r, const Subst& s) {
  RelationInstance out = r;
  for (auto& a : out.args) a = apply_subst(a, s);
  return out;
}

bool unify(const Term& a0, const Term& b0, Subst& s) {
  const Term& a = walk(a0, s);
  const Term& b = walk(b0, s);
  if (a.is(Term::Kind::Meta) && b.is(Term::Kind::Meta) && a.name == b.name) return true;
  if (a.is(Term::Kind::Meta) || b.is(Term::Kind::Meta)) {
    const Term& m = a.is(Term::Kind::Meta) ? a : b;
    const Term& v = a.is(Term::Kind::Meta) ? b : a;
    if (m.sort != v.sort || occurs(m.name, v, s)) return false;
    s[m.name] = v;
    return true;
  }
  if (a.kind != b.kind || a.sort != b.sort) return false;
  if (a.is(Term::Kind::Embed)) return a.embed->equals(*b.embed);
  if (a.name != b.name || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!unify(a.args[i], b.args[i], s)) return false;
  return true;
}

bool unify(const RelationInstance& a, const RelationInstance& b, Subst& s) {
  if (a.relation != b.relation || a.args.size() != b.args.size()) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!unify(a.args[i], b.args[i], s)) return false;
  return true;
}

void collect_metas(const Term& t, std::map<std::string, std::string>& out) {
  if (t.is(Term::Kind::Meta)) out.emplace(t.name, t.sort);
  for (const auto& a : t.args) collect_metas(a, out);
}

// ---- logics ----

bool SortDecl::numerals() const {
  bool zero = false, succ = false;
  for (const auto& c : ctors) {
    if (c.name == "O" && c.args.empty()) zero = true;
    if (c.name == "S" && c.args.size() == 1 && c.args[0] == name) succ = true;
  }
  return zero && succ;
}

const Constructor* SortDecl::list_nil() const {
  if (ctors.size() != 2 || !list_cons()) return nullptr;
  for (const auto& c : ctors)
    if (c.args.empty()) return &c;
  return nullptr;
}

const Constructor* SortDecl::list_cons() const {
  for (const auto& c : ctors)
    if (c.args.size() == 3 && c.args[2] == name) return &c;
  return nullptr;
}

const SortDecl* Logic::find_sort(const std::string& n) const {
  for (const auto& s : sorts)
    if (s.name == n) return &s;
  return nullptr;
}

const RelationDecl* Logic::find_relation(const std::string& n) const {
  for (const auto& r : relations)
    if (r.name == n) return &r;
  return nullptr;
}

const InferenceRule* Logic::find_rule(const std::string& n) const {
  for (const auto& r : rules)
    if (r.name == n) return &r;
  return nullptr;
}

const SortDecl* Logic::ctor_sort(const std::string& ctor) const {
  for (const auto& s : sorts)
    for (const auto& c : s.ctors)
      if (c.name == ctor) return &s;
  return nullptr;
}

LogicError::LogicError(std::string c, int l, const std::string& msg)
    : std::runtime_error(l > 0 ? "line " + std::to_string(l) + ": " + msg : msg), code(std::move(c)), line(l) {}

bool is_builtin_action(const std::string& name) { return kern::find_builtin(name) != nullptr; }

// ---- term syntax ----

namespace {

struct Token {
  enum class Kind { Ident, Int, Quote, Punct, End };
  Kind kind = Kind::End;
  std::string text;
};

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i + 1;
      while (j < s.size()) {
        char d = s[j];
        bool word = std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '\'';
        bool hyphen = d == '-' && j + 1 < s.size() && std::isalnum(static_cast<unsigned char>(s[j + 1]));
        if (!word && !hyphen) break;
        ++j;
      }
      out.push_back({Token::Kind::Ident, s.substr(i, j - i)});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Token::Kind::Int, s.substr(i, j - i)});
      i = j;
    } else if (c == '`') {
      auto j = s.find('`', i + 1);
      if (j == std::string::npos) throw LogicError("SyntaxError", 0, "unterminated `");
      out.push_back({Token::Kind::Quote, s.substr(i + 1, j - i - 1)});
      i = j + 1;
    } else if (std::string("(),[]:|/=@!").find(c) != std::string::npos) {
      out.push_back({Token::Kind::Punct, std::string(1, c)});
      ++i;
    } else {
      throw LogicError("SyntaxError", 0, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Token::Kind::End, ""});
  return out;
}

bool capitalized(const std::string& s) { return !s.empty() && std::isupper(static_cast<unsigned char>(s[0])); }

class TermParser {
 public:
  TermParser(const Logic& l, std::vector<Token> toks, const EmbedEnv& env, std::map<std::string, std::string>* metas)
      : l_(l), toks_(std::move(toks)), env_(env), metas_(metas) {}

  const Token& peek() const { return toks_[pos_]; }
  bool at_punct(const char* p) const { return peek().kind == Token::Kind::Punct && peek().text == p; }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  Token next() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }

  void expect(const char* p) {
    if (!at_punct(p)) throw LogicError("SyntaxError", 0, std::string("expected '") + p + "' before '" + peek().text + "'");
    ++pos_;
  }

  Term term(const std::string& sort_name) {
    const SortDecl* sort = l_.find_sort(sort_name);
    if (!sort) throw LogicError("UnknownSort", 0, "unknown sort " + sort_name);
    Token t = next();
    switch (t.kind) {
      case Token::Kind::Int: {
        if (!sort->numerals()) mismatch(t.text, sort_name);
        long n = std::stol(t.text);
        if (n > 10000) throw LogicError("SyntaxError", 0, "numeral " + t.text + " is too large");
        Term out = Term::apply("O", {}, sort_name);
        for (long i = 0; i < n; ++i) out = Term::apply("S", {out}, sort_name);
        return out;
      }
      case Token::Kind::Quote:
        if (sort->embed.empty()) mismatch("`" + t.text + "`", sort_name);
        return Term::embedded(kern::parse_embed(sort->embed, t.text, true, env_, metas_, sort_name), sort_name);
      case Token::Kind::Punct:
        if (t.text == "[") return list(*sort);
        throw LogicError("SyntaxError", 0, "unexpected '" + t.text + "'");
      case Token::Kind::End:
        throw LogicError("SyntaxError", 0, "unexpected end of term");
      case Token::Kind::Ident:
        break;
    }
    if (const SortDecl* owner = l_.ctor_sort(t.text)) {
      if (owner->name != sort_name) mismatch(t.text, sort_name);
      const Constructor* c = nullptr;
      for (const auto& k : owner->ctors)
        if (k.name == t.text) c = &k;
      std::vector<Term> args;
      if (!c->args.empty()) {
        expect("(");
        for (std::size_t i = 0; i < c->args.size(); ++i) {
          if (i) expect(",");
          args.push_back(term(c->args[i]));
        }
        expect(")");
      }
      return Term::apply(t.text, std::move(args), sort_name);
    }
    if (capitalized(t.text)) return meta(t.text, sort_name);
    if (sort->idents) {
      if (at_punct("(")) throw LogicError("SyntaxError", 0, t.text + " is not a constructor");
      return Term::apply(t.text, {}, sort_name);
    }
    if (!sort->embed.empty())
      return Term::embedded(kern::parse_embed(sort->embed, t.text, false, env_, metas_, sort_name), sort_name);
    throw LogicError("SortMismatch", 0, "unknown symbol " + t.text + " for sort " + sort_name);
  }

  RelationInstance relation() {
    Token t = next();
    if (t.kind != Token::Kind::Ident) throw LogicError("SyntaxError", 0, "expected a relation name");
    const RelationDecl* r = l_.find_relation(t.text);
    if (!r) throw LogicError("SignatureError", 0, "unknown relation " + t.text);
    RelationInstance out{t.text, {}};
    expect("(");
    for (std::size_t i = 0; i < r->sorts.size(); ++i) {
      if (i) expect(",");
      out.args.push_back(term(r->sorts[i]));
    }
    if (at_punct(",")) throw LogicError("SignatureError", 0, t.text + " takes " + std::to_string(r->sorts.size()) + " arguments");
    expect(")");
    return out;
  }

 private:
  [[noreturn]] void mismatch(const std::string& what, const std::string& sort) {
    throw LogicError("SortMismatch", 0, what + " is not of sort " + sort);
  }

  Term meta(const std::string& name, const std::string& sort) {
    if (metas_) {
      auto [it, fresh] = metas_->emplace(name, sort);
      if (!fresh && it->second != sort)
        throw LogicError("SortMismatch", 0, "metavariable " + name + " used at sorts " + it->second + " and " + sort);
    }
    return Term::meta(name, sort);
  }

  Term list(const SortDecl& sort) {
    const Constructor* nil = sort.list_nil();
    const Constructor* cons = sort.list_cons();
    if (!nil) throw LogicError("SortMismatch", 0, "list syntax for sort " + sort.name);
    std::vector<std::pair<Term, Term>> items;
    std::optional<Term> tail;
    if (!at_punct("]")) {
      for (;;) {
        Term k = term(cons->args[0]);
        expect(":");
        Term v = term(cons->args[1]);
        items.emplace_back(std::move(k), std::move(v));
        if (at_punct("|")) {
          next();
          tail = term(sort.name);
          break;
        }
        if (!at_punct(",")) break;
        next();
      }
    }
    expect("]");
    Term out = tail ? *tail : Term::apply(nil->name, {}, sort.name);
    for (auto it = items.rbegin(); it != items.rend(); ++it)
      out = Term::apply(cons->name, {it->first, it->second, out}, sort.name);
    return out;
  }

  const Logic& l_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const EmbedEnv& env_;
  std::map<std::string, std::string>* metas_;
};

void expect_end(const TermParser& p) {
  if (!p.at_end()) throw LogicError("SyntaxError", 0, "unexpected '" + p.peek().text + "'");
}

}  // namespace

Term parse_term(const Logic& l, const std::string& text, const std::string& sort, const EmbedEnv& env) {
  TermParser p(l, lex(text), env, nullptr);
  Term t = p.term(sort);
  expect_end(p);
  return t;
}

RelationInstance parse_relation(const Logic& l, const std::string& text, const EmbedEnv& env) {
  TermParser p(l, lex(text), env, nullptr);
  RelationInstance r = p.relation();
  expect_end(p);
  return r;
}

namespace kern {

Subst parse_bindings(const Logic& l, const std::string& text, const std::map<std::string, std::string>& metas,
                     const EmbedEnv& env) {
  TermParser p(l, lex(text), env, nullptr);
  Subst out;
  while (!p.at_end()) {
    Token name = p.next();
    if (name.kind != Token::Kind::Ident) throw LogicError("SyntaxError", 0, "expected Meta=term");
    p.expect("=");
    auto it = metas.find(name.text);
    if (it == metas.end()) throw LogicError("UnknownMetavariable", 0, "the rule has no metavariable " + name.text);
    out[name.text] = p.term(it->second);
  }
  return out;
}

}  // namespace kern

// ---- printing ----

std::string print_term(const Logic& l, const Term& t) {
  if (t.is(Term::Kind::Meta)) return t.name;
  if (t.is(Term::Kind::Embed)) return t.embed->kind() == "sig" ? t.embed->text() : "`" + t.embed->text() + "`";
  const SortDecl* sort = l.find_sort(t.sort);
  if (sort && sort->numerals()) {
    long n = 0;
    const Term* cur = &t;
    while (cur->is(Term::Kind::Apply) && cur->name == "S") {
      ++n;
      cur = &cur->args[0];
    }
    if (cur->is(Term::Kind::Apply) && cur->name == "O") return std::to_string(n);
  }
  if (sort && sort->list_nil() && (t.name == sort->list_nil()->name || t.name == sort->list_cons()->name)) {
    std::string out = "[";
    const Term* cur = &t;
    bool first = true;
    while (cur->is(Term::Kind::Apply) && cur->name == sort->list_cons()->name) {
      out += (first ? "" : ", ") + print_term(l, cur->args[0]) + ":" + print_term(l, cur->args[1]);
      first = false;
      cur = &cur->args[2];
    }
    if (!(cur->is(Term::Kind::Apply) && cur->name == sort->list_nil()->name)) out += " | " + print_term(l, *cur);
    return out + "]";
  }
  if (t.args.empty()) return t.name;
  std::string out = t.name + "(";
  for (std::size_t i = 0; i < t.args.size(); ++i) out += (i ? ", " : "") + print_term(l, t.args[i]);
  return out + ")";
}

std::string print_relation(const Logic& l, const RelationInstance& r) {
  std::string out = r.relation + "(";
  for (std::size_t i = 0; i < r.args.size(); ++i) out += (i ? ", " : "") + print_term(l, r.args[i]);
  return out + ")";
}

std::string print_logic(const Logic& l) {
  std::ostringstream out;
  out << "logic " << l.name;
  if (l.version != 1) out << " version " << l.version;
  out << "\n";
  for (const auto& s : l.sorts) {
    out << "sort " << s.name << " =";
    std::vector<std::string> alts;
    if (s.idents) alts.push_back("ident");
    if (!s.embed.empty()) alts.push_back("embed:" + s.embed);
    for (const auto& c : s.ctors) {
      std::string a = c.name;
      if (!c.args.empty()) {
        a += "(";
        for (std::size_t i = 0; i < c.args.size(); ++i) a += (i ? ", " : "") + c.args[i];
        a += ")";
      }
      alts.push_back(a);
    }
    for (std::size_t i = 0; i < alts.size(); ++i) out << (i ? " | " : " ") << alts[i];
    out << "\n";
  }
  for (const auto& r : l.relations) {
    out << "relation " << r.name << "(";
    for (std::size_t i = 0; i < r.sorts.size(); ++i) out << (i ? ", " : "") << r.sorts[i];
    out << ") action=" << (r.inference() ? "inference" : "builtin:" + r.action) << "\n";
  }
  for (const auto& r : l.rules) {
    out << "rule " << r.name << (r.automatic ? " (auto)" : "") << ":";
    for (std::size_t i = 0; i < r.premises.size(); ++i) out << (i ? ", " : " ") << print_relation(l, r.premises[i]);
    out << " / " << print_relation(l, r.conclusion) << "\n";
  }
  return out.str();
}

// ---- logic documents ----

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Splits on sep outside parentheses, brackets and backquotes.
std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out(1);
  int depth = 0;
  bool quoted = false;
  for (char c : s) {
    if (c == '`') quoted = !quoted;
    if (!quoted) {
      if (c == '(' || c == '[') ++depth;
      if (c == ')' || c == ']') --depth;
      if (c == sep && depth == 0) {
        out.emplace_back();
        continue;
      }
    }
    out.back() += c;
  }
  return out;
}

bool valid_name(const std::string& s) {
  try {
    auto t = lex(s);
    return t.size() == 2 && t[0].kind == Token::Kind::Ident;
  } catch (const LogicError&) {
    return false;
  }
}

SortDecl parse_sort(const std::string& rest, int line) {
  auto eq = rest.find('=');
  if (eq == std::string::npos) throw LogicError("SyntaxError", line, "sort needs '='");
  SortDecl s;
  s.name = trim(rest.substr(0, eq));
  if (!valid_name(s.name)) throw LogicError("SyntaxError", line, "bad sort name '" + s.name + "'");
  for (auto alt : split_top(rest.substr(eq + 1), '|')) {
    alt = trim(alt);
    if (alt == "ident") {
      s.idents = true;
    } else if (alt.rfind("embed:", 0) == 0) {
      s.embed = alt.substr(6);
      if (!kern::known_embed(s.embed)) throw LogicError("SignatureError", line, "unknown embedded sort kind " + s.embed);
    } else {
      Constructor c;
      auto open = alt.find('(');
      c.name = trim(alt.substr(0, open));
      if (!valid_name(c.name) || !capitalized(c.name))
        throw LogicError("SyntaxError", line, "constructor '" + c.name + "' must be a capitalized name");
      if (open != std::string::npos) {
        if (alt.back() != ')') throw LogicError("SyntaxError", line, "unclosed constructor signature " + alt);
        for (auto a : split_top(alt.substr(open + 1, alt.size() - open - 2), ',')) c.args.push_back(trim(a));
      }
      s.ctors.push_back(std::move(c));
    }
  }
  return s;
}

RelationDecl parse_relation_decl(const std::string& rest, int line) {
  RelationDecl r;
  auto open = rest.find('(');
  auto close = rest.find(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw LogicError("SyntaxError", line, "relation needs a signature");
  r.name = trim(rest.substr(0, open));
  if (!valid_name(r.name)) throw LogicError("SyntaxError", line, "bad relation name '" + r.name + "'");
  std::string sig = trim(rest.substr(open + 1, close - open - 1));
  if (!sig.empty())
    for (auto a : split_top(sig, ',')) r.sorts.push_back(trim(a));
  std::string tail = trim(rest.substr(close + 1));
  if (tail.rfind("action=", 0) != 0) throw LogicError("SyntaxError", line, "relation " + r.name + " needs action=");
  std::string action = tail.substr(7);
  if (action == "inference") {
    r.action = action;
  } else if (action.rfind("builtin:", 0) == 0) {
    r.action = action.substr(8);
    const kern::BuiltinInfo* b = kern::find_builtin(r.action);
    if (!b) throw LogicError("UnknownBuiltinAction", line, "unknown builtin action " + r.action);
    if (b->arity != r.sorts.size())
      throw LogicError("SignatureError", line,
                       r.action + " acts on relations of " + std::to_string(b->arity) + " arguments");
  } else {
    throw LogicError("SyntaxError", line, "action must be inference or builtin:<name>");
  }
  return r;
}

InferenceRule parse_rule(const Logic& l, const std::string& rest, int line) {
  auto colon = rest.find(':');
  if (colon == std::string::npos) throw LogicError("SyntaxError", line, "rule needs ':'");
  InferenceRule r;
  std::string head = trim(rest.substr(0, colon));
  if (head.size() > 6 && head.substr(head.size() - 6) == "(auto)") {
    r.automatic = true;
    head = trim(head.substr(0, head.size() - 6));
  }
  r.name = head;
  if (!valid_name(r.name)) throw LogicError("SyntaxError", line, "bad rule name '" + r.name + "'");
  auto parts = split_top(rest.substr(colon + 1), '/');
  if (parts.size() != 2) throw LogicError("SyntaxError", line, "rule needs 'premises / conclusion'");
  EmbedEnv env;
  auto parse_one = [&](const std::string& text) {
    try {
      TermParser p(l, lex(text), env, &r.metas);
      RelationInstance ri = p.relation();
      expect_end(p);
      return ri;
    } catch (const LogicError& e) {
      std::string code = e.code == "SortMismatch" ? "SignatureError" : e.code;
      throw LogicError(code, line, std::string("rule ") + r.name + ": " + e.what());
    }
  };
  std::string prem = trim(parts[0]);
  if (!prem.empty())
    for (const auto& p : split_top(prem, ',')) r.premises.push_back(parse_one(trim(p)));
  r.conclusion = parse_one(trim(parts[1]));
  const RelationDecl* c = l.find_relation(r.conclusion.relation);
  if (!c->inference())
    throw LogicError("SignatureError", line, "rule " + r.name + " concludes " + c->name + ", which has a builtin action");
  if (r.automatic && !r.premises.empty())
    throw LogicError("SignatureError", line, "automatic rule " + r.name + " must have no premises");
  return r;
}

}  // namespace

Logic parse_logic(const std::string& document) {
  Logic l;
  bool named = false;
  std::vector<std::pair<int, std::string>> rules;
  std::stringstream in(document);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    auto sp = s.find(' ');
    std::string kw = s.substr(0, sp);
    std::string rest = sp == std::string::npos ? "" : trim(s.substr(sp + 1));
    if (kw == "logic") {
      if (named) throw LogicError("SyntaxError", line, "second logic header");
      named = true;
      std::stringstream words(rest);
      words >> l.name;
      std::string v;
      if (words >> v) {
        int n = 0;
        if (v != "version" || !(words >> n) || n < 1) throw LogicError("SyntaxError", line, "expected 'version N'");
        l.version = n;
      }
      if (!valid_name(l.name)) throw LogicError("SyntaxError", line, "bad logic name");
    } else if (kw == "sort") {
      SortDecl d = parse_sort(rest, line);
      if (l.find_sort(d.name)) throw LogicError("SignatureError", line, "sort " + d.name + " declared twice");
      for (const auto& c : d.ctors)
        if (l.ctor_sort(c.name)) throw LogicError("SignatureError", line, "constructor " + c.name + " declared twice");
      l.sorts.push_back(std::move(d));
    } else if (kw == "relation") {
      RelationDecl r = parse_relation_decl(rest, line);
      if (l.find_relation(r.name)) throw LogicError("SignatureError", line, "relation " + r.name + " declared twice");
      l.relations.push_back(std::move(r));
    } else if (kw == "rule") {
      rules.emplace_back(line, rest);
    } else {
      throw LogicError("SyntaxError", line, "unknown declaration " + kw);
    }
  }
  if (!named) throw LogicError("SyntaxError", 0, "missing 'logic <name>' header");
  // Signatures are closed over the declared sorts.
  for (const auto& s : l.sorts)
    for (const auto& c : s.ctors)
      for (const auto& a : c.args)
        if (!l.find_sort(a)) throw LogicError("UnknownSort", 0, "constructor " + c.name + " uses unknown sort " + a);
  for (const auto& r : l.relations)
    for (const auto& a : r.sorts)
      if (!l.find_sort(a)) throw LogicError("UnknownSort", 0, "relation " + r.name + " uses unknown sort " + a);
  for (const auto& [ln, text] : rules) {
    InferenceRule r = parse_rule(l, text, ln);
    if (l.find_rule(r.name)) throw LogicError("SignatureError", ln, "rule " + r.name + " declared twice");
    l.rules.push_back(std::move(r));
  }
  return l;
}

}  // namespace stepwise
