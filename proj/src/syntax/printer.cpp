// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "stepwise/program.hpp"

namespace stepwise {

std::string print_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  std::string sci(buf, res.ptr);
  bool neg = sci[0] == '-';
  if (neg) sci.erase(0, 1);
  std::size_t epos = sci.find('e');
  std::string mant = sci.substr(0, epos);
  int exp = std::stoi(sci.substr(epos + 1));
  std::string digits;
  for (char c : mant)
    if (c != '.') digits += c;
  while (digits.size() > 1 && digits.back() == '0') digits.pop_back();
  std::string out;
  if (exp >= -5 + 1 && exp < 16) {
    int n = static_cast<int>(digits.size());
    if (exp >= 0) {
      if (n <= exp + 1) {
        out = digits + std::string(exp + 1 - n, '0') + ".0";
      } else {
        out = digits.substr(0, exp + 1) + "." + digits.substr(exp + 1);
      }
    } else {
      out = "0." + std::string(-exp - 1, '0') + digits;
    }
  } else {
    out = digits.substr(0, 1);
    if (digits.size() > 1) out += "." + digits.substr(1);
    char e[16];
    std::snprintf(e, sizeof e, "e%c%02d", exp < 0 ? '-' : '+', exp < 0 ? -exp : exp);
    out += e;
  }
  return neg ? "-" + out : out;
}

std::string quote_string(const std::string& s) {
  char q = '\'';
  if (s.find('\'') != std::string::npos && s.find('"') == std::string::npos) q = '"';
  std::string out(1, q);
  for (unsigned char c : s) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c == static_cast<unsigned char>(q)) {
      out += '\\';
      out += q;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else if (c == '\r') {
      out += "\\r";
    } else if (c < 0x20 || c == 0x7f) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\x%02x", c);
      out += buf;
    } else {
      out += static_cast<char>(c);
    }
  }
  out += q;
  return out;
}

namespace {

// A small Wadler-style document.
struct DocNode;
using Doc = std::shared_ptr<const DocNode>;

struct DocNode {
  enum class K { Text, Line, Concat, Nest, Align, Group, IfBreak };
  K k;
  std::string text;  // Text; flat text for Line
  int indent = 0;
  std::vector<Doc> parts;  // Concat; [0] for Nest/Align/Group; [broken, flat] for IfBreak
};

Doc text(std::string s) {
  auto d = std::make_shared<DocNode>();
  d->k = DocNode::K::Text;
  d->text = std::move(s);
  return d;
}

Doc line(std::string flat = " ") {
  auto d = std::make_shared<DocNode>();
  d->k = DocNode::K::Line;
  d->text = std::move(flat);
  return d;
}

Doc cat(std::vector<Doc> parts) {
  auto d = std::make_shared<DocNode>();
  d->k = DocNode::K::Concat;
  d->parts = std::move(parts);
  return d;
}

Doc nest(int n, Doc x) {
  auto d = std::make_shared<DocNode>();
  d->k = DocNode::K::Nest;
  d->indent = n;
  d->parts = {std::move(x)};
  return d;
}

Doc align(Doc x) {
  auto d = std::make_shared<DocNode>();
  d->k = DocNode::K::Align;
  d->parts = {std::move(x)};
  return d;
}

Doc group(Doc x) {
  auto d = std::make_shared<DocNode>();
  d->k = DocNode::K::Group;
  d->parts = {std::move(x)};
  return d;
}

Doc if_break(Doc broken, Doc flat) {
  auto d = std::make_shared<DocNode>();
  d->k = DocNode::K::IfBreak;
  d->parts = {std::move(broken), std::move(flat)};
  return d;
}

struct Frame {
  int indent;
  bool flat;
  const DocNode* doc;
};

// Width of the flat rendering of the remaining frames up to the first line
// break in a non-flat frame; stops early once over budget.
bool fits(long budget, std::vector<Frame> stack) {
  while (budget >= 0 && !stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    switch (f.doc->k) {
      case DocNode::K::Text: budget -= static_cast<long>(f.doc->text.size()); break;
      case DocNode::K::Line:
        if (!f.flat) return true;
        budget -= static_cast<long>(f.doc->text.size());
        break;
      case DocNode::K::Concat:
        for (auto it = f.doc->parts.rbegin(); it != f.doc->parts.rend(); ++it)
          stack.push_back({f.indent, f.flat, it->get()});
        break;
      case DocNode::K::Nest:
      case DocNode::K::Align:
        stack.push_back({f.indent, f.flat, f.doc->parts[0].get()});
        break;
      case DocNode::K::Group: stack.push_back({f.indent, true, f.doc->parts[0].get()}); break;
      case DocNode::K::IfBreak:
        stack.push_back({f.indent, f.flat, f.doc->parts[f.flat ? 1 : 0].get()});
        break;
    }
  }
  return budget >= 0;
}

std::vector<std::string> render(const Doc& d, std::size_t width) {
  std::vector<std::string> lines(1);
  std::vector<Frame> stack{{0, false, d.get()}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    switch (f.doc->k) {
      case DocNode::K::Text: lines.back() += f.doc->text; break;
      case DocNode::K::Line:
        if (f.flat) {
          lines.back() += f.doc->text;
        } else {
          lines.emplace_back(static_cast<std::size_t>(f.indent), ' ');
        }
        break;
      case DocNode::K::Concat:
        for (auto it = f.doc->parts.rbegin(); it != f.doc->parts.rend(); ++it)
          stack.push_back({f.indent, f.flat, it->get()});
        break;
      case DocNode::K::Nest:
        stack.push_back({f.indent + f.doc->indent, f.flat, f.doc->parts[0].get()});
        break;
      case DocNode::K::Align:
        stack.push_back({static_cast<int>(lines.back().size()), f.flat, f.doc->parts[0].get()});
        break;
      case DocNode::K::Group: {
        if (f.flat) {
          stack.push_back({f.indent, true, f.doc->parts[0].get()});
        } else {
          std::vector<Frame> probe = stack;
          probe.push_back({f.indent, true, f.doc->parts[0].get()});
          long budget = static_cast<long>(width) - static_cast<long>(lines.back().size());
          bool flat = fits(budget, probe);
          stack.push_back({f.indent, flat, f.doc->parts[0].get()});
        }
        break;
      }
      case DocNode::K::IfBreak:
        stack.push_back({f.indent, f.flat, f.doc->parts[f.flat ? 1 : 0].get()});
        break;
    }
  }
  return lines;
}

int prec(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Lambda: return 0;
    case ExprKind::Cond: return 1;
    case ExprKind::BinOp:
      switch (e.binary_op()) {
        case BinaryOp::Or: return 2;
        case BinaryOp::And: return 3;
        case BinaryOp::Add: case BinaryOp::Sub: return 6;
        case BinaryOp::Mul: case BinaryOp::Div: case BinaryOp::FloorDiv: return 7;
        case BinaryOp::Pow: return 9;
        default: return 5;
      }
    case ExprKind::Unary: return e.unary_op() == UnaryOp::Not ? 4 : 8;
    case ExprKind::IntLit: return e.int_value() < 0 ? 8 : 11;
    case ExprKind::FloatLit: return std::signbit(e.float_value()) ? 8 : 11;
    case ExprKind::Call: case ExprKind::Slice: return 10;
    default: return 11;
  }
}

Doc to_doc(const Expr& e, bool parens);

Doc sub(const Expr& e, bool parens) { return to_doc(e, parens); }

Doc paren_wrap(Doc d, bool parens) {
  if (!parens) return d;
  return cat({text("("), d, text(")")});
}

Doc to_doc(const Expr& e, bool parens) {
  switch (e.kind()) {
    case ExprKind::IntLit: return paren_wrap(text(std::to_string(e.int_value())), parens);
    case ExprKind::FloatLit: return paren_wrap(text(print_float(e.float_value())), parens);
    case ExprKind::BoolLit: return text(e.bool_value() ? "True" : "False");
    case ExprKind::StrLit: return text(quote_string(e.text()));
    case ExprKind::Var: return text(e.text());
    case ExprKind::Error: return text("ERROR");
    case ExprKind::BinOp: {
      BinaryOp op = e.binary_op();
      int p = prec(e);
      const Expr& l = e.child(0);
      const Expr& r = e.child(1);
      bool lp, rp;
      if (op == BinaryOp::Pow) {
        lp = prec(l) <= 9;
        rp = prec(r) < 8;
      } else if (p == 5) {
        lp = prec(l) <= 5;
        rp = prec(r) <= 5;
      } else {
        lp = prec(l) < p;
        rp = prec(r) <= p;
      }
      std::string o = op_text(op);
      if (op == BinaryOp::And || op == BinaryOp::Or) o = " " + o + " ";
      return paren_wrap(cat({sub(l, lp), text(o), sub(r, rp)}), parens);
    }
    case ExprKind::Unary: {
      const Expr& x = e.child(0);
      if (e.unary_op() == UnaryOp::Not) return paren_wrap(cat({text("not "), sub(x, prec(x) < 4)}), parens);
      bool xp = prec(x) < 8;
      // A bare numeral after '-' would read back as a negative literal.
      if ((x.is(ExprKind::IntLit) && x.int_value() >= 0) ||
          (x.is(ExprKind::FloatLit) && !std::signbit(x.float_value())))
        xp = true;
      return paren_wrap(cat({text("-"), sub(x, xp)}), parens);
    }
    case ExprKind::Slice: {
      const Expr& b = e.child(0);
      return cat({sub(b, prec(b) < 10), text("[" + std::to_string(e.slice_lo()) + ":" +
                                                std::to_string(e.slice_hi()) + "]")});
    }
    case ExprKind::Call: {
      const Expr& c = e.callee();
      std::vector<Doc> parts{sub(c, prec(c) < 10), text("(")};
      for (std::size_t i = 1; i < e.size(); ++i) {
        if (i > 1) parts.push_back(text(", "));
        parts.push_back(sub(e.child(i), false));
      }
      parts.push_back(text(")"));
      return cat(std::move(parts));
    }
    case ExprKind::Cond: {
      const Expr& x = e.child(0);
      const Expr& c = e.child(1);
      const Expr& y = e.child(2);
      Doc open = parens ? text("(") : text("");
      Doc close = parens ? text(")") : text("");
      return align(group(cat({
          if_break(text("(   "), open),
          nest(4, sub(x, prec(x) <= 1)),
          nest(1, line()),
          text("if "),
          nest(4, sub(c, prec(c) <= 1)),
          text(" else"),
          nest(4, line()),
          nest(4, sub(y, prec(y) < 1)),
          if_break(text(")"), close),
      })));
    }
    case ExprKind::Lambda: {
      std::vector<Doc> parts{text("lambda")};
      const auto& ps = e.lambda_params();
      for (std::size_t i = 0; i < ps.size(); ++i) {
        parts.push_back(text(i ? ", " : " "));
        parts.push_back(text(ps[i]));
        if (auto d = e.lambda_default(i)) {
          parts.push_back(text("="));
          parts.push_back(sub(*d, prec(*d) <= 1));
        }
      }
      parts.push_back(text(": "));
      parts.push_back(sub(e.lambda_body(), false));
      return paren_wrap(cat(std::move(parts)), parens);
    }
  }
  return text("?");
}

}  // namespace

std::string print_expr(const Expr& e) {
  auto lines = render(to_doc(e, false), std::numeric_limits<int>::max() / 2);
  return lines.front();
}

std::vector<std::string> layout_expr(const Expr& e, std::size_t width) {
  return render(to_doc(e, e.is(ExprKind::Cond)), width);
}

namespace {

void print_block(const Block& b, int indent, std::string& out) {
  std::string pad(static_cast<std::size_t>(indent), ' ');
  for (const auto& s : b) {
    switch (s.kind) {
      case Stmt::Kind::Assign:
        out += pad + s.name + (s.type ? ": " + s.type->str() : "") + " = " + print_expr(s.value) + "\n";
        break;
      case Stmt::Kind::Return:
        out += pad + "return " + print_expr(s.value) + "\n";
        break;
      case Stmt::Kind::If:
        out += pad + "if " + print_expr(s.value) + ":\n";
        print_block(s.then_block, indent + 4, out);
        if (!s.else_block.empty()) {
          out += pad + "else:\n";
          print_block(s.else_block, indent + 4, out);
        }
        break;
    }
  }
}

}  // namespace

std::string print_stmt_block(const Block& b, int indent) {
  std::string out;
  print_block(b, indent, out);
  return out;
}

std::string print_definition(const Definition& d) {
  if (auto v = std::get_if<VarDef>(&d))
    return v->name + (v->type ? ": " + v->type->str() : "") + " = " + print_expr(v->value) + "\n";
  if (auto im = std::get_if<ImportDef>(&d)) return "import " + im->module + "\n";
  const auto& f = std::get<FuncDef>(d);
  std::string out;
  if (f.spec.pre) out += "# pre: " + print_expr(*f.spec.pre) + "\n";
  if (f.spec.post) out += "# post: " + print_expr(*f.spec.post) + "\n";
  if (f.spec.progress) out += "# progress: " + print_expr(*f.spec.progress) + "\n";
  if (f.spec.pmin) out += "# pmin: " + std::to_string(*f.spec.pmin) + "\n";
  out += "def " + f.name + "(";
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    if (i) out += ", ";
    out += f.params[i].name + ": " + f.params[i].type.str();
  }
  out += ") -> " + f.result.str() + ":";
  if (f.stub) return out + " ...\n";
  out += "\n";
  print_block(f.body, 4, out);
  return out;
}

std::string print_program(const Program& p) {
  std::string out;
  for (const auto& d : p.defs) {
    out += print_definition(d);
    if (std::holds_alternative<FuncDef>(d)) out += "\n";
  }
  out += "# |-\n" + print_expr(p.goal) + "\n";
  return out;
}

}  // namespace stepwise
