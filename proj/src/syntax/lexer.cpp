// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#include "lexer.hpp"

#include <cctype>

#include "stepwise/program.hpp"

namespace stepwise::detail {

namespace {

bool name_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool name_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Lexer {
 public:
  Lexer(const std::string& src, bool expr_only) : src_(src), expr_only_(expr_only) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      if (at_line_start_ && depth_ == 0 && !expr_only_) {
        if (line_start()) continue;
      }
      char c = src_[pos_];
      if (c == '\n') {
        newline();
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
        continue;
      }
      if (c == '\\' && peek(1) == '\n') {
        advance();
        advance();
        ++line_;
        col_ = 1;
        continue;
      }
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      lex_token();
    }
    if (!out_.empty() && out_.back().kind != Tok::Newline && out_.back().kind != Tok::Dedent &&
        out_.back().kind != Tok::Indent && !expr_only_)
      push(Tok::Newline, "", pos_, pos_);
    if (depth_ > 0) throw SyntaxError(line_, col_, "unexpected end of input inside brackets");
    while (indents_.size() > 1) {
      indents_.pop_back();
      push(Tok::Dedent, "", pos_, pos_);
    }
    push(Tok::End, "", pos_, pos_);
    return out_;
  }

 private:
  char peek(std::size_t k) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

  void advance() {
    ++pos_;
    ++col_;
  }

  void push(Tok k, std::string text, std::size_t b, std::size_t e, int line = 0, int col = 0) {
    Token t;
    t.kind = k;
    t.text = std::move(text);
    t.begin = static_cast<uint32_t>(b);
    t.end = static_cast<uint32_t>(e);
    t.line = line ? line : line_;
    t.col = col ? col : col_;
    out_.push_back(std::move(t));
  }

  void newline() {
    if (depth_ == 0 && !expr_only_ && !out_.empty() && out_.back().kind != Tok::Newline &&
        out_.back().kind != Tok::Indent && out_.back().kind != Tok::Dedent &&
        out_.back().kind != Tok::Turnstile && out_.back().kind != Tok::SpecLine)
      push(Tok::Newline, "", pos_, pos_ + 1);
    advance();
    ++line_;
    col_ = 1;
    at_line_start_ = true;
  }

  // Handles indentation and whole-line comments. Returns true when the line
  // was consumed entirely.
  bool line_start() {
    std::size_t p = pos_;
    int width = 0;
    while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t')) {
      if (src_[p] == '\t') throw SyntaxError(line_, width + 1, "tabs are not allowed for indentation");
      ++width;
      ++p;
    }
    if (p >= src_.size()) {
      pos_ = p;
      return true;
    }
    if (src_[p] == '\n' || src_[p] == '\r') {
      col_ += static_cast<int>(p - pos_);
      pos_ = p;
      while (pos_ < src_.size() && src_[pos_] == '\r') advance();
      if (pos_ < src_.size()) newline();
      return true;
    }
    if (src_[p] == '#') {
      std::size_t e = src_.find('\n', p);
      if (e == std::string::npos) e = src_.size();
      std::string body = trim(src_.substr(p + 1, e - p - 1));
      int col = width + 1;
      bool marker = body == "|-" || body.rfind("pre:", 0) == 0 || body.rfind("post:", 0) == 0 ||
                    body.rfind("progress:", 0) == 0 || body.rfind("pmin:", 0) == 0;
      if (marker) {
        while (width < indents_.back()) {
          indents_.pop_back();
          push(Tok::Dedent, "", p, p);
        }
      }
      if (body == "|-") {
        push(Tok::Turnstile, "|-", p, e, line_, col);
      } else {
        for (const char* key : {"pre:", "post:", "progress:", "pmin:"}) {
          if (body.rfind(key, 0) == 0) {
            push(Tok::SpecLine, body, p, e, line_, col);
            break;
          }
        }
      }
      col_ += static_cast<int>(e - pos_);
      pos_ = e;
      if (pos_ < src_.size()) newline();
      return true;
    }
    col_ += static_cast<int>(p - pos_);
    pos_ = p;
    at_line_start_ = false;
    if (width > indents_.back()) {
      indents_.push_back(width);
      push(Tok::Indent, "", p, p);
    } else {
      while (width < indents_.back()) {
        indents_.pop_back();
        push(Tok::Dedent, "", p, p);
      }
      if (width != indents_.back()) throw SyntaxError(line_, col_, "inconsistent indentation");
    }
    return false;
  }

  void lex_token() {
    at_line_start_ = false;
    std::size_t b = pos_;
    int line = line_, col = col_;
    unsigned char c = static_cast<unsigned char>(src_[pos_]);
    if (name_start(c)) {
      while (pos_ < src_.size() && name_char(static_cast<unsigned char>(src_[pos_]))) advance();
      push(Tok::Name, src_.substr(b, pos_ - b), b, pos_, line, col);
      return;
    }
    if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      if (peek(0) == '.' && peek(1) != '.') {
        advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      }
      if (peek(0) == 'e' || peek(0) == 'E') {
        std::size_t save = pos_;
        int save_col = col_;
        advance();
        if (peek(0) == '+' || peek(0) == '-') advance();
        if (!std::isdigit(static_cast<unsigned char>(peek(0)))) {
          pos_ = save;
          col_ = save_col;
        } else {
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        }
      }
      if (pos_ < src_.size() && name_char(static_cast<unsigned char>(src_[pos_])))
        throw SyntaxError(line, col, "malformed number");
      push(Tok::Number, src_.substr(b, pos_ - b), b, pos_, line, col);
      return;
    }
    if (c == '\'' || c == '"') {
      lex_string(line, col);
      return;
    }
    static const char* ops[] = {"...", "**", "//", "==", "!=", "<=", ">=", "->", "+=", "-=",
                                "*=", "/=", "+", "-", "*", "/", "<", ">", "(", ")", "[", "]",
                                ":", ",", "=", ".", "%", "{", "}", "@", "&", "|", "^", "~", ";"};
    for (const char* op : ops) {
      std::size_t n = std::char_traits<char>::length(op);
      if (src_.compare(pos_, n, op) == 0) {
        for (std::size_t i = 0; i < n; ++i) advance();
        std::string text(op);
        if (text == "(" || text == "[" || text == "{") ++depth_;
        if (text == ")" || text == "]" || text == "}") {
          if (depth_ == 0) throw SyntaxError(line, col, "unbalanced '" + text + "'");
          --depth_;
        }
        push(Tok::Op, text, b, pos_, line, col);
        return;
      }
    }
    throw SyntaxError(line, col, std::string("unexpected character '") + src_[pos_] + "'");
  }

  void lex_string(int line, int col) {
    std::size_t b = pos_;
    char q = src_[pos_];
    bool triple = peek(1) == q && peek(2) == q;
    for (int i = 0; i < (triple ? 3 : 1); ++i) advance();
    std::string value;
    while (true) {
      if (pos_ >= src_.size()) throw SyntaxError(line, col, "unterminated string literal");
      char c = src_[pos_];
      if (triple) {
        if (c == q && peek(1) == q && peek(2) == q) {
          advance();
          advance();
          advance();
          break;
        }
      } else if (c == q) {
        advance();
        break;
      }
      if (c == '\n') {
        if (!triple) throw SyntaxError(line, col, "unterminated string literal");
        value += c;
        ++pos_;
        ++line_;
        col_ = 1;
        continue;
      }
      if (c == '\\') {
        char n = peek(1);
        advance();
        advance();
        switch (n) {
          case 'n': value += '\n'; break;
          case 't': value += '\t'; break;
          case 'r': value += '\r'; break;
          case '\\': value += '\\'; break;
          case '\'': value += '\''; break;
          case '"': value += '"'; break;
          case '0': value += '\0'; break;
          case 'x': {
            auto hex = [&](char h) -> int {
              if (h >= '0' && h <= '9') return h - '0';
              if (h >= 'a' && h <= 'f') return h - 'a' + 10;
              if (h >= 'A' && h <= 'F') return h - 'A' + 10;
              throw SyntaxError(line_, col_, "bad \\x escape");
            };
            int v = hex(peek(0)) * 16 + hex(peek(1));
            advance();
            advance();
            value += static_cast<char>(v);
            break;
          }
          case '\n':
            ++line_;
            col_ = 1;
            break;
          default:
            throw SyntaxError(line_, col_, std::string("unsupported escape \\") + n);
        }
        continue;
      }
      value += c;
      advance();
    }
    push(Tok::String, value, b, pos_, line, col);
  }

  const std::string& src_;
  bool expr_only_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  int depth_ = 0;
  bool at_line_start_ = true;
  std::vector<int> indents_{0};
  std::vector<Token> out_;
};

}  // namespace

std::vector<Token> tokenize(const std::string& src, bool expression_only) {
  return Lexer(src, expression_only).run();
}

}  // namespace stepwise::detail
