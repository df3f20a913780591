// Licensed under the Apache License, Version 2.0.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace stepwise::detail {

enum class Tok {
  Name,
  Number,
  String,
  Op,
  Newline,
  Indent,
  Dedent,
  Turnstile,
  SpecLine,  // text holds "key: rest"
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;   // raw text; decoded value for strings
  uint32_t begin = 0, end = 0;
  int line = 1, col = 1;
};

// Throws SyntaxError.
std::vector<Token> tokenize(const std::string& src, bool expression_only = false);

}  // namespace stepwise::detail
