#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace formine {

enum class TokenKind {
  command,
  open_brace,
  close_brace,
  open_bracket,
  close_bracket,
  symbol,
  letter,
  digit,
  whitespace,
  alignment,
  newline_cmd,
};

const char* to_string(TokenKind kind);

/// One lexical unit of LaTeX source. Concatenating token texts in order
/// reproduces the input byte for byte.
struct LatexToken {
  TokenKind kind;
  std::string text;

  bool operator==(const LatexToken&) const = default;
};

/// Lossless tokenization. A command is `\` plus a maximal letter run or `\`
/// plus one non-letter; `\\` is newline_cmd; `&` is alignment; whitespace
/// runs form one token each; every other byte sequence falls through to
/// letter / digit / symbol.
std::vector<LatexToken> tokenize_latex(std::string_view src);

std::string join_tokens(const std::vector<LatexToken>& tokens);

/// The control space `\ ` (and `\<tab>` etc.), which is a command token,
/// not whitespace.
bool is_control_space(const LatexToken& token);

/// Token count as used for difficulty bucketing: whitespace excluded.
int count_content_tokens(const std::vector<LatexToken>& tokens);

}  // namespace formine
