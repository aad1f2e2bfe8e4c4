#include "formine/latex_tokenizer.hpp"

#include <cctype>

namespace formine {

namespace {

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Length of the UTF-8 sequence starting at src[pos]; 1 for ASCII and for
// anything malformed (input is sanitized upstream, this is a fallback).
size_t utf8_len(std::string_view src, size_t pos) {
  unsigned char lead = static_cast<unsigned char>(src[pos]);
  size_t n = 1;
  if (lead >= 0xF0) n = 4;
  else if (lead >= 0xE0) n = 3;
  else if (lead >= 0xC0) n = 2;
  if (pos + n > src.size()) return 1;
  for (size_t i = 1; i < n; ++i)
    if ((static_cast<unsigned char>(src[pos + i]) & 0xC0) != 0x80) return 1;
  return n;
}

}  // namespace

const char* to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::command: return "command";
    case TokenKind::open_brace: return "open_brace";
    case TokenKind::close_brace: return "close_brace";
    case TokenKind::open_bracket: return "open_bracket";
    case TokenKind::close_bracket: return "close_bracket";
    case TokenKind::symbol: return "symbol";
    case TokenKind::letter: return "letter";
    case TokenKind::digit: return "digit";
    case TokenKind::whitespace: return "whitespace";
    case TokenKind::alignment: return "alignment";
    case TokenKind::newline_cmd: return "newline_cmd";
  }
  return "unknown";
}

std::vector<LatexToken> tokenize_latex(std::string_view src) {
  std::vector<LatexToken> out;
  out.reserve(src.size() / 2 + 4);
  size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == '\\') {
      if (i + 1 >= src.size()) {
        out.push_back({TokenKind::command, "\\"});
        ++i;
        break;
      }
      char next = src[i + 1];
      if (next == '\\') {
        out.push_back({TokenKind::newline_cmd, "\\\\"});
        i += 2;
      } else if (is_letter(next)) {
        size_t j = i + 1;
        while (j < src.size() && is_letter(src[j])) ++j;
        out.push_back({TokenKind::command, std::string(src.substr(i, j - i))});
        i = j;
      } else {
        size_t n = utf8_len(src, i + 1);
        out.push_back({TokenKind::command, std::string(src.substr(i, 1 + n))});
        i += 1 + n;
      }
    } else if (c == '{') {
      out.push_back({TokenKind::open_brace, "{"});
      ++i;
    } else if (c == '}') {
      out.push_back({TokenKind::close_brace, "}"});
      ++i;
    } else if (c == '[') {
      out.push_back({TokenKind::open_bracket, "["});
      ++i;
    } else if (c == ']') {
      out.push_back({TokenKind::close_bracket, "]"});
      ++i;
    } else if (c == '&') {
      out.push_back({TokenKind::alignment, "&"});
      ++i;
    } else if (is_ws(c)) {
      size_t j = i;
      while (j < src.size() && is_ws(src[j])) ++j;
      out.push_back({TokenKind::whitespace, std::string(src.substr(i, j - i))});
      i = j;
    } else if (is_letter(c)) {
      out.push_back({TokenKind::letter, std::string(1, c)});
      ++i;
    } else if (is_digit(c)) {
      out.push_back({TokenKind::digit, std::string(1, c)});
      ++i;
    } else {
      size_t n = utf8_len(src, i);
      out.push_back({TokenKind::symbol, std::string(src.substr(i, n))});
      i += n;
    }
  }
  return out;
}

std::string join_tokens(const std::vector<LatexToken>& tokens) {
  std::string out;
  size_t total = 0;
  for (const auto& t : tokens) total += t.text.size();
  out.reserve(total);
  for (const auto& t : tokens) out += t.text;
  return out;
}

bool is_control_space(const LatexToken& token) {
  return token.kind == TokenKind::command && token.text.size() == 2 &&
         token.text[0] == '\\' && is_ws(token.text[1]);
}

int count_content_tokens(const std::vector<LatexToken>& tokens) {
  int n = 0;
  for (const auto& t : tokens)
    if (t.kind != TokenKind::whitespace) ++n;
  return n;
}

}  // namespace formine
