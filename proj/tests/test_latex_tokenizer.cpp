#include "doctest.h"

#include <random>

#include "formine/latex_tokenizer.hpp"

using namespace formine;

namespace {

std::vector<TokenKind> kinds_of(const std::vector<LatexToken>& tokens) {
  std::vector<TokenKind> kinds;
  for (const auto& t : tokens) kinds.push_back(t.kind);
  return kinds;
}

}  // namespace

TEST_CASE("frac tokenizes into command and brace groups") {
  auto tokens = tokenize_latex("\\frac{a}{b}");
  CHECK(kinds_of(tokens) ==
        std::vector<TokenKind>{TokenKind::command, TokenKind::open_brace, TokenKind::letter,
                               TokenKind::close_brace, TokenKind::open_brace,
                               TokenKind::letter, TokenKind::close_brace});
  CHECK(tokens[0].text == "\\frac");
}

TEST_CASE("superscript splits into letter symbol digit") {
  auto tokens = tokenize_latex("x^2");
  CHECK(kinds_of(tokens) ==
        std::vector<TokenKind>{TokenKind::letter, TokenKind::symbol, TokenKind::digit});
}

TEST_CASE("maximal letter run stops at non-letters") {
  auto tokens = tokenize_latex("\\left(");
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0].text == "\\left");
  CHECK(tokens[1].kind == TokenKind::symbol);
  CHECK(tokens[1].text == "(");
}

TEST_CASE("special single tokens") {
  CHECK(tokenize_latex("\\\\")[0].kind == TokenKind::newline_cmd);
  CHECK(tokenize_latex("&")[0].kind == TokenKind::alignment);
  CHECK(tokenize_latex("[")[0].kind == TokenKind::open_bracket);
  CHECK(tokenize_latex("]")[0].kind == TokenKind::close_bracket);

  auto control_space = tokenize_latex("\\ x");
  REQUIRE(control_space.size() == 2);
  CHECK(control_space[0].kind == TokenKind::command);
  CHECK(is_control_space(control_space[0]));
  CHECK_FALSE(is_control_space(control_space[1]));
}

TEST_CASE("whitespace runs form one token") {
  auto tokens = tokenize_latex("a \t\n b");
  REQUIRE(tokens.size() == 3);
  CHECK(tokens[1].kind == TokenKind::whitespace);
  CHECK(tokens[1].text == " \t\n ");
}

TEST_CASE("trailing lone backslash survives round-trip") {
  auto tokens = tokenize_latex("x\\");
  CHECK(join_tokens(tokens) == "x\\");
}

TEST_CASE("multi-byte symbols stay whole") {
  auto tokens = tokenize_latex("\xCE\xB1x");  // UTF-8 alpha then x
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0].kind == TokenKind::symbol);
  CHECK(tokens[0].text == "\xCE\xB1");
}

TEST_CASE("round-trip is lossless on random strings") {
  std::mt19937 rng(42);
  const std::string chars = "abzAZ019 {}[]^_&$%#\\\t\n.,+-=()|!~";
  for (int t = 0; t < 2000; ++t) {
    std::string s;
    int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) s += chars[rng() % chars.size()];
    CAPTURE(s);
    CHECK(join_tokens(tokenize_latex(s)) == s);
  }
}

TEST_CASE("content token count excludes whitespace") {
  CHECK(count_content_tokens(tokenize_latex("a  b\t c")) == 3);
  CHECK(count_content_tokens(tokenize_latex("  ")) == 0);
  CHECK(count_content_tokens(tokenize_latex("\\frac{1}{2}")) == 7);
}
