#include "formine/normalizer.hpp"

#include <algorithm>
#include <optional>
#include <variant>

#include "formine/latex_tokenizer.hpp"

namespace formine {

namespace {

struct EnvNode;
using Node = std::variant<LatexToken, EnvNode>;

struct EnvNode {
  std::string name;
  std::string pos_arg;   // raw "[t]" style argument, array family only
  std::string colspec;   // raw column spec interior, array family only
  std::vector<Node> children;
};

struct ParseFail {
  std::string reason;
};

// --- token-tree parsing ----------------------------------------------------

struct TreeParser {
  const std::vector<LatexToken>& tokens;
  size_t i = 0;
  std::optional<ParseFail> fail;

  bool is_cmd(size_t k, std::string_view name) const {
    return k < tokens.size() && tokens[k].kind == TokenKind::command &&
           std::string_view(tokens[k].text).substr(1) == name;
  }

  // Env name token sequence after \begin/\end: { letters/digits/*/@ }
  std::optional<std::string> read_env_name() {
    size_t k = i;
    while (k < tokens.size() && tokens[k].kind == TokenKind::whitespace) ++k;
    if (k >= tokens.size() || tokens[k].kind != TokenKind::open_brace) return std::nullopt;
    ++k;
    std::string name;
    while (k < tokens.size() && tokens[k].kind != TokenKind::close_brace) {
      const auto& t = tokens[k];
      bool ok = t.kind == TokenKind::letter || t.kind == TokenKind::digit ||
                (t.kind == TokenKind::symbol && (t.text == "*" || t.text == "@"));
      if (!ok) return std::nullopt;
      name += t.text;
      ++k;
    }
    if (k >= tokens.size() || name.empty()) return std::nullopt;
    i = k + 1;
    return name;
  }

  // Raw text of a balanced brace group at the cursor, braces excluded.
  std::optional<std::string> read_group_text() {
    size_t k = i;
    while (k < tokens.size() && tokens[k].kind == TokenKind::whitespace) ++k;
    if (k >= tokens.size() || tokens[k].kind != TokenKind::open_brace) return std::nullopt;
    int depth = 0;
    std::string text;
    for (size_t j = k; j < tokens.size(); ++j) {
      if (tokens[j].kind == TokenKind::open_brace) {
        if (depth++ > 0) text += tokens[j].text;
      } else if (tokens[j].kind == TokenKind::close_brace) {
        if (--depth == 0) {
          i = j + 1;
          return text;
        }
        text += tokens[j].text;
      } else {
        text += tokens[j].text;
      }
    }
    return std::nullopt;
  }

  std::optional<std::string> read_bracket_text() {
    size_t k = i;
    if (k >= tokens.size() || tokens[k].kind != TokenKind::open_bracket) return std::nullopt;
    std::string text;
    int brace_depth = 0;
    for (size_t j = k + 1; j < tokens.size(); ++j) {
      if (tokens[j].kind == TokenKind::open_brace) ++brace_depth;
      if (tokens[j].kind == TokenKind::close_brace && brace_depth > 0) --brace_depth;
      if (tokens[j].kind == TokenKind::close_bracket && brace_depth == 0) {
        i = j + 1;
        return text;
      }
      text += tokens[j].text;
    }
    return std::nullopt;
  }

  std::vector<Node> parse(const std::string* expected_end) {
    std::vector<Node> nodes;
    while (i < tokens.size()) {
      if (is_cmd(i, "begin")) {
        ++i;
        auto name = read_env_name();
        if (!name) {
          fail = ParseFail{"\\begin without a well-formed environment name"};
          return nodes;
        }
        EnvNode env;
        env.name = *name;
        if (env.name == "array") {
          if (auto pos = read_bracket_text()) env.pos_arg = "[" + *pos + "]";
          if (auto cols = read_group_text()) {
            env.colspec = *cols;
          } else {
            fail = ParseFail{"\\begin{array} without a column spec"};
            return nodes;
          }
        }
        env.children = parse(&env.name);
        if (fail) return nodes;
        nodes.push_back(std::move(env));
        continue;
      }
      if (is_cmd(i, "end")) {
        ++i;
        auto name = read_env_name();
        if (!name) {
          fail = ParseFail{"\\end without a well-formed environment name"};
          return nodes;
        }
        if (!expected_end || *name != *expected_end) {
          fail = ParseFail{"mismatched \\end{" + *name + "}"};
          return nodes;
        }
        return nodes;  // matched; caller owns the env
      }
      nodes.push_back(tokens[i]);
      ++i;
    }
    if (expected_end) fail = ParseFail{"unclosed \\begin{" + *expected_end + "}"};
    return nodes;
  }
};

// --- serialization ----------------------------------------------------------

void serialize(const std::vector<Node>& nodes, std::string& out) {
  for (const auto& node : nodes) {
    if (const auto* tok = std::get_if<LatexToken>(&node)) {
      out += tok->text;
      continue;
    }
    const auto& env = std::get<EnvNode>(node);
    out += "\\begin{" + env.name + "}";
    out += env.pos_arg;
    if (env.name == "array") out += "{" + env.colspec + "}";
    serialize(env.children, out);
    out += "\\end{" + env.name + "}";
  }
}

// --- matrix-family canonicalization -----------------------------------------

struct DelimiterPair {
  std::string_view env;
  std::string_view left;
  std::string_view right;
};

constexpr DelimiterPair kMatrixFamily[] = {
    {"matrix", "", ""},       {"pmatrix", "(", ")"},     {"bmatrix", "[", "]"},
    {"Bmatrix", "\\{", "\\}"}, {"vmatrix", "|", "|"},     {"Vmatrix", "\\|", "\\|"},
};

const DelimiterPair* matrix_family(std::string_view name) {
  for (const auto& m : kMatrixFamily)
    if (m.env == name) return &m;
  return nullptr;
}

// Column count: max alignment tokens per row, rows split on \\ among the
// node's own children (nested environments are opaque).
int infer_columns(const std::vector<Node>& children) {
  int max_aligns = 0, current = 0;
  for (const auto& node : children) {
    const auto* tok = std::get_if<LatexToken>(&node);
    if (!tok) continue;
    if (tok->kind == TokenKind::alignment) {
      ++current;
    } else if (tok->kind == TokenKind::newline_cmd) {
      max_aligns = std::max(max_aligns, current);
      current = 0;
    }
  }
  max_aligns = std::max(max_aligns, current);
  return max_aligns + 1;
}

void append_delimiter_tokens(std::vector<Node>& out, std::string_view wrapper,
                             std::string_view delim) {
  out.push_back(LatexToken{TokenKind::command, std::string(wrapper)});
  for (const auto& tok : tokenize_latex(delim)) out.push_back(tok);
}

std::vector<Node> transform(std::vector<Node> nodes) {
  std::vector<Node> out;
  out.reserve(nodes.size());
  for (auto& node : nodes) {
    auto* env = std::get_if<EnvNode>(&node);
    if (!env) {
      out.push_back(std::move(node));
      continue;
    }
    env->children = transform(std::move(env->children));
    const DelimiterPair* family = matrix_family(env->name);
    if (!family) {
      out.push_back(std::move(node));
      continue;
    }
    EnvNode array;
    array.name = "array";
    array.colspec = std::string(static_cast<size_t>(infer_columns(env->children)), 'c');
    array.children = std::move(env->children);
    if (!family->left.empty()) append_delimiter_tokens(out, "\\left", family->left);
    out.push_back(std::move(array));
    if (!family->right.empty()) append_delimiter_tokens(out, "\\right", family->right);
  }
  return out;
}

// --- token-level rules -------------------------------------------------------

void rewrite_cr(std::vector<LatexToken>& tokens) {
  for (auto& tok : tokens)
    if (tok.kind == TokenKind::command && tok.text == "\\cr")
      tok = {TokenKind::newline_cmd, "\\\\"};
}

// Drops \\ (with an optional [len] argument) when the next significant
// token is \end or the stream ends. Dropping one break can expose another,
// so a single pass is repeated to a fixpoint to keep normalize idempotent.
void drop_trailing_row_breaks_once(std::vector<LatexToken>& tokens) {
  std::vector<LatexToken> out;
  out.reserve(tokens.size());
  for (size_t i = 0; i < tokens.size();) {
    if (tokens[i].kind != TokenKind::newline_cmd) {
      out.push_back(tokens[i]);
      ++i;
      continue;
    }
    size_t j = i + 1;
    if (j < tokens.size() && tokens[j].kind == TokenKind::open_bracket) {
      int brace_depth = 0;
      size_t k = j + 1;
      while (k < tokens.size()) {
        if (tokens[k].kind == TokenKind::open_brace) ++brace_depth;
        if (tokens[k].kind == TokenKind::close_brace && brace_depth > 0) --brace_depth;
        if (tokens[k].kind == TokenKind::close_bracket && brace_depth == 0) break;
        ++k;
      }
      if (k < tokens.size()) j = k + 1;  // bracket arg belongs to the row break
    }
    size_t next = j;
    while (next < tokens.size() && tokens[next].kind == TokenKind::whitespace) ++next;
    bool at_end = next >= tokens.size();
    bool before_end_cmd = next < tokens.size() &&
                          tokens[next].kind == TokenKind::command &&
                          tokens[next].text == "\\end";
    if (at_end || before_end_cmd) {
      i = j;  // drop the row break and its argument
      continue;
    }
    out.push_back(tokens[i]);
    ++i;
  }
  tokens = std::move(out);
}

void drop_trailing_row_breaks(std::vector<LatexToken>& tokens) {
  size_t before;
  do {
    before = tokens.size();
    drop_trailing_row_breaks_once(tokens);
  } while (tokens.size() != before);
}

// Whitespace collapse outside \text{...}. Runs of whitespace and control
// spaces become one token: a control space when the run contained one,
// else a single plain space. Leading and trailing runs are dropped.
void collapse_whitespace(std::vector<LatexToken>& tokens) {
  // mark opaque regions: brace groups following \text
  std::vector<bool> opaque(tokens.size(), false);
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind != TokenKind::command || tokens[i].text != "\\text") continue;
    size_t j = i + 1;
    while (j < tokens.size() && tokens[j].kind == TokenKind::whitespace) ++j;
    if (j >= tokens.size() || tokens[j].kind != TokenKind::open_brace) continue;
    int depth = 0;
    for (size_t k = j; k < tokens.size(); ++k) {
      if (tokens[k].kind == TokenKind::open_brace) ++depth;
      if (tokens[k].kind == TokenKind::close_brace) --depth;
      opaque[k] = true;
      if (depth == 0) break;
    }
    // unclosed \text group: everything to the end stays opaque
  }
  std::vector<LatexToken> out;
  out.reserve(tokens.size());
  size_t i = 0;
  while (i < tokens.size()) {
    bool collapsible = !opaque[i] && (tokens[i].kind == TokenKind::whitespace ||
                                      is_control_space(tokens[i]));
    if (!collapsible) {
      out.push_back(tokens[i]);
      ++i;
      continue;
    }
    bool has_control_space = false;
    size_t j = i;
    while (j < tokens.size() && !opaque[j] &&
           (tokens[j].kind == TokenKind::whitespace || is_control_space(tokens[j]))) {
      has_control_space = has_control_space || is_control_space(tokens[j]);
      ++j;
    }
    bool at_edge = out.empty() || j >= tokens.size();
    if (has_control_space) {
      out.push_back(LatexToken{TokenKind::command, "\\ "});
    } else if (!at_edge) {
      out.push_back(LatexToken{TokenKind::whitespace, " "});
    }
    i = j;
  }
  tokens = std::move(out);
}

// x^{2} -> x^2 for single-token groups after ^ or _; off by default.
void strip_redundant_braces(std::vector<LatexToken>& tokens) {
  std::vector<LatexToken> out;
  out.reserve(tokens.size());
  for (size_t i = 0; i < tokens.size();) {
    bool is_script = tokens[i].kind == TokenKind::symbol &&
                     (tokens[i].text == "^" || tokens[i].text == "_");
    bool single_token_group =
        is_script && i + 3 < tokens.size() &&
        tokens[i + 1].kind == TokenKind::open_brace &&
        (tokens[i + 2].kind == TokenKind::letter || tokens[i + 2].kind == TokenKind::digit ||
         tokens[i + 2].kind == TokenKind::command) &&
        tokens[i + 3].kind == TokenKind::close_brace;
    if (single_token_group) {
      out.push_back(tokens[i]);
      out.push_back(tokens[i + 2]);
      i += 4;
      continue;
    }
    out.push_back(tokens[i]);
    ++i;
  }
  tokens = std::move(out);
}

}  // namespace

NormalizeResult normalize(std::string_view src, const NormalizeOptions& options) {
  std::vector<LatexToken> tokens = tokenize_latex(src);
  rewrite_cr(tokens);

  TreeParser parser{tokens};
  std::vector<Node> tree = parser.parse(nullptr);
  if (parser.fail) return {std::string(src), false, parser.fail->reason};
  tree = transform(std::move(tree));

  std::string flat;
  serialize(tree, flat);
  tokens = tokenize_latex(flat);

  drop_trailing_row_breaks(tokens);
  collapse_whitespace(tokens);
  if (options.strip_redundant_braces) strip_redundant_braces(tokens);
  return {join_tokens(tokens), true, {}};
}

const std::vector<RewriteRule>& rewrite_rules() {
  static const std::vector<RewriteRule> rules = {
      {"matrix_to_array",
       "matrix environments become array with centered columns inferred from "
       "the widest row",
       "\\begin{matrix}a&b\\\\c&d\\end{matrix}",
       "\\begin{array}{cc}a&b\\\\c&d\\end{array}", true},
      {"delimited_matrix_unwrap",
       "pmatrix/bmatrix/Bmatrix/vmatrix/Vmatrix become \\left..\\right around "
       "an array",
       "\\begin{pmatrix}a&b\\\\c&d\\end{pmatrix}",
       "\\left(\\begin{array}{cc}a&b\\\\c&d\\end{array}\\right)", true},
      {"cr_to_row_break", "\\cr row terminators become \\\\",
       "\\begin{matrix}a\\cr b\\end{matrix}",
       "\\begin{array}{c}a\\\\ b\\end{array}", true},
      {"trailing_row_break_drop",
       "a row break directly before \\end or the end of the formula is dropped",
       "x\\\\", "x", true},
      {"whitespace_collapse",
       "whitespace runs outside \\text{...} collapse to one space (a run "
       "touching a control space keeps one control space); ends are trimmed",
       "a\\ \\ b", "a\\ b", true},
      {"redundant_brace_strip",
       "single-token groups after ^ or _ lose their braces (changes token "
       "counts; enable explicitly)",
       "x^{2}", "x^2", false},
  };
  return rules;
}

}  // namespace formine
