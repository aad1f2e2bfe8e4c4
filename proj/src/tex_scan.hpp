#pragma once

// Internal character-level scanning helpers shared by the extractor, the
// macro engine, and the normalizer. Control sequences are always consumed
// atomically so escaped delimiters (\$, \{, \%) never terminate a scan.

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

namespace formine::detail {

inline bool scan_is_letter(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline bool scan_is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

inline size_t skip_ws(std::string_view text, size_t pos) {
  while (pos < text.size() && scan_is_space(text[pos])) ++pos;
  return pos;
}

// A control sequence starting at `begin` (which must index a backslash).
struct ControlSeq {
  size_t begin = 0;
  size_t end = 0;         // one past the last character
  std::string_view name;  // letters for control words, the single char otherwise
  bool is_word = false;
};

inline ControlSeq read_control_seq(std::string_view text, size_t begin) {
  ControlSeq cs;
  cs.begin = begin;
  size_t i = begin + 1;
  if (i >= text.size()) {
    cs.end = i;
    return cs;
  }
  if (scan_is_letter(text[i])) {
    size_t j = i;
    while (j < text.size() && scan_is_letter(text[j])) ++j;
    cs.name = text.substr(i, j - i);
    cs.end = j;
    cs.is_word = true;
  } else {
    cs.name = text.substr(i, 1);
    cs.end = i + 1;
  }
  return cs;
}

// Position one past the matching close brace for the open brace at `open`,
// or npos when the group never closes. Control sequences are atomic.
inline size_t match_brace_group(std::string_view text, size_t open) {
  size_t depth = 0;
  size_t i = open;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\\') {
      i = read_control_seq(text, i).end;
      continue;
    }
    if (c == '{') ++depth;
    if (c == '}') {
      if (--depth == 0) return i + 1;
    }
    ++i;
  }
  return std::string_view::npos;
}

// Matches the bracket group opened at `open` ('['), brace-aware: a ']'
// nested inside braces does not close the group. Returns one past ']'.
inline size_t match_bracket_group(std::string_view text, size_t open) {
  size_t brace_depth = 0;
  size_t i = open + 1;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\\') {
      i = read_control_seq(text, i).end;
      continue;
    }
    if (c == '{') ++brace_depth;
    if (c == '}' && brace_depth > 0) --brace_depth;
    if (c == ']' && brace_depth == 0) return i + 1;
    ++i;
  }
  return std::string_view::npos;
}

// Environment name in braces following \begin or \end, tolerating
// whitespace before the group. Names are letter runs plus optional digits,
// '@' and a trailing '*'.
struct EnvName {
  std::string name;
  size_t end = 0;  // one past the closing brace
};

inline std::optional<EnvName> read_env_name(std::string_view text, size_t pos) {
  size_t i = skip_ws(text, pos);
  if (i >= text.size() || text[i] != '{') return std::nullopt;
  size_t close = text.find('}', i + 1);
  if (close == std::string_view::npos) return std::nullopt;
  std::string name(text.substr(i + 1, close - i - 1));
  if (name.empty()) return std::nullopt;
  for (char c : name)
    if (!scan_is_letter(c) && !std::isdigit(static_cast<unsigned char>(c)) && c != '*' &&
        c != '@')
      return std::nullopt;
  return EnvName{std::move(name), close + 1};
}

// One past the end of the `\end{name}` matching the `\begin{name}` whose
// name group ends at `body_start`, honoring same-name nesting. Also yields
// the body range. npos end on failure.
struct EnvMatch {
  size_t body_begin = 0;
  size_t body_end = 0;  // start of the matching \end
  size_t end = 0;       // one past the matching \end{name}
};

inline std::optional<EnvMatch> match_environment(std::string_view text, size_t body_start,
                                                 std::string_view name) {
  size_t depth = 1;
  size_t i = body_start;
  while (i < text.size()) {
    if (text[i] != '\\') {
      ++i;
      continue;
    }
    ControlSeq cs = read_control_seq(text, i);
    if (cs.is_word && (cs.name == "begin" || cs.name == "end")) {
      auto env = read_env_name(text, cs.end);
      if (env && env->name == name) {
        depth += cs.name == "begin" ? 1 : -1;
        if (depth == 0) return EnvMatch{body_start, cs.begin, env->end};
      }
      i = env ? env->end : cs.end;
      continue;
    }
    i = cs.end;
  }
  return std::nullopt;
}

}  // namespace formine::detail
