#include "formine/formula_extractor.hpp"

#include <array>
#include <utility>

#include "tex_scan.hpp"

namespace formine {

namespace {

using detail::ControlSeq;
using detail::match_brace_group;
using detail::match_environment;
using detail::read_control_seq;
using detail::read_env_name;

constexpr std::array<std::string_view, 6> kFloatEnvs = {"figure",  "figure*", "table",
                                                        "table*",  "tabular", "wrapfigure"};

bool is_float_env(std::string_view name) {
  for (auto f : kFloatEnvs)
    if (f == name) return true;
  return false;
}

struct KindName {
  std::string_view name;
  EnvKind kind;
};

constexpr std::array<KindName, 11> kMathEnvs = {{
    {"equation", EnvKind::equation},
    {"equation*", EnvKind::equation_star},
    {"align", EnvKind::align},
    {"align*", EnvKind::align_star},
    {"multline", EnvKind::multline},
    {"multline*", EnvKind::multline_star},
    {"gather", EnvKind::gather},
    {"gather*", EnvKind::gather_star},
    {"eqnarray", EnvKind::eqnarray},
    {"eqnarray*", EnvKind::eqnarray_star},
    {"displaymath", EnvKind::displaymath},
}};

std::optional<EnvKind> math_env_kind(std::string_view name) {
  for (const auto& e : kMathEnvs)
    if (e.name == name) return e.kind;
  return std::nullopt;
}

// Finds the next occurrence of `closer` ("$$" or "$") treating control
// sequences as atomic. Returns the position or npos.
size_t find_dollar_closer(std::string_view text, size_t from, size_t dollars) {
  size_t i = from;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\\') {
      i = read_control_seq(text, i).end;
      continue;
    }
    if (c == '$') {
      if (dollars == 1) return i;
      if (i + 1 < text.size() && text[i + 1] == '$') return i;
    }
    ++i;
  }
  return std::string_view::npos;
}

// Finds the control symbol `\X` at or after `from`. Control words and other
// control symbols are skipped atomically.
size_t find_control_symbol(std::string_view text, size_t from, char symbol) {
  size_t i = from;
  while (i < text.size()) {
    if (text[i] != '\\') {
      ++i;
      continue;
    }
    ControlSeq cs = read_control_seq(text, i);
    if (!cs.is_word && cs.name.size() == 1 && cs.name[0] == symbol) return cs.begin;
    i = cs.end;
  }
  return std::string_view::npos;
}

// Drops \label{...} and \tag{...} / \tag*{...} constructs from a body.
std::string remove_labels_and_tags(std::string_view body) {
  std::string out;
  out.reserve(body.size());
  size_t i = 0;
  while (i < body.size()) {
    if (body[i] != '\\') {
      out += body[i];
      ++i;
      continue;
    }
    ControlSeq cs = read_control_seq(body, i);
    if (cs.is_word && (cs.name == "label" || cs.name == "tag")) {
      size_t j = cs.end;
      if (j < body.size() && body[j] == '*') ++j;
      size_t k = detail::skip_ws(body, j);
      if (k < body.size() && body[k] == '{') {
        size_t close = match_brace_group(body, k);
        if (close != std::string_view::npos) {
          i = close;
          continue;
        }
      }
    }
    out.append(body.substr(cs.begin, cs.end - cs.begin));
    i = cs.end;
  }
  return out;
}

}  // namespace

const char* to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::dollar_display: return "dollar_display";
    case EnvKind::bracket_display: return "bracket_display";
    case EnvKind::equation: return "equation";
    case EnvKind::equation_star: return "equation_star";
    case EnvKind::align: return "align";
    case EnvKind::align_star: return "align_star";
    case EnvKind::multline: return "multline";
    case EnvKind::multline_star: return "multline_star";
    case EnvKind::gather: return "gather";
    case EnvKind::gather_star: return "gather_star";
    case EnvKind::eqnarray: return "eqnarray";
    case EnvKind::eqnarray_star: return "eqnarray_star";
    case EnvKind::displaymath: return "displaymath";
  }
  return "unknown";
}

std::optional<EnvKind> env_kind_from_string(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(EnvKind::displaymath); ++k)
    if (name == to_string(static_cast<EnvKind>(k))) return static_cast<EnvKind>(k);
  return std::nullopt;
}

FlatDocument strip_float_environments(const FlatDocument& doc, Warnings* warnings) {
  std::string_view text = doc.text;
  std::vector<std::pair<size_t, size_t>> removals;
  size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '\\') {
      ++i;
      continue;
    }
    ControlSeq cs = read_control_seq(text, i);
    if (!cs.is_word || cs.name != "begin") {
      i = cs.end;
      continue;
    }
    auto env = read_env_name(text, cs.end);
    if (!env || !is_float_env(env->name)) {
      i = env ? env->end : cs.end;
      continue;
    }
    auto match = match_environment(text, env->end, env->name);
    if (!match) {
      warn(warnings, "float_strip",
           "unbalanced \\begin{" + env->name + "}, dropped to end of document");
      removals.emplace_back(cs.begin, text.size());
      break;
    }
    removals.emplace_back(cs.begin, match->end);
    i = match->end;
  }
  return remove_ranges(doc, removals);
}

std::vector<FormulaSpan> extract_formulas(const FlatDocument& doc, Warnings* warnings) {
  std::string_view text = doc.text;
  std::vector<FormulaSpan> spans;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '$') {
      bool display = i + 1 < text.size() && text[i + 1] == '$';
      size_t body_begin = i + (display ? 2 : 1);
      size_t closer = find_dollar_closer(text, body_begin, display ? 2 : 1);
      if (closer == std::string_view::npos) {
        if (display) warn(warnings, "extraction", "unterminated $$, span skipped");
        i = body_begin;
        continue;
      }
      if (display) {
        spans.push_back({remove_labels_and_tags(text.substr(body_begin, closer - body_begin)),
                         EnvKind::dollar_display, i, closer + 2});
      }
      // single-dollar inline math is skipped, not extracted
      i = closer + (display ? 2 : 1);
      continue;
    }
    if (c != '\\') {
      ++i;
      continue;
    }
    ControlSeq cs = read_control_seq(text, i);
    if (!cs.is_word && cs.name.size() == 1 && cs.name[0] == '[') {
      size_t closer = find_control_symbol(text, cs.end, ']');
      if (closer == std::string_view::npos) {
        warn(warnings, "extraction", "unterminated \\[, span skipped");
        i = cs.end;
        continue;
      }
      spans.push_back({remove_labels_and_tags(text.substr(cs.end, closer - cs.end)),
                       EnvKind::bracket_display, cs.begin, closer + 2});
      i = closer + 2;
      continue;
    }
    if (!cs.is_word && cs.name.size() == 1 && cs.name[0] == '(') {
      size_t closer = find_control_symbol(text, cs.end, ')');
      i = closer == std::string_view::npos ? cs.end : closer + 2;  // inline, skipped
      continue;
    }
    if (cs.is_word && cs.name == "begin") {
      auto env = read_env_name(text, cs.end);
      if (env) {
        if (auto kind = math_env_kind(env->name)) {
          auto match = match_environment(text, env->end, env->name);
          if (!match) {
            warn(warnings, "extraction",
                 "unterminated \\begin{" + env->name + "}, span skipped");
            i = env->end;
            continue;
          }
          spans.push_back(
              {remove_labels_and_tags(text.substr(env->end, match->body_end - env->end)),
               *kind, cs.begin, match->end});
          i = match->end;
          continue;
        }
        i = env->end;
        continue;
      }
    }
    i = cs.end;
  }
  return spans;
}

}  // namespace formine
