#include "formine/macro_engine.hpp"

#include <algorithm>
#include <array>

#include "formine/errors.hpp"
#include "tex_scan.hpp"

namespace formine {

namespace {

using detail::ControlSeq;
using detail::match_bracket_group;
using detail::match_brace_group;
using detail::read_control_seq;
using detail::skip_ws;

// Stock commands whose redefinition is applied but worth flagging.
constexpr std::array<std::string_view, 18> kCoreCommands = {
    "\\vec",  "\\hat",   "\\bar",  "\\tilde", "\\dot",  "\\ddot",
    "\\frac", "\\sqrt",  "\\le",   "\\ge",    "\\ne",   "\\to",
    "\\epsilon", "\\phi", "\\emptyset", "\\implies", "\\iff", "\\mod"};

bool is_core_command(std::string_view name) {
  return std::find(kCoreCommands.begin(), kCoreCommands.end(), name) != kCoreCommands.end();
}

// Highest #k referenced in a template, 0 when none; -1 on a bad reference
// like #0 or a trailing #.
int max_param_ref(std::string_view body) {
  int max_ref = 0;
  size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '\\') {
      i = read_control_seq(body, i).end;
      continue;
    }
    if (body[i] == '#') {
      if (i + 1 >= body.size()) return -1;
      char d = body[i + 1];
      if (d == '#') {
        i += 2;
        continue;
      }
      if (d < '1' || d > '9') return -1;
      max_ref = std::max(max_ref, d - '0');
      i += 2;
      continue;
    }
    ++i;
  }
  return max_ref;
}

// Command name at pos, either braced ({\name}) or bare (\name). Names are
// a backslash plus letters.
struct ParsedName {
  std::string name;
  size_t end = 0;
};

std::optional<ParsedName> read_command_name(std::string_view text, size_t pos) {
  size_t i = skip_ws(text, pos);
  bool braced = false;
  if (i < text.size() && text[i] == '{') {
    braced = true;
    i = skip_ws(text, i + 1);
  }
  if (i >= text.size() || text[i] != '\\') return std::nullopt;
  ControlSeq cs = read_control_seq(text, i);
  if (!cs.is_word) return std::nullopt;
  size_t end = cs.end;
  if (braced) {
    end = skip_ws(text, end);
    if (end >= text.size() || text[end] != '}') return std::nullopt;
    ++end;
  }
  return ParsedName{std::string(text.substr(cs.begin, cs.end - cs.begin)), end};
}

struct BraceGroup {
  std::string_view interior;
  size_t end = 0;
};

std::optional<BraceGroup> read_brace_group(std::string_view text, size_t pos) {
  size_t i = skip_ws(text, pos);
  if (i >= text.size() || text[i] != '{') return std::nullopt;
  size_t close = match_brace_group(text, i);
  if (close == std::string_view::npos) return std::nullopt;
  return BraceGroup{text.substr(i + 1, close - i - 2), close};
}

// \newcommand / \renewcommand, starting right after the keyword.
std::optional<std::pair<MacroDef, size_t>> parse_newcommand(std::string_view text, size_t pos,
                                                            MacroKind kind) {
  size_t i = pos;
  if (i < text.size() && text[i] == '*') ++i;  // \newcommand* behaves identically here
  auto name = read_command_name(text, i);
  if (!name) return std::nullopt;
  i = name->end;
  MacroDef def;
  def.name = name->name;
  def.kind = kind;
  size_t j = skip_ws(text, i);
  if (j < text.size() && text[j] == '[') {
    size_t close = match_bracket_group(text, j);
    if (close == std::string_view::npos) return std::nullopt;
    std::string digits(text.substr(j + 1, close - j - 2));
    if (digits.size() != 1 || digits[0] < '0' || digits[0] > '9') return std::nullopt;
    def.arity = digits[0] - '0';
    i = close;
    j = skip_ws(text, i);
    if (j < text.size() && text[j] == '[') {
      close = match_bracket_group(text, j);
      if (close == std::string_view::npos) return std::nullopt;
      def.optional_default = std::string(text.substr(j + 1, close - j - 2));
      i = close;
    }
  }
  auto body = read_brace_group(text, i);
  if (!body) return std::nullopt;
  def.body = std::string(body->interior);
  if (def.optional_default && def.arity == 0) return std::nullopt;
  int refs = max_param_ref(def.body);
  if (refs < 0 || refs > def.arity) return std::nullopt;
  def.core_redefinition = kind == MacroKind::renewcommand && is_core_command(def.name);
  return std::make_pair(std::move(def), body->end);
}

// \def\name<params>{body}; only undelimited #1..#9 parameter text is
// supported, anything fancier is skipped by the caller.
std::optional<std::pair<MacroDef, size_t>> parse_def(std::string_view text, size_t pos) {
  size_t i = skip_ws(text, pos);
  if (i >= text.size() || text[i] != '\\') return std::nullopt;
  ControlSeq cs = read_control_seq(text, i);
  if (!cs.is_word) return std::nullopt;
  MacroDef def;
  def.name = std::string(text.substr(cs.begin, cs.end - cs.begin));
  def.kind = MacroKind::def;
  i = skip_ws(text, cs.end);  // the tokenizer would eat spaces after a control word
  int params = 0;
  while (i < text.size() && text[i] != '{') {
    if (text[i] != '#' || i + 1 >= text.size()) return std::nullopt;
    char d = text[i + 1];
    if (d != static_cast<char>('1' + params)) return std::nullopt;
    ++params;
    i += 2;
  }
  def.arity = params;
  auto body = read_brace_group(text, i);
  if (!body) return std::nullopt;
  def.body = std::string(body->interior);
  int refs = max_param_ref(def.body);
  if (refs < 0 || refs > def.arity) return std::nullopt;
  return std::make_pair(std::move(def), body->end);
}

std::optional<std::pair<MacroDef, size_t>> parse_math_operator(std::string_view text, size_t pos) {
  size_t i = pos;
  bool starred = false;
  if (i < text.size() && text[i] == '*') {
    starred = true;
    ++i;
  }
  auto name = read_command_name(text, i);
  if (!name) return std::nullopt;
  auto body = read_brace_group(text, name->end);
  if (!body) return std::nullopt;
  MacroDef def;
  def.name = name->name;
  def.kind = starred ? MacroKind::declare_math_operator_star : MacroKind::declare_math_operator;
  def.body = (starred ? std::string("\\operatorname*{") : std::string("\\operatorname{")) +
             std::string(body->interior) + "}";
  return std::make_pair(std::move(def), body->end);
}

std::optional<std::pair<MacroDef, size_t>> parse_paired_delimiter(std::string_view text,
                                                                  size_t pos) {
  auto name = read_command_name(text, pos);
  if (!name) return std::nullopt;
  auto left = read_brace_group(text, name->end);
  if (!left) return std::nullopt;
  auto right = read_brace_group(text, left->end);
  if (!right) return std::nullopt;
  MacroDef def;
  def.name = name->name;
  def.kind = MacroKind::declare_paired_delimiter;
  def.arity = 1;
  def.body = std::string(left->interior) + " #1 " + std::string(right->interior);
  def.star_body = "\\left" + std::string(left->interior) + " #1 \\right" +
                  std::string(right->interior);
  return std::make_pair(std::move(def), right->end);
}

std::string instantiate(std::string_view tmpl, const std::vector<std::string>& args) {
  std::string out;
  out.reserve(tmpl.size() + 16);
  size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '#' && i + 1 < tmpl.size()) {
      char d = tmpl[i + 1];
      if (d >= '1' && d <= '9' && static_cast<size_t>(d - '1') < args.size()) {
        out += args[d - '1'];
        i += 2;
        continue;
      }
      if (d == '#') {  // ## collapses to a literal #
        out += '#';
        i += 2;
        continue;
      }
    }
    out += tmpl[i];
    ++i;
  }
  return out;
}

}  // namespace

const char* to_string(MacroKind kind) {
  switch (kind) {
    case MacroKind::newcommand: return "newcommand";
    case MacroKind::renewcommand: return "renewcommand";
    case MacroKind::def: return "def";
    case MacroKind::declare_math_operator: return "declare_math_operator";
    case MacroKind::declare_math_operator_star: return "declare_math_operator_star";
    case MacroKind::declare_paired_delimiter: return "declare_paired_delimiter";
  }
  return "unknown";
}

MacroTable parse_macro_definitions(std::string_view text, Warnings* warnings) {
  MacroTable table;
  size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '\\') {
      ++i;
      continue;
    }
    ControlSeq cs = read_control_seq(text, i);
    i = cs.end;
    if (!cs.is_word) continue;
    std::optional<std::pair<MacroDef, size_t>> parsed;
    if (cs.name == "newcommand") {
      parsed = parse_newcommand(text, cs.end, MacroKind::newcommand);
    } else if (cs.name == "renewcommand") {
      parsed = parse_newcommand(text, cs.end, MacroKind::renewcommand);
    } else if (cs.name == "def") {
      parsed = parse_def(text, cs.end);
    } else if (cs.name == "DeclareMathOperator") {
      parsed = parse_math_operator(text, cs.end);
    } else if (cs.name == "DeclarePairedDelimiter") {
      parsed = parse_paired_delimiter(text, cs.end);
    } else {
      continue;
    }
    if (!parsed) {
      warn(warnings, "macro_parse",
           "malformed \\" + std::string(cs.name) + " definition skipped");
      continue;
    }
    if (parsed->first.core_redefinition)
      warn(warnings, "macro_parse",
           "core command " + parsed->first.name + " redefined by document");
    table.entries[parsed->first.name] = std::move(parsed->first);  // later defs shadow
    i = parsed->second;
  }
  return table;
}

std::string expand_macros(std::string_view body, const MacroTable& table, int max_depth,
                          Warnings* warnings, ExpandFlags* flags) {
  if (max_depth < 1) raise(ErrorCode::bad_argument, "expand_macros: max_depth must be >= 1");
  std::string current(body);
  for (int depth = 0; depth < max_depth; ++depth) {
    std::string out;
    out.reserve(current.size() + 32);
    size_t expanded = 0;
    size_t i = 0;
    std::string_view text = current;
    while (i < text.size()) {
      if (text[i] != '\\') {
        out += text[i];
        ++i;
        continue;
      }
      ControlSeq cs = read_control_seq(text, i);
      const MacroDef* def = cs.is_word ? table.find(text.substr(cs.begin, cs.end - cs.begin))
                                       : nullptr;
      if (!def) {
        out.append(text.substr(cs.begin, cs.end - cs.begin));
        i = cs.end;
        continue;
      }
      size_t p = cs.end;
      std::string_view tmpl = def->body;
      if (def->kind == MacroKind::declare_paired_delimiter) {
        size_t q = skip_ws(text, p);
        if (q < text.size() && text[q] == '*') {
          tmpl = def->star_body;
          p = q + 1;
        }
      }
      std::vector<std::string> args;
      int mandatory = def->arity;
      if (def->optional_default) {
        --mandatory;
        size_t q = skip_ws(text, p);
        if (q < text.size() && text[q] == '[') {
          size_t close = match_bracket_group(text, q);
          if (close == std::string_view::npos)
            raise(ErrorCode::unbalanced_braces,
                  "optional argument of " + def->name + " never closes");
          args.emplace_back(text.substr(q + 1, close - q - 2));
          p = close;
        } else {
          args.push_back(*def->optional_default);
        }
      }
      bool arity_ok = true;
      for (int a = 0; a < mandatory; ++a) {
        size_t q = skip_ws(text, p);
        if (q >= text.size() || text[q] != '{') {
          arity_ok = false;
          break;
        }
        size_t close = match_brace_group(text, q);
        if (close == std::string_view::npos)
          raise(ErrorCode::unbalanced_braces, "argument of " + def->name + " never closes");
        args.emplace_back(text.substr(q + 1, close - q - 2));
        p = close;
      }
      if (!arity_ok) {
        // fewer brace groups than arity: leave the occurrence as written
        warn(warnings, "macro_expand",
             def->name + " used with fewer arguments than its arity; left unexpanded");
        if (flags) flags->arity_skipped = true;
        out.append(text.substr(cs.begin, cs.end - cs.begin));
        i = cs.end;
        continue;
      }
      if (def->core_redefinition && flags) flags->core_redefined = true;
      out += instantiate(tmpl, args);
      ++expanded;
      i = p;
    }
    if (expanded == 0) return out;
    current = std::move(out);
  }
  raise(ErrorCode::expansion_depth_exceeded,
        "macro expansion did not reach a fixpoint; self-referential definition likely");
}

nlohmann::json macro_table_to_json(const MacroTable& table) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, def] : table.entries) {
    nlohmann::json entry = {
        {"kind", to_string(def.kind)}, {"arity", def.arity}, {"body", def.body}};
    if (def.optional_default) entry["optional_default"] = *def.optional_default;
    if (!def.star_body.empty()) entry["star_body"] = def.star_body;
    if (def.core_redefinition) entry["core_redefinition"] = true;
    j[name] = std::move(entry);
  }
  return j;
}

MacroTable macro_table_from_json(const nlohmann::json& j) {
  MacroTable table;
  for (auto it = j.begin(); it != j.end(); ++it) {
    MacroDef def;
    def.name = it.key();
    const auto& e = it.value();
    std::string kind = e.value("kind", "newcommand");
    for (int k = 0; k <= static_cast<int>(MacroKind::declare_paired_delimiter); ++k)
      if (kind == to_string(static_cast<MacroKind>(k))) def.kind = static_cast<MacroKind>(k);
    def.arity = e.value("arity", 0);
    def.body = e.value("body", "");
    if (e.contains("optional_default")) def.optional_default = e["optional_default"];
    def.star_body = e.value("star_body", "");
    def.core_redefinition = e.value("core_redefinition", false);
    table.entries[def.name] = std::move(def);
  }
  return table;
}

}  // namespace formine
