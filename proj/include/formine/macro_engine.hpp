#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "formine/source_graph.hpp"
#include "formine/warnings.hpp"

#include "json.hpp"

namespace formine {

enum class MacroKind {
  newcommand,
  renewcommand,
  def,
  declare_math_operator,
  declare_math_operator_star,
  declare_paired_delimiter,
};

const char* to_string(MacroKind kind);

/// One user-defined command. arity counts all parameters including the
/// optional one; body is a template over #1..#9. Paired delimiters carry a
/// second template for their starred call form.
struct MacroDef {
  std::string name;  // includes the backslash, e.g. "\\eps"
  MacroKind kind = MacroKind::newcommand;
  int arity = 0;
  std::optional<std::string> optional_default;
  std::string body;
  std::string star_body;          // declare_paired_delimiter only
  bool core_redefinition = false; // renewcommand of a stock LaTeX command
};

struct MacroTable {
  std::unordered_map<std::string, MacroDef> entries;

  const MacroDef* find(std::string_view token) const {
    auto it = entries.find(std::string(token));
    return it == entries.end() ? nullptr : &it->second;
  }
};

MacroTable parse_macro_definitions(std::string_view text, Warnings* warnings = nullptr);

inline MacroTable parse_macro_definitions(const FlatDocument& doc, Warnings* warnings = nullptr) {
  return parse_macro_definitions(doc.text, warnings);
}

/// Per-expansion soft outcomes surfaced to the caller so records can be
/// flagged without aborting.
struct ExpandFlags {
  bool arity_skipped = false;      // occurrence left unexpanded
  bool core_redefined = false;     // a core-command redefinition was applied
};

/// Replaces every table occurrence in body, locating argument groups by
/// brace matching on a pushdown stack, repeating passes until fixpoint.
/// Raises unbalanced_braces when an argument group never closes and
/// expansion_depth_exceeded after max_depth productive passes.
std::string expand_macros(std::string_view body, const MacroTable& table, int max_depth = 32,
                          Warnings* warnings = nullptr, ExpandFlags* flags = nullptr);

nlohmann::json macro_table_to_json(const MacroTable& table);
MacroTable macro_table_from_json(const nlohmann::json& j);

}  // namespace formine
