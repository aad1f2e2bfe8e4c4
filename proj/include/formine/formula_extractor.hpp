#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "formine/source_graph.hpp"
#include "formine/warnings.hpp"

namespace formine {

enum class EnvKind {
  dollar_display,
  bracket_display,
  equation,
  equation_star,
  align,
  align_star,
  multline,
  multline_star,
  gather,
  gather_star,
  eqnarray,
  eqnarray_star,
  displaymath,
};

const char* to_string(EnvKind kind);
std::optional<EnvKind> env_kind_from_string(std::string_view name);

/// One display-math region. body is the interior with delimiters excluded
/// and \label / \tag constructs removed; [begin, end) covers the whole
/// region, delimiters included, in the source document.
struct FormulaSpan {
  std::string body;
  EnvKind env_kind;
  size_t begin = 0;
  size_t end = 0;
};

/// Removes figure, figure*, table, table*, tabular and wrapfigure
/// environments with everything nested inside them. An unmatched \begin
/// drops through to end-of-document with a warning.
FlatDocument strip_float_environments(const FlatDocument& doc, Warnings* warnings = nullptr);

/// Single left-to-right scan for $$..$$, \[..\] and the display
/// environments. Inner nested math environments stay inside the outer
/// span; spans come back in document order and pairwise disjoint.
/// Unterminated regions are skipped with a warning.
std::vector<FormulaSpan> extract_formulas(const FlatDocument& doc, Warnings* warnings = nullptr);

}  // namespace formine
