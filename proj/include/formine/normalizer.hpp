#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace formine {

struct NormalizeOptions {
  // x^{2} -> x^2 changes token counts used for bucketing, so it stays off
  // unless asked for.
  bool strip_redundant_braces = false;
};

struct NormalizeResult {
  std::string text;
  bool ok = true;           // false: structure unparseable, text == input
  std::string reason;
};

/// Rewrites render-equivalent variants into one canonical form:
/// matrix-family environments become \begin{array}{..} (delimited variants
/// wrapped in \left..\right), \cr becomes \\, trailing row breaks before
/// \end or end-of-input are dropped, and whitespace runs outside \text{...}
/// collapse to a single space (runs touching a control space keep one
/// control space; ends are trimmed). Idempotent; total over arbitrary
/// input (unparseable environment structure returns the input flagged).
NormalizeResult normalize(std::string_view src, const NormalizeOptions& options = {});

struct RewriteRule {
  std::string id;
  std::string description;
  std::string example_before;
  std::string example_after;
  bool enabled_by_default = true;
};

const std::vector<RewriteRule>& rewrite_rules();

}  // namespace formine
