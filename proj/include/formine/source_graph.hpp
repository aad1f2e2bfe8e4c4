#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "formine/source_bundle.hpp"
#include "formine/warnings.hpp"

namespace formine {

struct ProvenanceSpan {
  size_t begin = 0;  // [begin, end) into FlatDocument::text
  size_t end = 0;
  std::string path;
};

/// The include-resolved, comment-stripped document. Provenance spans are
/// contiguous, non-overlapping, and cover text exactly.
struct FlatDocument {
  std::string text;
  std::vector<ProvenanceSpan> provenance;
  std::string main_path;
};

/// Picks the document root. Preference order: `\documentclass`, then
/// `\begin{document}`, then `\usepackage`, then file size, then
/// lexicographic path. Only TeX-like files are candidates.
std::string detect_main_file(const SourceBundle& bundle);

/// Splices `\input{X}` / `\include{X}` contents in place of the referencing
/// token, recursively, with UTF-8 sanitization and comment stripping applied
/// per file. Missing includes splice empty text and warn; reference cycles
/// raise include_cycle.
FlatDocument resolve_includes(const SourceBundle& bundle, const std::string& main,
                              Warnings* warnings = nullptr);

/// Removes sorted, disjoint [begin, end) ranges from the document,
/// rebuilding text and provenance.
FlatDocument remove_ranges(const FlatDocument& doc,
                           const std::vector<std::pair<size_t, size_t>>& ranges);

/// `%` to end-of-line, `\%` kept. The newline is kept so line structure
/// survives.
std::string strip_comments(std::string_view src);

/// Lossy UTF-8 decoding: malformed bytes become U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

}  // namespace formine
