#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace formine {

/// Sentence BLEU over LaTeX tokens: geometric mean of modified n-gram
/// precisions for n = 1..max_n, epsilon-substituted (1e-9) when a precision
/// is zero, times a brevity penalty exp(1 - |ref|/|cand|) when the candidate
/// is shorter than the reference. Orders that neither side can form
/// (n beyond the shorter sequence) are excluded, so bleu_score(x, x) == 1
/// for every non-empty x. An empty candidate scores 0; an empty reference
/// raises empty_reference.
double bleu_score(const std::vector<std::string>& candidate,
                  const std::vector<std::string>& reference, int max_n = 4);

/// Tokens BLEU operates on: normalizer tokens with whitespace dropped.
std::vector<std::string> bleu_tokens(std::string_view latex);

}  // namespace formine
