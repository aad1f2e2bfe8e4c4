#include "formine/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <unordered_map>

#include "formine/errors.hpp"
#include "formine/latex_tokenizer.hpp"

namespace formine {

namespace {

constexpr double kEpsilonPrecision = 1e-9;

// Maps token strings to dense ids. Linear probing for small vocabularies,
// hash map beyond that; formula token streams rarely exceed the linear range.
class TokenInterner {
 public:
  int id(std::string_view tok) {
    if (!map_.empty()) {
      auto [it, inserted] = map_.try_emplace(tok, next_);
      if (inserted) ++next_;
      return it->second;
    }
    for (size_t i = 0; i < linear_.size(); ++i)
      if (linear_[i] == tok) return static_cast<int>(i);
    if (linear_.size() < kLinearLimit) {
      linear_.push_back(tok);
      return static_cast<int>(linear_.size() - 1);
    }
    map_.reserve(2 * kLinearLimit);
    for (size_t i = 0; i < linear_.size(); ++i) map_.emplace(linear_[i], static_cast<int>(i));
    next_ = static_cast<int>(linear_.size());
    map_.emplace(tok, next_);
    return next_++;
  }

 private:
  static constexpr size_t kLinearLimit = 48;
  std::vector<std::string_view> linear_;
  std::unordered_map<std::string_view, int> map_;
  int next_ = 0;
};

void intern(const std::vector<std::string>& tokens, TokenInterner& interner,
            std::vector<int>& out) {
  out.clear();
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(interner.id(t));
}

// Clipped match count for order n: multiset intersection of the two n-gram
// multisets, computed over position indices sorted by n-gram content.
size_t clipped_matches(const std::vector<int>& cand, const std::vector<int>& ref, size_t n) {
  auto positions = [n](const std::vector<int>& seq) {
    std::vector<size_t> pos(seq.size() + 1 - n);
    std::iota(pos.begin(), pos.end(), size_t{0});
    std::sort(pos.begin(), pos.end(), [&](size_t a, size_t b) {
      for (size_t i = 0; i < n; ++i)
        if (seq[a + i] != seq[b + i]) return seq[a + i] < seq[b + i];
      return false;
    });
    return pos;
  };
  auto cmp = [&](size_t a, size_t b) {  // n-gram at cand[a] vs ref[b]
    for (size_t i = 0; i < n; ++i)
      if (cand[a + i] != ref[b + i]) return cand[a + i] < ref[b + i] ? -1 : 1;
    return 0;
  };
  std::vector<size_t> cp = positions(cand);
  std::vector<size_t> rp = positions(ref);
  size_t matches = 0, ci = 0, ri = 0;
  while (ci < cp.size() && ri < rp.size()) {
    int c = cmp(cp[ci], rp[ri]);
    if (c < 0) {
      ++ci;
    } else if (c > 0) {
      ++ri;
    } else {
      // equal n-grams: advance over both runs, count min of multiplicities
      size_t crun = 1, rrun = 1;
      while (ci + crun < cp.size() && cmp(cp[ci + crun], rp[ri]) == 0) ++crun;
      while (ri + rrun < rp.size() && cmp(cp[ci], rp[ri + rrun]) == 0) ++rrun;
      matches += std::min(crun, rrun);
      ci += crun;
      ri += rrun;
    }
  }
  return matches;
}

}  // namespace

double bleu_score(const std::vector<std::string>& candidate,
                  const std::vector<std::string>& reference, int max_n) {
  if (max_n < 1) raise(ErrorCode::bad_argument, "bleu_score: max_n must be >= 1");
  if (reference.empty()) raise(ErrorCode::empty_reference, "bleu_score: reference is empty");
  if (candidate.empty()) return 0.0;

  TokenInterner interner;
  std::vector<int> cand, ref;
  intern(candidate, interner, cand);
  intern(reference, interner, ref);

  size_t orders = std::min({static_cast<size_t>(max_n), cand.size(), ref.size()});
  double log_sum = 0.0;
  for (size_t n = 1; n <= orders; ++n) {
    size_t total = cand.size() + 1 - n;
    size_t matched = clipped_matches(cand, ref, n);
    double p = matched == 0 ? kEpsilonPrecision
                            : static_cast<double>(matched) / static_cast<double>(total);
    log_sum += std::log(p);
  }
  double score = std::exp(log_sum / static_cast<double>(orders));
  if (cand.size() < ref.size())
    score *= std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(cand.size()));
  return score;
}

std::vector<std::string> bleu_tokens(std::string_view latex) {
  std::vector<std::string> out;
  for (auto& tok : tokenize_latex(latex))
    if (tok.kind != TokenKind::whitespace) out.push_back(std::move(tok.text));
  return out;
}

}  // namespace formine
