#pragma once

// Pure numeric kernels behind the model-side mechanisms: nearest-neighbor
// weight resampling for dimension-reduced layers, the feature-distillation
// loss with its analytic gradient, the block-parallel causal mask, and the
// multi-token decoding schedule. All functions are pure and thread-safe.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "formine/errors.hpp"

namespace formine {

namespace detail {

// Center-aligned nearest-neighbor index: floor((k + 0.5) * src / dst),
// computed exactly in integers as (2k + 1) * src / (2 * dst).
inline Eigen::Index nn_source_index(Eigen::Index k, Eigen::Index src, Eigen::Index dst) {
  return static_cast<Eigen::Index>(
      (2 * static_cast<std::int64_t>(k) + 1) * static_cast<std::int64_t>(src) /
      (2 * static_cast<std::int64_t>(dst)));
}

}  // namespace detail

/// Nearest-neighbor resample of a weight matrix along both axes.
/// Every output entry is a copy of some input entry; matched shapes return
/// the input unchanged.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> interpolate_linear(
    const Eigen::MatrixBase<Derived>& w, Eigen::Index new_rows, Eigen::Index new_cols) {
  if (new_rows < 1 || new_cols < 1)
    raise(ErrorCode::bad_argument, "interpolate_linear: target shape must be positive");
  const Eigen::Index src_rows = w.rows(), src_cols = w.cols();
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(new_rows, new_cols);
  for (Eigen::Index r = 0; r < new_rows; ++r) {
    const Eigen::Index sr = detail::nn_source_index(r, src_rows, new_rows);
    for (Eigen::Index c = 0; c < new_cols; ++c)
      out(r, c) = w(sr, detail::nn_source_index(c, src_cols, new_cols));
  }
  return out;
}

/// Norm-layer variant: unsqueeze the length-C vector to C x 1, resample,
/// squeeze back to a vector of new_len.
template <class Derived>
Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic> interpolate_norm(
    const Eigen::MatrixBase<Derived>& v, Eigen::Index new_len) {
  EIGEN_STATIC_ASSERT_VECTOR_ONLY(Derived);
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> column = v;
  return interpolate_linear(column, new_len, 1).col(0);
}

/// Mean squared feature distance between teacher rows and projected student
/// rows: (1/B) * sum_i || teacher_i - proj * student_i ||^2.
/// teacher is B x D, student is B x P, proj is D x P.
template <class DT, class DS, class DP>
typename DT::Scalar distill_loss(const Eigen::MatrixBase<DT>& teacher,
                                 const Eigen::MatrixBase<DS>& student,
                                 const Eigen::MatrixBase<DP>& proj) {
  if (teacher.rows() != student.rows() || proj.rows() != teacher.cols() ||
      proj.cols() != student.cols())
    raise(ErrorCode::shape_mismatch, "distill_loss: teacher BxD, student BxP, proj DxP required");
  auto residual = (teacher - student * proj.transpose()).eval();
  return residual.squaredNorm() / static_cast<typename DT::Scalar>(teacher.rows());
}

/// Gradient of distill_loss with respect to proj: (2/B) * sum_i
/// (proj * student_i - teacher_i) * student_i^T, shape D x P.
template <class DT, class DS, class DP>
Eigen::Matrix<typename DT::Scalar, Eigen::Dynamic, Eigen::Dynamic> distill_loss_grad(
    const Eigen::MatrixBase<DT>& teacher, const Eigen::MatrixBase<DS>& student,
    const Eigen::MatrixBase<DP>& proj) {
  if (teacher.rows() != student.rows() || proj.rows() != teacher.cols() ||
      proj.cols() != student.cols())
    raise(ErrorCode::shape_mismatch,
          "distill_loss_grad: teacher BxD, student BxP, proj DxP required");
  auto residual = (student * proj.transpose() - teacher).eval();  // B x D
  return (residual.transpose() * student) *
         (typename DT::Scalar(2) / static_cast<typename DT::Scalar>(teacher.rows()));
}

/// Square attention mask over {0, -inf}: entry (i, j) is 0 iff
/// floor(i/step) >= floor(j/step) (0-based), so step == 1 is the classic
/// causal mask and larger steps open 0-blocks of width step along the
/// block diagonal. -inf is the scalar's infinity sentinel in memory.
template <class Scalar = double>
struct ParallelCausalMask {
  Eigen::Index size = 0;
  Eigen::Index step = 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> data;
};

template <class Scalar = double>
ParallelCausalMask<Scalar> build_parallel_causal_mask(Eigen::Index size, Eigen::Index step) {
  if (size < 1 || step < 1)
    raise(ErrorCode::bad_argument, "build_parallel_causal_mask: size and step must be >= 1");
  ParallelCausalMask<Scalar> mask{size, step, {}};
  const Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();
  mask.data = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::NullaryExpr(
      size, size, [step, neg_inf](Eigen::Index i, Eigen::Index j) {
        return i / step >= j / step ? Scalar(0) : neg_inf;
      });
  return mask;
}

/// Text-grid form used by the CLI and golden-file tests: "0" / "-inf"
/// cells, space separated, one row per line.
template <class Scalar>
std::string mask_text_grid(const ParallelCausalMask<Scalar>& mask) {
  std::string out;
  for (Eigen::Index i = 0; i < mask.size; ++i) {
    for (Eigen::Index j = 0; j < mask.size; ++j) {
      if (j) out += ' ';
      out += mask.data(i, j) == Scalar(0) ? "0" : "-inf";
    }
    out += '\n';
  }
  return out;
}

/// File-emission form: -inf replaced by the most negative finite value of
/// the scalar type.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> mask_clamped_to_lowest(
    const ParallelCausalMask<Scalar>& mask) {
  const Scalar lowest = std::numeric_limits<Scalar>::lowest();
  return mask.data.unaryExpr(
      [lowest](Scalar v) { return v == Scalar(0) ? Scalar(0) : lowest; });
}

/// Multi-token decoding schedule. Seeds the sequence with start_token
/// replicated step times, asks next_fn for step tokens per call on the
/// current prefix, and stops when end_token shows up inside a block
/// (discarding it and any padding after it) or when max_len generated
/// tokens are reached. Returns the generated tokens, seed excluded.
/// next_fn: (const std::vector<Token>& prefix) -> std::vector<Token>.
template <class Token, class NextFn>
std::vector<Token> multi_token_decode(NextFn&& next_fn, const Token& start_token,
                                      const Token& end_token, int step, int max_len) {
  if (step < 1) raise(ErrorCode::bad_argument, "multi_token_decode: step must be >= 1");
  if (max_len < step)
    raise(ErrorCode::bad_argument, "multi_token_decode: max_len must be >= step");
  std::vector<Token> sequence(static_cast<size_t>(step), start_token);
  const size_t seed_len = sequence.size();
  const size_t limit = seed_len + static_cast<size_t>(max_len);
  while (sequence.size() < limit) {
    std::vector<Token> block = next_fn(sequence);
    if (block.empty()) break;
    bool ended = false;
    for (const Token& tok : block) {
      if (tok == end_token) {
        ended = true;
        break;  // padding after the end token is discarded
      }
      sequence.push_back(tok);
      if (sequence.size() == limit) break;
    }
    if (ended) break;
  }
  sequence.erase(sequence.begin(), sequence.begin() + static_cast<std::ptrdiff_t>(seed_len));
  return sequence;
}

}  // namespace formine
