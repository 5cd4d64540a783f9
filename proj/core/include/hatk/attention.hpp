#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "hatk/block_analysis.hpp"
#include "hatk/grid_curve.hpp"
#include "hatk/patterns.hpp"
#include "hatk/tensor.hpp"

namespace hatk {

/// Query/key/value arrays of shape (batch, heads, N, head_dim).
template <typename T>
struct AttnTensors {
  Tensor4<T> q;
  Tensor4<T> k;
  Tensor4<T> v;
  double scale = 1.0;

  /// scale = 1 / sqrt(head_dim)
  static AttnTensors make(Tensor4<T> q, Tensor4<T> k, Tensor4<T> v);
  const Shape4& shape() const noexcept { return q.shape(); }
  /// Shapes must match and every entry must be finite.
  void validate() const;
};

/// Additive score modifier. Global relative position bias looks up
/// table[h, drow + H - 1, dcol + W - 1] where (drow, dcol) is the 2D cell
/// offset between query and key, recovered through the token ordering.
class ScoreMod {
 public:
  enum class Kind : std::uint8_t { None, GlobalRpb };

  static ScoreMod none() { return ScoreMod(); }
  /// `table` holds heads * (2H-1) * (2W-1) values, row-major.
  static ScoreMod global_rpb(std::shared_ptr<const CurveMapping> mapping, std::size_t heads,
                             std::vector<double> table);

  Kind kind() const noexcept { return kind_; }
  bool active() const noexcept { return kind_ == Kind::GlobalRpb; }
  std::size_t heads() const noexcept { return heads_; }
  std::size_t table_rows() const noexcept;
  std::size_t table_cols() const noexcept;
  std::size_t table_size() const noexcept { return table_.size(); }
  const std::vector<double>& table() const noexcept { return table_; }
  const CurveMapping* mapping() const noexcept { return mapping_.get(); }

  /// Flat table index used for the (q, k) pair of head h.
  std::size_t table_index(std::size_t head, std::uint32_t q, std::uint32_t k) const;
  double bias(std::size_t head, std::uint32_t q, std::uint32_t k) const {
    return active() ? table_[table_index(head, q, k)] : 0.0;
  }

 private:
  Kind kind_ = Kind::None;
  std::shared_ptr<const CurveMapping> mapping_;
  std::size_t heads_ = 0;
  std::vector<double> table_;
};

double apply_score_mod(const ScoreMod& mod, std::size_t head, std::uint32_t q, std::uint32_t k, double raw);

/// Instrumentation of the block-sparse engine.
struct ExecStats {
  std::size_t blocks_visited = 0;        ///< distinct tiles touched
  std::size_t block_visits = 0;          ///< tile visits summed over (batch, head) slices
  std::size_t empty_blocks_visited = 0;  ///< must stay 0
  std::size_t pairs_evaluated = 0;       ///< query-key scores computed
  std::size_t elementwise_masks_applied = 0;  ///< predicate tests inside partial tiles

  friend bool operator==(const ExecStats&, const ExecStats&) = default;
};

struct ExecOptions {
  std::size_t threads = 1;
};

template <typename T>
struct SparseResult {
  Tensor4<T> out;
  ExecStats stats;
};

template <typename T>
struct AttnGrads {
  Tensor4<T> dq;
  Tensor4<T> dk;
  Tensor4<T> dv;
  std::vector<double> d_rpb;  ///< empty unless the score mod is a global RPB
};

/// Reference attention: softmax over exactly the allowed keys of each row,
/// accumulated in double. Throws DegenerateRowError for an empty mask row.
template <typename T>
Tensor4<T> dense_forward(const AttnTensors<T>& t, const MaskMatrix& mask, const ScoreMod& mod,
                         ExecOptions options = {});

/// Block-sparse attention: walks each query-block row's kv list in ascending
/// order with a streaming softmax. Full tiles skip mask tests; partial tiles
/// test the pattern predicate per element. Empty tiles are never touched.
template <typename T>
SparseResult<T> sparse_forward(const AttnTensors<T>& t, const BlockGrid& grid, const Pattern& pattern,
                               const ScoreMod& mod, ExecOptions options = {});

template <typename T>
AttnGrads<T> dense_backward(const AttnTensors<T>& t, const MaskMatrix& mask, const ScoreMod& mod,
                            const Tensor4<T>& grad_out, ExecOptions options = {});

template <typename T>
AttnGrads<T> sparse_backward(const AttnTensors<T>& t, const BlockGrid& grid, const Pattern& pattern,
                             const ScoreMod& mod, const Tensor4<T>& grad_out, ExecOptions options = {});

}  // namespace hatk
