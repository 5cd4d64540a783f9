#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hatk/patterns.hpp"

namespace hatk {

/// Tile size of the attention matrix: b_q queries by b_k keys.
struct BlockSpec {
  std::uint32_t q = 128;
  std::uint32_t k = 128;

  void validate() const;
  friend constexpr bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

enum class BlockLabel : std::uint8_t { Empty = 0, Partial = 1, Full = 2 };

std::string_view to_string(BlockLabel label);

/// One non-empty tile in a query-block row.
struct KvEntry {
  std::uint32_t block = 0;  ///< key-block index
  bool partial = false;     ///< needs element-wise masking

  friend constexpr bool operator==(const KvEntry&, const KvEntry&) = default;
};

/// Tiling of the (padded) N x N mask into b_q x b_k blocks with a label per
/// tile. The sequence is padded to a multiple of the block size with phantom
/// tokens whose rows and columns are fully masked, so a tile touching padding
/// is never Full.
class BlockGrid {
 public:
  /// Builds a grid from explicit labels (row-major, rows x cols). The number
  /// of rows/cols must match ceil(n / block). Throws ValidationError if a
  /// tile that contains padding is labelled Full.
  static BlockGrid from_labels(std::size_t n, BlockSpec blocks, std::vector<BlockLabel> labels);

  std::size_t tokens() const noexcept { return n_; }
  const BlockSpec& block_spec() const noexcept { return blocks_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t padded_queries() const noexcept { return rows_ * blocks_.q; }
  std::size_t padded_keys() const noexcept { return cols_ * blocks_.k; }
  std::size_t total_blocks() const noexcept { return rows_ * cols_; }

  BlockLabel label(std::size_t row, std::size_t col) const { return labels_[row * cols_ + col]; }
  std::span<const BlockLabel> labels() const noexcept { return labels_; }

  /// Ascending non-empty key blocks of query-block row `row`.
  std::span<const KvEntry> kv_list(std::size_t row) const { return kv_lists_[row]; }
  /// r_i: non-empty tiles in row `row`.
  std::size_t row_nonempty(std::size_t row) const { return kv_lists_[row].size(); }
  /// R = sum of r_i.
  std::size_t nonempty() const noexcept { return nonempty_; }
  /// M: query-block rows that contain at least one real query.
  std::size_t cta_rows() const noexcept;

  std::size_t count(BlockLabel label) const noexcept;

  /// The pattern this grid was classified from, when known.
  const std::optional<PatternSpec>& source() const noexcept { return source_; }
  void set_source(const PatternSpec& spec) { source_ = spec; }

  friend bool operator==(const BlockGrid& a, const BlockGrid& b) {
    return a.n_ == b.n_ && a.blocks_ == b.blocks_ && a.labels_ == b.labels_;
  }

 private:
  BlockGrid(std::size_t n, BlockSpec blocks);
  void rebuild_lists();

  std::size_t n_ = 0;
  BlockSpec blocks_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<BlockLabel> labels_;
  std::vector<std::vector<KvEntry>> kv_lists_;
  std::size_t nonempty_ = 0;
  std::optional<PatternSpec> source_;

  friend class GridBuilder;
};

enum class ClassifyMethod : std::uint8_t {
  Intervals,  ///< count allowed pairs per tile from each query's key intervals
  Predicate,  ///< scan each tile with the predicate, stop once it is proven Partial
};

struct ClassifyOptions {
  ClassifyMethod method = ClassifyMethod::Intervals;
  std::size_t threads = 1;
};

/// Labels every tile of the pattern's mask. Both methods give identical grids.
BlockGrid classify(const Pattern& pattern, BlockSpec blocks, ClassifyOptions options = {});

/// Labels every tile of a materialized mask by popcount.
BlockGrid classify(const MaskMatrix& mask, BlockSpec blocks, std::size_t threads = 1);

struct SparsityReport {
  std::size_t n = 0;
  std::size_t n_pad_q = 0;
  std::size_t n_pad_k = 0;
  std::uint32_t b_q = 0;
  std::uint32_t b_k = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t total_blocks = 0;
  std::size_t full_blocks = 0;
  std::size_t partial_blocks = 0;
  std::size_t empty_blocks = 0;
  /// Fractions of all tiles. empty_ratio is the block sparsity.
  double full_ratio = 0;
  double partial_ratio = 0;
  double empty_ratio = 0;
  /// 1 - R*b_q*b_k / N^2: the figure block-sparse kernels report when they
  /// normalize by the unpadded N x N area. Equals empty_ratio when the block
  /// sizes divide N; can differ (or go negative) otherwise.
  double kernel_sparsity = 0;

  bool padded() const noexcept { return n_pad_q != n || n_pad_k != n; }
  friend bool operator==(const SparsityReport&, const SparsityReport&) = default;
};

SparsityReport sparsity(const BlockGrid& grid);

/// Compressed-row block metadata in the layout block-sparse kernels consume.
struct BlockMetadata {
  std::vector<std::uint32_t> row_offsets;  ///< rows + 1 entries
  std::vector<std::uint32_t> kv_indices;   ///< ascending within each row
  std::vector<std::uint8_t> needs_mask;    ///< 1 for Partial, 0 for Full

  std::size_t rows() const noexcept { return row_offsets.empty() ? 0 : row_offsets.size() - 1; }
  std::uint32_t kv_num_blocks(std::size_t row) const { return row_offsets[row + 1] - row_offsets[row]; }
};

BlockMetadata block_metadata(const BlockGrid& grid);

}  // namespace hatk
