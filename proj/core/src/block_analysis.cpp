#include "hatk/block_analysis.hpp"

#include <algorithm>
#include <string>

#include "hatk/error.hpp"
#include "hatk/parallel.hpp"

namespace hatk {

void BlockSpec::validate() const {
  if (q == 0 || k == 0) throw ValidationError("block sizes must be >= 1");
}

std::string_view to_string(BlockLabel label) {
  switch (label) {
    case BlockLabel::Empty: return "empty";
    case BlockLabel::Partial: return "partial";
    case BlockLabel::Full: return "full";
  }
  return "?";
}

BlockGrid::BlockGrid(std::size_t n, BlockSpec blocks) : n_(n), blocks_(blocks) {
  blocks_.validate();
  if (n == 0) throw ValidationError("block grid needs at least one token");
  rows_ = (n + blocks.q - 1) / blocks.q;
  cols_ = (n + blocks.k - 1) / blocks.k;
  labels_.assign(rows_ * cols_, BlockLabel::Empty);
}

void BlockGrid::rebuild_lists() {
  kv_lists_.assign(rows_, {});
  nonempty_ = 0;
  for (std::size_t i = 0; i < rows_; ++i) {
    auto& list = kv_lists_[i];
    for (std::size_t j = 0; j < cols_; ++j) {
      const BlockLabel l = labels_[i * cols_ + j];
      if (l != BlockLabel::Empty) {
        list.push_back({static_cast<std::uint32_t>(j), l == BlockLabel::Partial});
      }
    }
    nonempty_ += list.size();
  }
}

BlockGrid BlockGrid::from_labels(std::size_t n, BlockSpec blocks, std::vector<BlockLabel> labels) {
  BlockGrid grid(n, blocks);
  if (labels.size() != grid.labels_.size()) {
    throw ValidationError("expected " + std::to_string(grid.labels_.size()) + " labels, got " +
                          std::to_string(labels.size()));
  }
  for (std::size_t i = 0; i < grid.rows_; ++i) {
    for (std::size_t j = 0; j < grid.cols_; ++j) {
      const bool padded = (i + 1) * blocks.q > n || (j + 1) * blocks.k > n;
      if (padded && labels[i * grid.cols_ + j] == BlockLabel::Full) {
        throw ValidationError("tile (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") contains padding and cannot be full");
      }
    }
  }
  grid.labels_ = std::move(labels);
  grid.rebuild_lists();
  return grid;
}

std::size_t BlockGrid::cta_rows() const noexcept {
  // Padding is always shorter than one block, so every row holds a real query.
  return std::min(rows_, (n_ + blocks_.q - 1) / blocks_.q);
}

std::size_t BlockGrid::count(BlockLabel label) const noexcept {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

class GridBuilder {
 public:
  static BlockGrid make(std::size_t n, BlockSpec blocks) { return BlockGrid(n, blocks); }
  static std::vector<BlockLabel>& labels(BlockGrid& g) { return g.labels_; }
  static void finish(BlockGrid& g) { g.rebuild_lists(); }
};

namespace {

BlockLabel label_from_count(std::size_t allowed, std::size_t capacity, bool has_padding) {
  if (allowed == 0) return BlockLabel::Empty;
  if (!has_padding && allowed == capacity) return BlockLabel::Full;
  return BlockLabel::Partial;
}

void classify_row_intervals(const Pattern& pattern, BlockSpec bs, std::size_t row, std::size_t cols,
                            std::span<BlockLabel> out) {
  const std::size_t n = pattern.tokens();
  std::vector<std::uint64_t> counts(cols, 0);
  std::vector<KeyInterval> keys;
  const std::size_t q0 = row * bs.q;
  const std::size_t q1 = std::min(n, q0 + bs.q);
  for (std::size_t q = q0; q < q1; ++q) {
    pattern.allowed_keys(static_cast<std::uint32_t>(q), keys);
    for (const auto& iv : keys) {
      const std::size_t j0 = iv.begin / bs.k;
      const std::size_t j1 = (iv.end - 1) / bs.k;
      for (std::size_t j = j0; j <= j1; ++j) {
        const std::size_t lo = std::max<std::size_t>(iv.begin, j * bs.k);
        const std::size_t hi = std::min<std::size_t>(iv.end, (j + 1) * bs.k);
        counts[j] += hi - lo;
      }
    }
  }
  const std::size_t capacity = static_cast<std::size_t>(bs.q) * bs.k;
  const bool row_padded = q0 + bs.q > n;
  for (std::size_t j = 0; j < cols; ++j) {
    const bool padded = row_padded || (j + 1) * bs.k > n;
    out[j] = label_from_count(counts[j], capacity, padded);
  }
}

void classify_row_predicate(const Pattern& pattern, BlockSpec bs, std::size_t row, std::size_t cols,
                            std::span<BlockLabel> out) {
  const std::size_t n = pattern.tokens();
  const std::size_t q0 = row * bs.q;
  const std::size_t q1 = std::min(n, q0 + bs.q);
  for (std::size_t j = 0; j < cols; ++j) {
    const std::size_t k0 = j * bs.k;
    const std::size_t k1 = std::min(n, k0 + bs.k);
    bool any_allowed = false;
    bool any_masked = q0 + bs.q > n || k0 + bs.k > n;  // phantom pairs are masked
    for (std::size_t q = q0; q < q1 && !(any_allowed && any_masked); ++q) {
      for (std::size_t k = k0; k < k1; ++k) {
        if (pattern.allowed_unchecked(static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(k))) {
          any_allowed = true;
        } else {
          any_masked = true;
        }
        if (any_allowed && any_masked) break;
      }
    }
    out[j] = !any_allowed ? BlockLabel::Empty : (any_masked ? BlockLabel::Partial : BlockLabel::Full);
  }
}

}  // namespace

BlockGrid classify(const Pattern& pattern, BlockSpec blocks, ClassifyOptions options) {
  BlockGrid grid = GridBuilder::make(pattern.tokens(), blocks);
  auto& labels = GridBuilder::labels(grid);
  const std::size_t cols = grid.cols();
  parallel_for(grid.rows(), options.threads, [&](std::size_t row) {
    std::span<BlockLabel> out(labels.data() + row * cols, cols);
    if (options.method == ClassifyMethod::Predicate) {
      classify_row_predicate(pattern, blocks, row, cols, out);
    } else {
      classify_row_intervals(pattern, blocks, row, cols, out);
    }
  });
  GridBuilder::finish(grid);
  grid.set_source(pattern.spec());
  return grid;
}

BlockGrid classify(const MaskMatrix& mask, BlockSpec blocks, std::size_t threads) {
  const std::size_t n = mask.size();
  BlockGrid grid = GridBuilder::make(n, blocks);
  auto& labels = GridBuilder::labels(grid);
  const std::size_t cols = grid.cols();
  const std::size_t capacity = static_cast<std::size_t>(blocks.q) * blocks.k;
  parallel_for(grid.rows(), threads, [&](std::size_t row) {
    const std::size_t q0 = row * blocks.q;
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t k0 = j * blocks.k;
      const bool padded = q0 + blocks.q > n || k0 + blocks.k > n;
      labels[row * cols + j] =
          label_from_count(mask.count_in(q0, q0 + blocks.q, k0, k0 + blocks.k), capacity, padded);
    }
  });
  GridBuilder::finish(grid);
  return grid;
}

SparsityReport sparsity(const BlockGrid& grid) {
  SparsityReport r;
  r.n = grid.tokens();
  r.n_pad_q = grid.padded_queries();
  r.n_pad_k = grid.padded_keys();
  r.b_q = grid.block_spec().q;
  r.b_k = grid.block_spec().k;
  r.rows = grid.rows();
  r.cols = grid.cols();
  r.total_blocks = grid.total_blocks();
  r.full_blocks = grid.count(BlockLabel::Full);
  r.partial_blocks = grid.count(BlockLabel::Partial);
  r.empty_blocks = grid.count(BlockLabel::Empty);
  const auto total = static_cast<double>(r.total_blocks);
  r.full_ratio = static_cast<double>(r.full_blocks) / total;
  r.partial_ratio = static_cast<double>(r.partial_blocks) / total;
  r.empty_ratio = static_cast<double>(r.empty_blocks) / total;
  // Integer numerator and denominator; exact in double for N < 2^26.
  const double area = static_cast<double>(r.n) * static_cast<double>(r.n);
  const double computed = static_cast<double>(grid.nonempty()) * r.b_q * r.b_k;
  r.kernel_sparsity = (area - computed) / area;
  return r;
}

BlockMetadata block_metadata(const BlockGrid& grid) {
  BlockMetadata meta;
  meta.row_offsets.reserve(grid.rows() + 1);
  meta.row_offsets.push_back(0);
  meta.kv_indices.reserve(grid.nonempty());
  meta.needs_mask.reserve(grid.nonempty());
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    for (const auto& e : grid.kv_list(i)) {
      meta.kv_indices.push_back(e.block);
      meta.needs_mask.push_back(e.partial ? 1 : 0);
    }
    meta.row_offsets.push_back(static_cast<std::uint32_t>(meta.kv_indices.size()));
  }
  return meta;
}

}  // namespace hatk
