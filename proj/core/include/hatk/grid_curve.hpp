#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace hatk {

/// Size of a 2D token grid in cells.
struct GridShape {
  std::uint32_t height = 1;
  std::uint32_t width = 1;

  constexpr std::size_t tokens() const noexcept {
    return static_cast<std::size_t>(height) * width;
  }
  /// Throws ValidationError unless both sides are >= 1 and the token count
  /// fits a 32-bit sequence index.
  void validate() const;

  friend constexpr bool operator==(const GridShape&, const GridShape&) = default;
};

struct Cell {
  std::uint32_t row = 0;
  std::uint32_t col = 0;

  friend constexpr bool operator==(const Cell&, const Cell&) = default;
};

enum class Ordering : std::uint8_t { RowMajor, Hilbert };

std::string_view to_string(Ordering ordering);
/// Accepts "rowmajor" / "row-major" / "hilbert".
Ordering parse_ordering(std::string_view name);

/// Bijection between grid cells and 1D sequence positions.
class CurveMapping {
 public:
  /// Builds the mapping from an explicit visiting order. Throws ValidationError
  /// if `order` is not a permutation of the grid's cells.
  CurveMapping(GridShape shape, Ordering kind, std::vector<Cell> order);

  const GridShape& shape() const noexcept { return shape_; }
  Ordering kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return order_.size(); }

  /// Cell visited at sequence position `seq`.
  const Cell& cell(std::uint32_t seq) const { return order_[seq]; }
  /// Sequence position of the cell (row, col).
  std::uint32_t index(std::uint32_t row, std::uint32_t col) const {
    return inverse_[static_cast<std::size_t>(row) * shape_.width + col];
  }

  std::span<const Cell> order() const noexcept { return order_; }
  /// inverse()[row * width + col] is the sequence position of that cell.
  std::span<const std::uint32_t> inverse() const noexcept { return inverse_; }

  friend bool operator==(const CurveMapping& a, const CurveMapping& b) {
    return a.shape_ == b.shape_ && a.order_ == b.order_;
  }

 private:
  GridShape shape_;
  Ordering kind_;
  std::vector<Cell> order_;
  std::vector<std::uint32_t> inverse_;
};

CurveMapping row_major_order(GridShape shape);

/// Generalized Hilbert ("gilbert") curve. Starts at (0,0); on power-of-two
/// squares it coincides with the classic Hilbert curve. Consecutive cells are
/// always Chebyshev-adjacent, and Manhattan-adjacent unless both sides are odd.
CurveMapping hilbert_order(GridShape shape);

CurveMapping make_mapping(GridShape shape, Ordering kind);

struct CurveKey {
  GridShape shape;
  Ordering kind = Ordering::RowMajor;

  friend constexpr bool operator==(const CurveKey&, const CurveKey&) = default;
};

CurveKey cache_key(GridShape shape, Ordering kind);

struct CurveKeyHash {
  std::size_t operator()(const CurveKey& key) const noexcept;
};

/// Memoized mapping shared by every caller asking for the same key. Safe for
/// concurrent use; concurrent first requests may each build the mapping and
/// the last insert wins, which is harmless since the values are identical.
std::shared_ptr<const CurveMapping> cached_mapping(GridShape shape, Ordering kind);

/// Number of mappings currently memoized (for tests and diagnostics).
std::size_t curve_cache_size();
void clear_curve_cache();

}  // namespace hatk
