#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hatk/grid_curve.hpp"

namespace hatk {

/// The seven local-attention mask patterns. The first three are built on the
/// row-major token order, the Hilbert variants on the Hilbert-ordered sequence.
enum class PatternKind : std::uint8_t {
  WSA,   ///< non-overlapping 2D windows
  SA,    ///< sliding 2D kernel, zero-padding at borders
  NA2D,  ///< 2D neighborhood clamped inside the grid
  HWA,   ///< contiguous windows of wh*ww tokens
  HSWA,  ///< HWA shifted forward along the sequence, wrap segments masked
  HSA,   ///< 1D band |q - k| <= radius
  HNA,   ///< 1D neighborhood of 2*radius+1 tokens clamped inside [0, N)
};

std::string_view to_string(PatternKind kind);
PatternKind parse_pattern_kind(std::string_view name);
Ordering ordering_of(PatternKind kind);

struct Extent2D {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t area() const noexcept { return rows * cols; }
  friend constexpr bool operator==(const Extent2D&, const Extent2D&) = default;
};

/// A pattern kind plus its parameters. Only the fields relevant to `kind` are
/// meaningful; use the factory functions to get the documented defaults.
struct PatternSpec {
  PatternKind kind = PatternKind::WSA;
  GridShape shape;
  Extent2D window;              // WSA, HWA, HSWA
  Extent2D kernel;              // SA, NA2D (and the default radius of HSA/HNA)
  std::uint32_t radius1d = 0;   // HSA, HNA
  std::uint32_t shift1d = 0;    // HSWA

  std::size_t tokens() const noexcept { return shape.tokens(); }
  /// Throws ValidationError when the parameters violate the pattern's rules.
  void validate() const;
  /// Short human-readable description, e.g. "hwa 64x64 w8x8".
  std::string describe() const;

  /// WSA / HWA / HSWA. HSWA gets shift = window area / 2.
  static PatternSpec windowed(PatternKind kind, GridShape shape, Extent2D window);
  /// SA / NA2D.
  static PatternSpec kernelled(PatternKind kind, GridShape shape, Extent2D kernel);
  /// HSA / HNA with radius = floor(kh*kw / 2), matching the 2D kernel's
  /// attended-token count.
  static PatternSpec banded(PatternKind kind, GridShape shape, Extent2D kernel);
  /// HSA / HNA with an explicit radius.
  static PatternSpec banded_radius(PatternKind kind, GridShape shape, std::uint32_t radius);

  friend bool operator==(const PatternSpec&, const PatternSpec&) = default;
};

/// Half-open range [begin, end) of key positions.
struct KeyInterval {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  friend constexpr bool operator==(const KeyInterval&, const KeyInterval&) = default;
};

/// A validated pattern bound to its token ordering. allowed() is the mask
/// predicate; allowed_keys() lists the same key set as sorted disjoint
/// intervals (at most max(wh, kh) of them).
class Pattern {
 public:
  explicit Pattern(PatternSpec spec);

  const PatternSpec& spec() const noexcept { return spec_; }
  const CurveMapping& mapping() const noexcept { return *mapping_; }
  std::shared_ptr<const CurveMapping> mapping_ptr() const noexcept { return mapping_; }
  std::uint32_t tokens() const noexcept { return n_; }

  /// Throws ValidationError for out-of-range indices.
  bool allowed(std::uint32_t q, std::uint32_t k) const;
  /// Same as allowed() without the range check.
  bool allowed_unchecked(std::uint32_t q, std::uint32_t k) const noexcept;

  /// Appends the allowed key intervals of query q to `out` (cleared first).
  void allowed_keys(std::uint32_t q, std::vector<KeyInterval>& out) const;

  /// Wrap segment of position p for HSWA: 0 for the head tokens that the
  /// cyclic shift moves to the end of the sequence, 1 otherwise.
  std::uint32_t segment(std::uint32_t p) const noexcept { return p < spec_.shift1d ? 0u : 1u; }
  /// Window id of position p after the HSWA forward shift.
  std::uint32_t shifted_window(std::uint32_t p) const noexcept;

 private:
  PatternSpec spec_;
  std::shared_ptr<const CurveMapping> mapping_;
  std::uint32_t n_ = 0;
  std::uint32_t window_tokens_ = 0;
};

/// Dense N x N boolean mask stored as packed 64-bit words, row-major.
class MaskMatrix {
 public:
  MaskMatrix() = default;
  explicit MaskMatrix(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  std::size_t words_per_row() const noexcept { return words_per_row_; }

  bool get(std::size_t q, std::size_t k) const noexcept {
    return (bits_[q * words_per_row_ + (k >> 6)] >> (k & 63)) & 1u;
  }
  void set(std::size_t q, std::size_t k, bool value = true) noexcept {
    auto& word = bits_[q * words_per_row_ + (k >> 6)];
    const std::uint64_t bit = std::uint64_t{1} << (k & 63);
    word = value ? (word | bit) : (word & ~bit);
  }

  std::size_t row_count(std::size_t q) const noexcept;
  /// Allowed pairs in rows [q0, q1) and columns [k0, k1).
  std::size_t count_in(std::size_t q0, std::size_t q1, std::size_t k0, std::size_t k1) const noexcept;
  std::size_t count() const noexcept;
  bool symmetric() const noexcept;

  friend bool operator==(const MaskMatrix&, const MaskMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t words_per_row_ = 0;
  std::vector<std::uint64_t> bits_;
};

inline constexpr std::size_t kDefaultDenseCap = 16384;

/// Materializes bits[q][k] = allowed(q, k). Throws CapacityError when
/// N > cap; use predicate-driven block classification for larger grids.
MaskMatrix materialize_mask(const Pattern& pattern, std::size_t cap = kDefaultDenseCap);

/// Returns P * mask * P^T where position i of the result is position perm[i]
/// of the input.
MaskMatrix permute_mask(const MaskMatrix& mask, std::span<const std::uint32_t> perm);

}  // namespace hatk
