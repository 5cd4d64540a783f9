#include "hatk/patterns.hpp"

#include <algorithm>
#include <string>

#include "hatk/error.hpp"

namespace hatk {

std::string_view to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::WSA: return "wsa";
    case PatternKind::SA: return "sa";
    case PatternKind::NA2D: return "na2d";
    case PatternKind::HWA: return "hwa";
    case PatternKind::HSWA: return "hswa";
    case PatternKind::HSA: return "hsa";
    case PatternKind::HNA: return "hna";
  }
  return "?";
}

PatternKind parse_pattern_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "wsa") return PatternKind::WSA;
  if (lower == "sa") return PatternKind::SA;
  if (lower == "na2d" || lower == "na") return PatternKind::NA2D;
  if (lower == "hwa") return PatternKind::HWA;
  if (lower == "hswa") return PatternKind::HSWA;
  if (lower == "hsa") return PatternKind::HSA;
  if (lower == "hna") return PatternKind::HNA;
  throw ValidationError("unknown pattern '" + std::string(name) + "'");
}

Ordering ordering_of(PatternKind kind) {
  switch (kind) {
    case PatternKind::WSA:
    case PatternKind::SA:
    case PatternKind::NA2D:
      return Ordering::RowMajor;
    default:
      return Ordering::Hilbert;
  }
}

namespace {

bool uses_window(PatternKind k) {
  return k == PatternKind::WSA || k == PatternKind::HWA || k == PatternKind::HSWA;
}
bool uses_kernel(PatternKind k) { return k == PatternKind::SA || k == PatternKind::NA2D; }
bool uses_radius(PatternKind k) { return k == PatternKind::HSA || k == PatternKind::HNA; }

std::string extent_str(Extent2D e) {
  return std::to_string(e.rows) + "x" + std::to_string(e.cols);
}

}  // namespace

void PatternSpec::validate() const {
  shape.validate();
  const std::string what(to_string(kind));
  if (uses_window(kind)) {
    if (window.rows == 0 || window.cols == 0) throw ValidationError(what + ": window must be >= 1x1");
    if (shape.height % window.rows != 0 || shape.width % window.cols != 0) {
      throw ValidationError(what + ": window " + extent_str(window) + " does not divide grid " +
                            std::to_string(shape.height) + "x" + std::to_string(shape.width));
    }
    if (kind == PatternKind::HSWA && (shift1d == 0 || shift1d >= window.area())) {
      throw ValidationError("hswa: shift must satisfy 0 < shift < window area (" +
                            std::to_string(window.area()) + "), got " + std::to_string(shift1d));
    }
  } else if (uses_kernel(kind)) {
    if (kernel.rows == 0 || kernel.cols == 0 || kernel.rows % 2 == 0 || kernel.cols % 2 == 0) {
      throw ValidationError(what + ": kernel sides must be odd, got " + extent_str(kernel));
    }
    if (kernel.rows > shape.height || kernel.cols > shape.width) {
      throw ValidationError(what + ": kernel " + extent_str(kernel) + " larger than grid");
    }
  } else if (uses_radius(kind)) {
    if (radius1d == 0 || radius1d >= tokens()) {
      throw ValidationError(what + ": radius must satisfy 1 <= radius < N (" +
                            std::to_string(tokens()) + "), got " + std::to_string(radius1d));
    }
  }
}

std::string PatternSpec::describe() const {
  std::string out = std::string(to_string(kind)) + " " + std::to_string(shape.height) + "x" +
                    std::to_string(shape.width);
  if (uses_window(kind)) out += " w" + extent_str(window);
  if (uses_kernel(kind)) out += " k" + extent_str(kernel);
  if (uses_radius(kind)) out += " r" + std::to_string(radius1d);
  if (kind == PatternKind::HSWA) out += " s" + std::to_string(shift1d);
  return out;
}

PatternSpec PatternSpec::windowed(PatternKind kind, GridShape shape, Extent2D window) {
  if (!uses_window(kind)) throw ValidationError(std::string(to_string(kind)) + " is not a window pattern");
  PatternSpec s;
  s.kind = kind;
  s.shape = shape;
  s.window = window;
  if (kind == PatternKind::HSWA) s.shift1d = window.area() / 2;
  return s;
}

PatternSpec PatternSpec::kernelled(PatternKind kind, GridShape shape, Extent2D kernel) {
  if (!uses_kernel(kind)) throw ValidationError(std::string(to_string(kind)) + " is not a kernel pattern");
  PatternSpec s;
  s.kind = kind;
  s.shape = shape;
  s.kernel = kernel;
  return s;
}

PatternSpec PatternSpec::banded(PatternKind kind, GridShape shape, Extent2D kernel) {
  PatternSpec s = banded_radius(kind, shape, kernel.area() / 2);
  s.kernel = kernel;
  return s;
}

PatternSpec PatternSpec::banded_radius(PatternKind kind, GridShape shape, std::uint32_t radius) {
  if (!uses_radius(kind)) throw ValidationError(std::string(to_string(kind)) + " is not a 1D band pattern");
  PatternSpec s;
  s.kind = kind;
  s.shape = shape;
  s.radius1d = radius;
  return s;
}

Pattern::Pattern(PatternSpec spec) : spec_(spec) {
  spec_.validate();
  mapping_ = cached_mapping(spec_.shape, ordering_of(spec_.kind));
  n_ = static_cast<std::uint32_t>(spec_.tokens());
  window_tokens_ = spec_.window.area();
}

std::uint32_t Pattern::shifted_window(std::uint32_t p) const noexcept {
  const std::uint32_t shifted = p >= spec_.shift1d ? p - spec_.shift1d : p + n_ - spec_.shift1d;
  return shifted / window_tokens_;
}

bool Pattern::allowed(std::uint32_t q, std::uint32_t k) const {
  if (q >= n_ || k >= n_) {
    throw ValidationError("index out of range: (" + std::to_string(q) + ", " + std::to_string(k) +
                          ") with N = " + std::to_string(n_));
  }
  return allowed_unchecked(q, k);
}

namespace {

std::uint32_t abs_diff(std::uint32_t a, std::uint32_t b) { return a > b ? a - b : b - a; }

// Start of the length-`len` window centred on `pos`, clamped into [0, extent).
std::uint32_t clamped_start(std::uint32_t pos, std::uint32_t half, std::uint32_t len,
                            std::uint32_t extent) {
  const std::uint32_t lo = pos > half ? pos - half : 0;
  const std::uint32_t hi = extent > len ? extent - len : 0;
  return std::min(lo, hi);
}

}  // namespace

bool Pattern::allowed_unchecked(std::uint32_t q, std::uint32_t k) const noexcept {
  switch (spec_.kind) {
    case PatternKind::WSA: {
      const Cell a = mapping_->cell(q), b = mapping_->cell(k);
      return a.row / spec_.window.rows == b.row / spec_.window.rows &&
             a.col / spec_.window.cols == b.col / spec_.window.cols;
    }
    case PatternKind::SA: {
      const Cell a = mapping_->cell(q), b = mapping_->cell(k);
      return abs_diff(a.row, b.row) <= spec_.kernel.rows / 2 &&
             abs_diff(a.col, b.col) <= spec_.kernel.cols / 2;
    }
    case PatternKind::NA2D: {
      const Cell a = mapping_->cell(q), b = mapping_->cell(k);
      const auto r0 = clamped_start(a.row, spec_.kernel.rows / 2, spec_.kernel.rows, spec_.shape.height);
      const auto c0 = clamped_start(a.col, spec_.kernel.cols / 2, spec_.kernel.cols, spec_.shape.width);
      return b.row >= r0 && b.row < r0 + spec_.kernel.rows && b.col >= c0 &&
             b.col < c0 + spec_.kernel.cols;
    }
    case PatternKind::HWA:
      return q / window_tokens_ == k / window_tokens_;
    case PatternKind::HSWA:
      return shifted_window(q) == shifted_window(k) && segment(q) == segment(k);
    case PatternKind::HSA:
      return abs_diff(q, k) <= spec_.radius1d;
    case PatternKind::HNA: {
      const std::uint32_t len = std::min<std::uint64_t>(2ull * spec_.radius1d + 1, n_);
      const std::uint32_t s = clamped_start(q, spec_.radius1d, len, n_);
      return k >= s && k < s + len;
    }
  }
  return false;
}

void Pattern::allowed_keys(std::uint32_t q, std::vector<KeyInterval>& out) const {
  out.clear();
  auto push = [&out](std::uint32_t b, std::uint32_t e) {
    if (b >= e) return;
    if (!out.empty() && out.back().end == b) {
      out.back().end = e;
    } else {
      out.push_back({b, e});
    }
  };
  // Row-major rectangle [r0, r1) x [c0, c1) as one interval per grid row.
  auto push_rect = [&](std::uint32_t r0, std::uint32_t r1, std::uint32_t c0, std::uint32_t c1) {
    const std::uint32_t w = spec_.shape.width;
    for (std::uint32_t r = r0; r < r1; ++r) push(r * w + c0, r * w + c1);
  };

  switch (spec_.kind) {
    case PatternKind::WSA: {
      const Cell a = mapping_->cell(q);
      const std::uint32_t r0 = a.row / spec_.window.rows * spec_.window.rows;
      const std::uint32_t c0 = a.col / spec_.window.cols * spec_.window.cols;
      push_rect(r0, r0 + spec_.window.rows, c0, c0 + spec_.window.cols);
      break;
    }
    case PatternKind::SA: {
      const Cell a = mapping_->cell(q);
      const std::uint32_t hr = spec_.kernel.rows / 2, hc = spec_.kernel.cols / 2;
      const std::uint32_t r0 = a.row > hr ? a.row - hr : 0;
      const std::uint32_t r1 = std::min(spec_.shape.height, a.row + hr + 1);
      const std::uint32_t c0 = a.col > hc ? a.col - hc : 0;
      const std::uint32_t c1 = std::min(spec_.shape.width, a.col + hc + 1);
      push_rect(r0, r1, c0, c1);
      break;
    }
    case PatternKind::NA2D: {
      const Cell a = mapping_->cell(q);
      const auto r0 = clamped_start(a.row, spec_.kernel.rows / 2, spec_.kernel.rows, spec_.shape.height);
      const auto c0 = clamped_start(a.col, spec_.kernel.cols / 2, spec_.kernel.cols, spec_.shape.width);
      push_rect(r0, r0 + spec_.kernel.rows, c0, c0 + spec_.kernel.cols);
      break;
    }
    case PatternKind::HWA: {
      const std::uint32_t b = q / window_tokens_ * window_tokens_;
      push(b, b + window_tokens_);
      break;
    }
    case PatternKind::HSWA: {
      const std::uint32_t b = shifted_window(q) * window_tokens_ + spec_.shift1d;
      if (b + window_tokens_ <= n_) {
        push(b, b + window_tokens_);
      } else if (segment(q) == 0) {
        push(0, spec_.shift1d);
      } else {
        push(b, n_);
      }
      break;
    }
    case PatternKind::HSA: {
      const std::uint32_t r = spec_.radius1d;
      push(q > r ? q - r : 0, static_cast<std::uint32_t>(std::min<std::uint64_t>(n_, 1ull * q + r + 1)));
      break;
    }
    case PatternKind::HNA: {
      const std::uint32_t len = std::min<std::uint64_t>(2ull * spec_.radius1d + 1, n_);
      const std::uint32_t s = clamped_start(q, spec_.radius1d, len, n_);
      push(s, s + len);
      break;
    }
  }
}

MaskMatrix::MaskMatrix(std::size_t n)
    : n_(n), words_per_row_((n + 63) / 64), bits_(n * ((n + 63) / 64), 0) {}

std::size_t MaskMatrix::row_count(std::size_t q) const noexcept {
  std::size_t total = 0;
  const auto* row = bits_.data() + q * words_per_row_;
  for (std::size_t w = 0; w < words_per_row_; ++w) total += std::popcount(row[w]);
  return total;
}

std::size_t MaskMatrix::count_in(std::size_t q0, std::size_t q1, std::size_t k0,
                                 std::size_t k1) const noexcept {
  q1 = std::min(q1, n_);
  k1 = std::min(k1, n_);
  if (q0 >= q1 || k0 >= k1) return 0;
  std::size_t total = 0;
  const std::size_t w0 = k0 >> 6, w1 = (k1 - 1) >> 6;
  for (std::size_t q = q0; q < q1; ++q) {
    const auto* row = bits_.data() + q * words_per_row_;
    for (std::size_t w = w0; w <= w1; ++w) {
      std::uint64_t word = row[w];
      if (w == w0) word &= ~std::uint64_t{0} << (k0 & 63);
      if (w == w1 && (k1 & 63) != 0) word &= (std::uint64_t{1} << (k1 & 63)) - 1;
      total += std::popcount(word);
    }
  }
  return total;
}

std::size_t MaskMatrix::count() const noexcept {
  std::size_t total = 0;
  for (auto w : bits_) total += std::popcount(w);
  return total;
}

bool MaskMatrix::symmetric() const noexcept {
  for (std::size_t q = 0; q < n_; ++q) {
    for (std::size_t k = q + 1; k < n_; ++k) {
      if (get(q, k) != get(k, q)) return false;
    }
  }
  return true;
}

MaskMatrix materialize_mask(const Pattern& pattern, std::size_t cap) {
  const std::size_t n = pattern.tokens();
  if (n > cap) {
    throw CapacityError("mask with N = " + std::to_string(n) + " exceeds the dense cap of " +
                        std::to_string(cap) + " tokens; classify blocks from the predicate instead");
  }
  // Built from the predicate, not from allowed_keys(), so the dense route stays
  // independent of the interval route used by block classification.
  MaskMatrix mask(n);
  for (std::uint32_t q = 0; q < n; ++q) {
    for (std::uint32_t k = 0; k < n; ++k) {
      if (pattern.allowed_unchecked(q, k)) mask.set(q, k);
    }
  }
  return mask;
}

MaskMatrix permute_mask(const MaskMatrix& mask, std::span<const std::uint32_t> perm) {
  const std::size_t n = mask.size();
  if (perm.size() != n) throw ValidationError("permutation length does not match mask size");
  MaskMatrix out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (mask.get(perm[i], perm[j])) out.set(i, j);
    }
  }
  return out;
}

}  // namespace hatk
