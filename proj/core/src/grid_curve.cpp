#include "hatk/grid_curve.hpp"

#include <cstdlib>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "hatk/error.hpp"

namespace hatk {

void GridShape::validate() const {
  if (height == 0 || width == 0) {
    throw ValidationError("grid shape must be at least 1x1, got " + std::to_string(height) + "x" +
                          std::to_string(width));
  }
  if (tokens() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("grid has too many cells for 32-bit sequence indices");
  }
}

std::string_view to_string(Ordering ordering) {
  return ordering == Ordering::Hilbert ? "hilbert" : "rowmajor";
}

Ordering parse_ordering(std::string_view name) {
  if (name == "hilbert") return Ordering::Hilbert;
  if (name == "rowmajor" || name == "row-major" || name == "row_major") return Ordering::RowMajor;
  throw ValidationError("unknown ordering '" + std::string(name) + "'");
}

CurveMapping::CurveMapping(GridShape shape, Ordering kind, std::vector<Cell> order)
    : shape_(shape), kind_(kind), order_(std::move(order)) {
  shape_.validate();
  const std::size_t n = shape_.tokens();
  if (order_.size() != n) {
    throw ValidationError("curve order has " + std::to_string(order_.size()) + " cells, grid has " +
                          std::to_string(n));
  }
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  inverse_.assign(n, kUnset);
  for (std::size_t i = 0; i < n; ++i) {
    const Cell c = order_[i];
    if (c.row >= shape_.height || c.col >= shape_.width) {
      throw ValidationError("curve visits a cell outside the grid");
    }
    auto& slot = inverse_[static_cast<std::size_t>(c.row) * shape_.width + c.col];
    if (slot != kUnset) throw ValidationError("curve visits a cell twice");
    slot = static_cast<std::uint32_t>(i);
  }
}

CurveMapping row_major_order(GridShape shape) {
  shape.validate();
  std::vector<Cell> order;
  order.reserve(shape.tokens());
  for (std::uint32_t r = 0; r < shape.height; ++r) {
    for (std::uint32_t c = 0; c < shape.width; ++c) order.push_back({r, c});
  }
  return CurveMapping(shape, Ordering::RowMajor, std::move(order));
}

namespace {

int sign(long v) { return (v > 0) - (v < 0); }

// Recursive rectangle splitting. (x, y) is the start corner; (ax, ay) spans the
// major axis and (bx, by) the minor axis. x is the column, y the row.
void gilbert(long x, long y, long ax, long ay, long bx, long by, std::vector<Cell>& out) {
  const long w = std::labs(ax + ay);
  const long h = std::labs(bx + by);
  const long dax = sign(ax), day = sign(ay);
  const long dbx = sign(bx), dby = sign(by);

  auto emit = [&out](long cx, long cy) {
    out.push_back({static_cast<std::uint32_t>(cy), static_cast<std::uint32_t>(cx)});
  };

  if (h == 1) {
    for (long i = 0; i < w; ++i, x += dax, y += day) emit(x, y);
    return;
  }
  if (w == 1) {
    for (long i = 0; i < h; ++i, x += dbx, y += dby) emit(x, y);
    return;
  }

  long ax2 = ax / 2, ay2 = ay / 2;
  long bx2 = bx / 2, by2 = by / 2;
  const long w2 = std::labs(ax2 + ay2);
  const long h2 = std::labs(bx2 + by2);

  if (2 * w > 3 * h) {
    // Long rectangle: split the major axis in two, keeping each half even.
    if ((w2 % 2) != 0 && w > 2) {
      ax2 += dax;
      ay2 += day;
    }
    gilbert(x, y, ax2, ay2, bx, by, out);
    gilbert(x + ax2, y + ay2, ax - ax2, ay - ay2, bx, by, out);
  } else {
    // Standard case: one step up, one long horizontal, one step down.
    if ((h2 % 2) != 0 && h > 2) {
      bx2 += dbx;
      by2 += dby;
    }
    gilbert(x, y, bx2, by2, ax2, ay2, out);
    gilbert(x + bx2, y + by2, ax, ay, bx - bx2, by - by2, out);
    gilbert(x + (ax - dax) + (bx2 - dbx), y + (ay - day) + (by2 - dby), -bx2, -by2, -(ax - ax2),
            -(ay - ay2), out);
  }
}

}  // namespace

CurveMapping hilbert_order(GridShape shape) {
  shape.validate();
  std::vector<Cell> order;
  order.reserve(shape.tokens());
  const long h = shape.height;
  const long w = shape.width;
  bool major_is_width = w >= h;
  // The curve ends on the far corner of the major axis. With an even token
  // count that corner must have the opposite checkerboard colour to (0,0), so an
  // odd major side paired with an even minor side would force a diagonal step.
  const long major = major_is_width ? w : h;
  const long minor = major_is_width ? h : w;
  if ((major % 2) != 0 && (minor % 2) == 0) major_is_width = !major_is_width;

  if (major_is_width) {
    gilbert(0, 0, w, 0, 0, h, order);
  } else {
    gilbert(0, 0, 0, h, w, 0, order);
  }
  return CurveMapping(shape, Ordering::Hilbert, std::move(order));
}

CurveMapping make_mapping(GridShape shape, Ordering kind) {
  return kind == Ordering::Hilbert ? hilbert_order(shape) : row_major_order(shape);
}

CurveKey cache_key(GridShape shape, Ordering kind) {
  shape.validate();
  return CurveKey{shape, kind};
}

std::size_t CurveKeyHash::operator()(const CurveKey& key) const noexcept {
  const std::uint64_t packed = (static_cast<std::uint64_t>(key.shape.height) << 33) ^
                               (static_cast<std::uint64_t>(key.shape.width) << 1) ^
                               static_cast<std::uint64_t>(key.kind);
  return std::hash<std::uint64_t>{}(packed);
}

namespace {

struct CurveCache {
  std::shared_mutex mutex;
  std::unordered_map<CurveKey, std::shared_ptr<const CurveMapping>, CurveKeyHash> entries;
};

CurveCache& curve_cache() {
  static CurveCache cache;
  return cache;
}

}  // namespace

std::shared_ptr<const CurveMapping> cached_mapping(GridShape shape, Ordering kind) {
  const CurveKey key = cache_key(shape, kind);
  auto& cache = curve_cache();
  {
    std::shared_lock lock(cache.mutex);
    if (auto it = cache.entries.find(key); it != cache.entries.end()) return it->second;
  }
  auto built = std::make_shared<const CurveMapping>(make_mapping(shape, kind));
  std::unique_lock lock(cache.mutex);
  cache.entries[key] = built;
  return built;
}

std::size_t curve_cache_size() {
  auto& cache = curve_cache();
  std::shared_lock lock(cache.mutex);
  return cache.entries.size();
}

void clear_curve_cache() {
  auto& cache = curve_cache();
  std::unique_lock lock(cache.mutex);
  cache.entries.clear();
}

}  // namespace hatk
