#pragma once

// Slow, direct reference implementations used to check the library. They
// deliberately share no code with it beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hatk/block_analysis.hpp"
#include "hatk/grid_curve.hpp"
#include "hatk/patterns.hpp"

namespace oracle {

using hatk::BlockLabel;
using hatk::Cell;
using hatk::GridShape;
using hatk::PatternKind;
using hatk::PatternSpec;

inline std::int64_t iabs(std::int64_t v) { return v < 0 ? -v : v; }

// Pattern predicate written straight from the definitions. Row-major kinds
// recover cells from the sequence index; Hilbert kinds only look at 1D
// positions, so no curve is needed.
inline bool allowed(const PatternSpec& s, std::uint32_t q, std::uint32_t k) {
  const std::int64_t W = s.shape.width, H = s.shape.height, N = H * W;
  const std::int64_t qr = q / W, qc = q % W, kr = k / W, kc = k % W;
  switch (s.kind) {
    case PatternKind::WSA:
      return qr / s.window.rows == kr / s.window.rows && qc / s.window.cols == kc / s.window.cols;
    case PatternKind::SA:
      return iabs(qr - kr) <= (s.kernel.rows - 1) / 2 && iabs(qc - kc) <= (s.kernel.cols - 1) / 2;
    case PatternKind::NA2D: {
      const std::int64_t kh = s.kernel.rows, kw = s.kernel.cols;
      const std::int64_t r0 = std::clamp<std::int64_t>(qr - kh / 2, 0, H - kh);
      const std::int64_t c0 = std::clamp<std::int64_t>(qc - kw / 2, 0, W - kw);
      return kr >= r0 && kr < r0 + kh && kc >= c0 && kc < c0 + kw;
    }
    case PatternKind::HWA: {
      const std::int64_t w = s.window.area();
      return q / w == k / w;
    }
    case PatternKind::HSWA: {
      // Roll the sequence forward by the shift, chunk into windows, and keep
      // only pairs that were on the same side of the wrap point.
      const std::int64_t w = s.window.area(), sh = s.shift1d;
      const std::int64_t pq = ((q - sh) % N + N) % N, pk = ((k - sh) % N + N) % N;
      const bool same_side = (q < sh) == (k < sh);
      return pq / w == pk / w && same_side;
    }
    case PatternKind::HSA:
      return iabs(static_cast<std::int64_t>(q) - k) <= s.radius1d;
    case PatternKind::HNA: {
      const std::int64_t len = std::min<std::int64_t>(2 * s.radius1d + 1, N);
      const std::int64_t start = std::clamp<std::int64_t>(static_cast<std::int64_t>(q) - s.radius1d, 0, N - len);
      return k >= start && k < start + len;
    }
  }
  return false;
}

// Tile labels by exhaustive enumeration over the padded N_pad x N_pad grid.
inline std::vector<BlockLabel> labels(const PatternSpec& s, std::uint32_t bq, std::uint32_t bk) {
  const std::size_t n = s.tokens();
  const std::size_t rows = (n + bq - 1) / bq, cols = (n + bk - 1) / bk;
  std::vector<BlockLabel> out(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      std::size_t hits = 0, cells = 0;
      bool padded = false;
      for (std::size_t q = i * bq; q < (i + 1) * bq; ++q) {
        for (std::size_t k = j * bk; k < (j + 1) * bk; ++k) {
          if (q >= n || k >= n) {
            padded = true;
            continue;
          }
          ++cells;
          hits += allowed(s, static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(k));
        }
      }
      out[i * cols + j] = hits == 0 ? BlockLabel::Empty
                          : (hits == cells && !padded) ? BlockLabel::Full
                                                       : BlockLabel::Partial;
    }
  }
  return out;
}

// Classic Hilbert index-to-coordinate conversion for a 2^k x 2^k grid, with
// x as the column and y as the row.
inline Cell classic_hilbert(std::uint32_t side, std::uint32_t d) {
  std::uint32_t x = 0, y = 0, t = d;
  for (std::uint32_t s = 1; s < side; s *= 2) {
    const std::uint32_t rx = 1 & (t / 2);
    const std::uint32_t ry = 1 & (t ^ rx);
    if (ry == 0) {
      if (rx == 1) {
        x = s - 1 - x;
        y = s - 1 - y;
      }
      std::swap(x, y);
    }
    x += s * rx;
    y += s * ry;
    t /= 4;
  }
  return {y, x};
}

// Returns an empty string when `order` is a bijection onto the grid whose
// consecutive cells are Chebyshev-adjacent, with at most one diagonal step and
// none unless both sides are odd; otherwise a description of the failure.
inline std::string check_curve(GridShape shape, std::span<const Cell> order) {
  const std::size_t n = shape.tokens();
  if (order.size() != n) return "length " + std::to_string(order.size()) + " != " + std::to_string(n);
  std::vector<char> seen(n, 0);
  for (const Cell& c : order) {
    if (c.row >= shape.height || c.col >= shape.width) return "cell out of range";
    auto& s = seen[static_cast<std::size_t>(c.row) * shape.width + c.col];
    if (s) return "cell visited twice";
    s = 1;
  }
  std::size_t diagonals = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::int64_t dr = iabs(static_cast<std::int64_t>(order[i].row) - order[i - 1].row);
    const std::int64_t dc = iabs(static_cast<std::int64_t>(order[i].col) - order[i - 1].col);
    if (std::max(dr, dc) != 1) return "step " + std::to_string(i) + " is not Chebyshev-adjacent";
    if (dr == 1 && dc == 1) ++diagonals;
  }
  const bool both_odd = shape.height % 2 == 1 && shape.width % 2 == 1;
  if (diagonals > (both_odd ? 1u : 0u)) return std::to_string(diagonals) + " diagonal steps";
  return {};
}

// Every aligned run of 4^j indices covers an axis-aligned 2^j x 2^j square.
inline bool quadrant_property(std::uint32_t side, std::span<const Cell> order) {
  for (std::uint32_t w = 2; w <= side; w *= 2) {
    const std::size_t run = static_cast<std::size_t>(w) * w;
    for (std::size_t s = 0; s < order.size(); s += run) {
      std::uint32_t r0 = UINT32_MAX, c0 = UINT32_MAX, r1 = 0, c1 = 0;
      for (std::size_t i = s; i < s + run; ++i) {
        r0 = std::min(r0, order[i].row);
        c0 = std::min(c0, order[i].col);
        r1 = std::max(r1, order[i].row);
        c1 = std::max(c1, order[i].col);
      }
      if (r1 - r0 + 1 != w || c1 - c0 + 1 != w || r0 % w != 0 || c0 % w != 0) return false;
    }
  }
  return true;
}

// Masked softmax attention for one (batch, head) slice in long double, with
// masked keys excluded from the sum. q, k, v are n x d row-major.
inline std::vector<double> attention(std::size_t n, std::size_t d, const std::vector<double>& q,
                                     const std::vector<double>& k, const std::vector<double>& v, double scale,
                                     const std::function<bool(std::size_t, std::size_t)>& ok,
                                     const std::function<double(std::size_t, std::size_t)>& bias) {
  std::vector<double> out(n * d, 0.0);
  std::vector<long double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    long double m = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (!ok(i, j)) continue;
      long double dot = 0;
      for (std::size_t c = 0; c < d; ++c) dot += static_cast<long double>(q[i * d + c]) * k[j * d + c];
      s[j] = dot * scale + bias(i, j);
      m = std::max(m, s[j]);
    }
    long double z = 0;
    std::vector<long double> acc(d, 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (!ok(i, j)) continue;
      const long double w = std::exp(s[j] - m);
      z += w;
      for (std::size_t c = 0; c < d; ++c) acc[c] += w * v[j * d + c];
    }
    for (std::size_t c = 0; c < d; ++c) out[i * d + c] = static_cast<double>(acc[c] / z);
  }
  return out;
}

// Central differences of a scalar function with respect to each entry of x.
inline std::vector<double> central_difference(std::vector<double> x, double h,
                                              const std::function<double(const std::vector<double>&)>& f) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

// Largest elementwise |a - b| / max(|a|, |b|, floor) where floor is 1e-3 of
// the largest reference magnitude, so entries that are zero up to round-off
// are compared on the tensor's own scale.
inline double max_relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double scale = 0;
  for (double x : numeric) scale = std::max(scale, std::abs(x));
  const double floor = std::max(1e-3 * scale, 1e-12);
  double worst = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

}  // namespace oracle
