#include "hatk/attention.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "hatk/error.hpp"
#include "hatk/parallel.hpp"

namespace hatk {

template <typename T>
AttnTensors<T> AttnTensors<T>::make(Tensor4<T> q, Tensor4<T> k, Tensor4<T> v) {
  AttnTensors t{std::move(q), std::move(k), std::move(v), 1.0};
  t.scale = 1.0 / std::sqrt(static_cast<double>(t.q.shape().dim));
  return t;
}

template <typename T>
void AttnTensors<T>::validate() const {
  if (!(q.shape() == k.shape()) || !(q.shape() == v.shape())) {
    throw ValidationError("q, k and v must have identical shapes");
  }
  if (q.shape().numel() == 0) throw ValidationError("attention tensors are empty");
  if (!q.all_finite() || !k.all_finite() || !v.all_finite()) {
    throw ValidationError("attention inputs contain non-finite values");
  }
  if (!std::isfinite(scale)) throw ValidationError("attention scale is not finite");
}

template struct AttnTensors<float>;
template struct AttnTensors<double>;

ScoreMod ScoreMod::global_rpb(std::shared_ptr<const CurveMapping> mapping, std::size_t heads,
                              std::vector<double> table) {
  if (!mapping) throw ValidationError("global RPB needs a token ordering");
  if (heads == 0) throw ValidationError("global RPB needs at least one head");
  ScoreMod mod;
  mod.kind_ = Kind::GlobalRpb;
  mod.mapping_ = std::move(mapping);
  mod.heads_ = heads;
  const std::size_t expected = heads * mod.table_rows() * mod.table_cols();
  if (table.size() != expected) {
    throw ValidationError("RPB table has " + std::to_string(table.size()) + " entries, expected " +
                          std::to_string(expected));
  }
  for (double x : table) {
    if (!std::isfinite(x)) throw ValidationError("RPB table contains non-finite values");
  }
  mod.table_ = std::move(table);
  return mod;
}

std::size_t ScoreMod::table_rows() const noexcept {
  return mapping_ ? 2 * static_cast<std::size_t>(mapping_->shape().height) - 1 : 0;
}

std::size_t ScoreMod::table_cols() const noexcept {
  return mapping_ ? 2 * static_cast<std::size_t>(mapping_->shape().width) - 1 : 0;
}

std::size_t ScoreMod::table_index(std::size_t head, std::uint32_t q, std::uint32_t k) const {
  const Cell a = mapping_->cell(q);
  const Cell b = mapping_->cell(k);
  const std::size_t dr = static_cast<std::size_t>(a.row) + mapping_->shape().height - 1 - b.row;
  const std::size_t dc = static_cast<std::size_t>(a.col) + mapping_->shape().width - 1 - b.col;
  const std::size_t rows = table_rows(), cols = table_cols();
  if (head >= heads_ || dr >= rows || dc >= cols) {
    throw std::logic_error("relative position outside the RPB table");
  }
  return (head * rows + dr) * cols + dc;
}

double apply_score_mod(const ScoreMod& mod, std::size_t head, std::uint32_t q, std::uint32_t k, double raw) {
  return raw + mod.bias(head, q, k);
}

namespace {

template <typename Acc, typename T>
Acc dot(std::span<const T> a, std::span<const T> b) {
  Acc s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<Acc>(a[i]) * static_cast<Acc>(b[i]);
  return s;
}

template <typename T>
void check_inputs(const AttnTensors<T>& t, std::size_t n, const ScoreMod& mod) {
  t.validate();
  if (t.shape().tokens != n) {
    throw ValidationError("tensors hold " + std::to_string(t.shape().tokens) + " tokens, mask has " +
                          std::to_string(n));
  }
  if (mod.active()) {
    if (mod.heads() != t.shape().heads) throw ValidationError("RPB table head count does not match tensors");
    if (mod.mapping()->size() != n) throw ValidationError("RPB ordering does not match token count");
  }
}

template <typename T>
void check_grad(const AttnTensors<T>& t, const Tensor4<T>& grad_out) {
  if (!(grad_out.shape() == t.shape())) throw ValidationError("grad_out shape does not match forward output");
  if (!grad_out.all_finite()) throw ValidationError("grad_out contains non-finite values");
}

void check_grid(const BlockGrid& grid, const Pattern& pattern) {
  if (grid.tokens() != pattern.tokens()) {
    throw ValidationError("block grid covers " + std::to_string(grid.tokens()) + " tokens, pattern has " +
                          std::to_string(pattern.tokens()));
  }
  if (grid.source() && !(*grid.source() == pattern.spec())) {
    throw ValidationError("block grid was classified from '" + grid.source()->describe() +
                          "', not '" + pattern.spec().describe() + "'");
  }
}

// Keys allowed for one query row of a dense mask.
void mask_row(const MaskMatrix& mask, std::uint32_t q, std::vector<std::uint32_t>& keys) {
  keys.clear();
  for (std::uint32_t k = 0; k < mask.size(); ++k) {
    if (mask.get(q, k)) keys.push_back(k);
  }
  if (keys.empty()) throw DegenerateRowError("mask row " + std::to_string(q) + " allows no keys");
}

constexpr std::size_t kQueryChunk = 64;

}  // namespace

template <typename T>
Tensor4<T> dense_forward(const AttnTensors<T>& t, const MaskMatrix& mask, const ScoreMod& mod,
                         ExecOptions options) {
  const Shape4 s = t.shape();
  check_inputs(t, mask.size(), mod);
  Tensor4<T> out(s);
  const std::size_t chunks = (s.tokens + kQueryChunk - 1) / kQueryChunk;
  parallel_for(s.slices() * chunks, options.threads, [&](std::size_t task) {
    const std::size_t slice = task / chunks;
    const std::size_t b = slice / s.heads, h = slice % s.heads;
    const std::size_t q0 = (task % chunks) * kQueryChunk;
    const std::size_t q1 = std::min(s.tokens, q0 + kQueryChunk);
    std::vector<std::uint32_t> keys;
    std::vector<double> scores;
    std::vector<double> acc(s.dim);
    for (std::size_t qi = q0; qi < q1; ++qi) {
      const auto q = static_cast<std::uint32_t>(qi);
      mask_row(mask, q, keys);
      scores.resize(keys.size());
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < keys.size(); ++i) {
        const double raw = t.scale * dot<double, T>(t.q.row(b, h, q), t.k.row(b, h, keys[i]));
        scores[i] = apply_score_mod(mod, h, q, keys[i], raw);
        m = std::max(m, scores[i]);
      }
      double denom = 0;
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t i = 0; i < keys.size(); ++i) {
        const double w = std::exp(scores[i] - m);
        denom += w;
        const auto vr = t.v.row(b, h, keys[i]);
        for (std::size_t d = 0; d < s.dim; ++d) acc[d] += w * static_cast<double>(vr[d]);
      }
      auto o = out.row(b, h, q);
      for (std::size_t d = 0; d < s.dim; ++d) o[d] = static_cast<T>(acc[d] / denom);
    }
  });
  return out;
}

namespace {

// Streaming-softmax state of one query.
template <typename T>
struct RowState {
  T max;
  T denom;
  std::vector<T> acc;
};

// Runs the online softmax for query q of slice (b, h) over the row's kv list.
// Leaves the unnormalized accumulator in `state`.
template <typename T>
void stream_query(const AttnTensors<T>& t, const Pattern& pattern, const ScoreMod& mod, std::size_t b,
                  std::size_t h, std::uint32_t q, std::span<const KvEntry> kv, std::uint32_t block_k,
                  std::vector<T>& scores, RowState<T>& state, ExecStats& stats) {
  constexpr T kMasked = std::numeric_limits<T>::lowest();
  const std::size_t n = pattern.tokens();
  const std::size_t dim = t.shape().dim;
  state.max = kMasked;
  state.denom = 0;
  state.acc.assign(dim, T{0});
  const auto qr = t.q.row(b, h, q);
  for (const auto& e : kv) {
    const std::size_t k0 = static_cast<std::size_t>(e.block) * block_k;
    const std::size_t k1 = std::min(n, k0 + block_k);
    T tile_max = kMasked;
    for (std::size_t kk = k0; kk < k1; ++kk) {
      const auto k = static_cast<std::uint32_t>(kk);
      bool keep = true;
      if (e.partial) {
        keep = pattern.allowed_unchecked(q, k);
        ++stats.elementwise_masks_applied;
      }
      T sc = kMasked;
      if (keep) {
        const double raw = t.scale * dot<double, T>(qr, t.k.row(b, h, k));
        sc = static_cast<T>(apply_score_mod(mod, h, q, k, raw));
        ++stats.pairs_evaluated;
      }
      scores[kk - k0] = sc;
      tile_max = std::max(tile_max, sc);
    }
    const T new_max = std::max(state.max, tile_max);
    if (new_max == kMasked) continue;  // nothing allowed for this query yet
    const T correction = std::exp(state.max - new_max);
    state.denom *= correction;
    for (auto& a : state.acc) a *= correction;
    for (std::size_t kk = k0; kk < k1; ++kk) {
      const T p = std::exp(scores[kk - k0] - new_max);
      if (p == T{0}) continue;
      state.denom += p;
      const auto vr = t.v.row(b, h, kk);
      for (std::size_t d = 0; d < dim; ++d) state.acc[d] += p * vr[d];
    }
    state.max = new_max;
  }
  if (!(state.denom > T{0})) {
    throw DegenerateRowError("query " + std::to_string(q) + " has no allowed key in its kv list");
  }
}

}  // namespace

template <typename T>
SparseResult<T> sparse_forward(const AttnTensors<T>& t, const BlockGrid& grid, const Pattern& pattern,
                               const ScoreMod& mod, ExecOptions options) {
  check_grid(grid, pattern);
  check_inputs(t, pattern.tokens(), mod);
  const Shape4 s = t.shape();
  const std::size_t rows = grid.rows(), cols = grid.cols();
  const BlockSpec bs = grid.block_spec();

  SparseResult<T> result{Tensor4<T>(s), {}};
  std::vector<std::atomic<std::uint32_t>> visits(rows * cols);
  std::vector<ExecStats> task_stats(rows * s.slices());

  parallel_for(rows * s.slices(), options.threads, [&](std::size_t task) {
    const std::size_t row = task / s.slices();
    const std::size_t slice = task % s.slices();
    const std::size_t b = slice / s.heads, h = slice % s.heads;
    const auto kv = grid.kv_list(row);
    ExecStats& st = task_stats[task];
    for (const auto& e : kv) {
      visits[row * cols + e.block].fetch_add(1, std::memory_order_relaxed);
      ++st.block_visits;
    }
    std::vector<T> scores(bs.k);
    RowState<T> state;
    const std::size_t q0 = row * bs.q;
    const std::size_t q1 = std::min<std::size_t>(s.tokens, q0 + bs.q);
    for (std::size_t q = q0; q < q1; ++q) {
      stream_query(t, pattern, mod, b, h, static_cast<std::uint32_t>(q), kv, bs.k, scores, state, st);
      auto o = result.out.row(b, h, q);
      for (std::size_t d = 0; d < s.dim; ++d) o[d] = state.acc[d] / state.denom;
    }
  });

  ExecStats& total = result.stats;
  for (const auto& st : task_stats) {
    total.block_visits += st.block_visits;
    total.pairs_evaluated += st.pairs_evaluated;
    total.elementwise_masks_applied += st.elementwise_masks_applied;
  }
  for (std::size_t i = 0; i < visits.size(); ++i) {
    if (visits[i].load(std::memory_order_relaxed) == 0) continue;
    ++total.blocks_visited;
    if (grid.labels()[i] == BlockLabel::Empty) ++total.empty_blocks_visited;
  }
  return result;
}

template <typename T>
AttnGrads<T> dense_backward(const AttnTensors<T>& t, const MaskMatrix& mask, const ScoreMod& mod,
                            const Tensor4<T>& grad_out, ExecOptions options) {
  const Shape4 s = t.shape();
  check_inputs(t, mask.size(), mod);
  check_grad(t, grad_out);
  AttnGrads<T> g{Tensor4<T>(s), Tensor4<T>(s), Tensor4<T>(s), {}};
  std::vector<std::vector<double>> rpb_parts(mod.active() ? s.slices() : 0,
                                             std::vector<double>(mod.table_size(), 0.0));

  // One task per (batch, head) slice: dk and dv rows are shared by every query
  // of the slice, so slices are the unit that keeps writes disjoint.
  parallel_for(s.slices(), options.threads, [&](std::size_t slice) {
    const std::size_t b = slice / s.heads, h = slice % s.heads;
    std::vector<std::uint32_t> keys;
    std::vector<double> p;
    std::vector<double> o(s.dim);
    for (std::uint32_t q = 0; q < s.tokens; ++q) {
      mask_row(mask, q, keys);
      p.resize(keys.size());
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < keys.size(); ++i) {
        const double raw = t.scale * dot<double, T>(t.q.row(b, h, q), t.k.row(b, h, keys[i]));
        p[i] = apply_score_mod(mod, h, q, keys[i], raw);
        m = std::max(m, p[i]);
      }
      double denom = 0;
      for (auto& x : p) denom += (x = std::exp(x - m));
      std::fill(o.begin(), o.end(), 0.0);
      for (std::size_t i = 0; i < keys.size(); ++i) {
        p[i] /= denom;
        const auto vr = t.v.row(b, h, keys[i]);
        for (std::size_t d = 0; d < s.dim; ++d) o[d] += p[i] * static_cast<double>(vr[d]);
      }
      const auto go = grad_out.row(b, h, q);
      double delta = 0;
      for (std::size_t d = 0; d < s.dim; ++d) delta += static_cast<double>(go[d]) * o[d];

      auto dq = g.dq.row(b, h, q);
      for (std::size_t i = 0; i < keys.size(); ++i) {
        const std::uint32_t k = keys[i];
        auto dv = g.dv.row(b, h, k);
        for (std::size_t d = 0; d < s.dim; ++d) dv[d] += static_cast<T>(p[i] * go[d]);
        const double dp = dot<double, T>(go, t.v.row(b, h, k));
        const double ds = p[i] * (dp - delta);
        const auto kr = t.k.row(b, h, k);
        const auto qr = t.q.row(b, h, q);
        auto dk = g.dk.row(b, h, k);
        for (std::size_t d = 0; d < s.dim; ++d) {
          dq[d] += static_cast<T>(t.scale * ds * kr[d]);
          dk[d] += static_cast<T>(t.scale * ds * qr[d]);
        }
        if (mod.active()) rpb_parts[slice][mod.table_index(h, q, k)] += ds;
      }
    }
  });

  if (mod.active()) {
    g.d_rpb.assign(mod.table_size(), 0.0);
    for (const auto& part : rpb_parts) {
      for (std::size_t i = 0; i < part.size(); ++i) g.d_rpb[i] += part[i];
    }
  }
  return g;
}

template <typename T>
AttnGrads<T> sparse_backward(const AttnTensors<T>& t, const BlockGrid& grid, const Pattern& pattern,
                             const ScoreMod& mod, const Tensor4<T>& grad_out, ExecOptions options) {
  check_grid(grid, pattern);
  check_inputs(t, pattern.tokens(), mod);
  check_grad(t, grad_out);
  const Shape4 s = t.shape();
  const BlockSpec bs = grid.block_spec();
  const std::size_t n = s.tokens;
  AttnGrads<T> g{Tensor4<T>(s), Tensor4<T>(s), Tensor4<T>(s), {}};
  std::vector<std::vector<double>> rpb_parts(mod.active() ? s.slices() : 0,
                                             std::vector<double>(mod.table_size(), 0.0));

  parallel_for(s.slices(), options.threads, [&](std::size_t slice) {
    const std::size_t b = slice / s.heads, h = slice % s.heads;
    std::vector<T> scores(bs.k);
    RowState<T> state;
    ExecStats unused;
    for (std::size_t row = 0; row < grid.rows(); ++row) {
      const auto kv = grid.kv_list(row);
      const std::size_t q0 = row * bs.q;
      const std::size_t q1 = std::min<std::size_t>(n, q0 + bs.q);
      for (std::size_t qi = q0; qi < q1; ++qi) {
        const auto q = static_cast<std::uint32_t>(qi);
        // Recompute the forward statistics of this query.
        stream_query(t, pattern, mod, b, h, q, kv, bs.k, scores, state, unused);
        const T lse = state.max + std::log(state.denom);
        const auto go = grad_out.row(b, h, q);
        T delta = 0;
        for (std::size_t d = 0; d < s.dim; ++d) delta += go[d] * (state.acc[d] / state.denom);

        const auto qr = t.q.row(b, h, q);
        auto dq = g.dq.row(b, h, q);
        for (const auto& e : kv) {
          const std::size_t k0 = static_cast<std::size_t>(e.block) * bs.k;
          const std::size_t k1 = std::min(n, k0 + bs.k);
          for (std::size_t kk = k0; kk < k1; ++kk) {
            const auto k = static_cast<std::uint32_t>(kk);
            if (e.partial && !pattern.allowed_unchecked(q, k)) continue;
            const double raw = t.scale * dot<double, T>(qr, t.k.row(b, h, k));
            const T p = std::exp(static_cast<T>(apply_score_mod(mod, h, q, k, raw)) - lse);
            auto dv = g.dv.row(b, h, k);
            for (std::size_t d = 0; d < s.dim; ++d) dv[d] += p * go[d];
            const T dp = dot<T, T>(go, t.v.row(b, h, k));
            const T ds = p * (dp - delta);
            const auto kr = t.k.row(b, h, k);
            auto dk = g.dk.row(b, h, k);
            const T sds = static_cast<T>(t.scale) * ds;
            for (std::size_t d = 0; d < s.dim; ++d) {
              dq[d] += sds * kr[d];
              dk[d] += sds * qr[d];
            }
            if (mod.active()) rpb_parts[slice][mod.table_index(h, q, k)] += ds;
          }
        }
      }
    }
  });

  if (mod.active()) {
    g.d_rpb.assign(mod.table_size(), 0.0);
    for (const auto& part : rpb_parts) {
      for (std::size_t i = 0; i < part.size(); ++i) g.d_rpb[i] += part[i];
    }
  }
  return g;
}

#define HATK_INSTANTIATE_ATTENTION(T)                                                               \
  template Tensor4<T> dense_forward<T>(const AttnTensors<T>&, const MaskMatrix&, const ScoreMod&,  \
                                       ExecOptions);                                               \
  template SparseResult<T> sparse_forward<T>(const AttnTensors<T>&, const BlockGrid&, const Pattern&, \
                                             const ScoreMod&, ExecOptions);                        \
  template AttnGrads<T> dense_backward<T>(const AttnTensors<T>&, const MaskMatrix&, const ScoreMod&, \
                                          const Tensor4<T>&, ExecOptions);                         \
  template AttnGrads<T> sparse_backward<T>(const AttnTensors<T>&, const BlockGrid&, const Pattern&, \
                                           const ScoreMod&, const Tensor4<T>&, ExecOptions);
HATK_INSTANTIATE_ATTENTION(float)
HATK_INSTANTIATE_ATTENTION(double)
#undef HATK_INSTANTIATE_ATTENTION

}  // namespace hatk
