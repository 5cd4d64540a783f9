#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "cases.hpp"
#include "hatk/error.hpp"
#include "hatk/patterns.hpp"
#include "oracles.hpp"

using namespace hatk;

namespace {

std::vector<PatternSpec> sample_specs() {
  std::vector<PatternSpec> all;
  for (const auto& [shape, window, kernel] :
       std::vector<std::tuple<GridShape, Extent2D, Extent2D>>{{{4, 4}, {2, 2}, {3, 3}},
                                                              {{8, 8}, {4, 4}, {5, 5}},
                                                              {{6, 10}, {3, 5}, {3, 5}},
                                                              {{12, 12}, {4, 6}, {5, 3}},
                                                              {{16, 16}, {4, 4}, {7, 7}},
                                                              {{7, 9}, {7, 3}, {7, 9}},
                                                              {{1, 12}, {1, 4}, {1, 5}}}) {
    for (const auto& s : fixtures::every_kind(shape, window, kernel)) all.push_back(s);
  }
  // Non-default HSWA shifts and radii.
  all.push_back([] {
    auto s = PatternSpec::windowed(PatternKind::HSWA, {8, 8}, {2, 4});
    s.shift1d = 1;
    return s;
  }());
  all.push_back([] {
    auto s = PatternSpec::windowed(PatternKind::HSWA, {8, 8}, {2, 4});
    s.shift1d = 7;
    return s;
  }());
  all.push_back(PatternSpec::banded_radius(PatternKind::HSA, {5, 5}, 24));
  all.push_back(PatternSpec::banded_radius(PatternKind::HNA, {5, 5}, 20));
  all.push_back(PatternSpec::banded_radius(PatternKind::HNA, {3, 3}, 7));
  return all;
}

std::size_t count_allowed(const Pattern& p, std::uint32_t q) {
  std::size_t c = 0;
  for (std::uint32_t k = 0; k < p.tokens(); ++k) c += p.allowed(q, k);
  return c;
}

}  // namespace

TEST(PatternExamples, WsaFirstWindow) {
  const Pattern p(PatternSpec::windowed(PatternKind::WSA, {4, 4}, {2, 2}));
  EXPECT_TRUE(p.allowed(0, 1));
  EXPECT_FALSE(p.allowed(0, 2));
}

TEST(PatternExamples, HwaFirstWindow) {
  const Pattern p(PatternSpec::windowed(PatternKind::HWA, {4, 4}, {2, 2}));
  EXPECT_TRUE(p.allowed(0, 3));
  EXPECT_FALSE(p.allowed(0, 4));
}

TEST(PatternExamples, Na2dCornerAttendsClampedSquare) {
  const Pattern p(PatternSpec::kernelled(PatternKind::NA2D, {4, 4}, {3, 3}));
  EXPECT_EQ(count_allowed(p, 0), 9u);
  for (std::uint32_t r = 0; r < 3; ++r) {
    for (std::uint32_t c = 0; c < 3; ++c) EXPECT_TRUE(p.allowed(0, r * 4 + c));
  }
}

TEST(PatternExamples, SaCornerAttendsFour) {
  const Pattern p(PatternSpec::kernelled(PatternKind::SA, {4, 4}, {3, 3}));
  EXPECT_EQ(count_allowed(p, 0), 4u);
}

TEST(PatternExamples, WsaMaskCount) {
  const MaskMatrix m = materialize_mask(Pattern(PatternSpec::windowed(PatternKind::WSA, {4, 4}, {2, 2})));
  EXPECT_EQ(m.count(), 64u);
}

TEST(PatternExamples, HnaRowSumsOnSixteenTokens) {
  const MaskMatrix m = materialize_mask(Pattern(PatternSpec::banded_radius(PatternKind::HNA, {4, 4}, 1)));
  for (std::size_t q = 0; q < 16; ++q) EXPECT_EQ(m.row_count(q), 3u) << q;
}

TEST(PatternExamples, HsaRowSumsOnSixteenTokens) {
  const MaskMatrix m = materialize_mask(Pattern(PatternSpec::banded_radius(PatternKind::HSA, {4, 4}, 1)));
  for (std::size_t q = 0; q < 16; ++q) EXPECT_EQ(m.row_count(q), (q == 0 || q == 15) ? 2u : 3u) << q;
}

TEST(PatternDefaults, BandRadiusMatchesKernelArea) {
  EXPECT_EQ(PatternSpec::banded(PatternKind::HNA, {56, 56}, {7, 7}).radius1d, 24u);
  EXPECT_EQ(PatternSpec::banded(PatternKind::HSA, {96, 96}, {11, 11}).radius1d, 60u);
  EXPECT_EQ(PatternSpec::banded(PatternKind::HNA, {128, 128}, {17, 17}).radius1d, 144u);
}

TEST(PatternDefaults, HswaShiftIsHalfWindow) {
  EXPECT_EQ(PatternSpec::windowed(PatternKind::HSWA, {64, 64}, {8, 8}).shift1d, 32u);
  EXPECT_EQ(PatternSpec::windowed(PatternKind::HSWA, {6, 6}, {3, 3}).shift1d, 4u);
}

TEST(PatternValidation, RejectsBadParameters) {
  EXPECT_THROW(Pattern(PatternSpec::windowed(PatternKind::WSA, {10, 10}, {3, 3})), ValidationError);
  EXPECT_THROW(Pattern(PatternSpec::windowed(PatternKind::HWA, {8, 8}, {0, 2})), ValidationError);
  EXPECT_THROW(Pattern(PatternSpec::kernelled(PatternKind::SA, {8, 8}, {4, 3})), ValidationError);
  EXPECT_THROW(Pattern(PatternSpec::kernelled(PatternKind::NA2D, {4, 4}, {5, 3})), ValidationError);
  EXPECT_THROW(Pattern(PatternSpec::banded_radius(PatternKind::HSA, {4, 4}, 0)), ValidationError);
  EXPECT_THROW(Pattern(PatternSpec::banded_radius(PatternKind::HNA, {4, 4}, 16)), ValidationError);
  auto hswa = PatternSpec::windowed(PatternKind::HSWA, {4, 4}, {2, 2});
  hswa.shift1d = 4;
  EXPECT_THROW(Pattern{hswa}, ValidationError);
  hswa.shift1d = 0;
  EXPECT_THROW(Pattern{hswa}, ValidationError);
}

TEST(PatternValidation, RejectsOutOfRangeIndices) {
  const Pattern p(PatternSpec::windowed(PatternKind::HWA, {4, 4}, {2, 2}));
  EXPECT_THROW(p.allowed(16, 0), ValidationError);
  EXPECT_THROW(p.allowed(0, 16), ValidationError);
}

TEST(PatternKindNames, RoundTrip) {
  for (auto k : {PatternKind::WSA, PatternKind::SA, PatternKind::NA2D, PatternKind::HWA, PatternKind::HSWA,
                 PatternKind::HSA, PatternKind::HNA}) {
    EXPECT_EQ(parse_pattern_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_pattern_kind("HWA"), PatternKind::HWA);
  EXPECT_THROW(parse_pattern_kind("swin"), ValidationError);
  EXPECT_EQ(ordering_of(PatternKind::NA2D), Ordering::RowMajor);
  EXPECT_EQ(ordering_of(PatternKind::HSWA), Ordering::Hilbert);
}

TEST(PatternDescribe, Examples) {
  EXPECT_EQ(PatternSpec::windowed(PatternKind::HWA, {64, 64}, {8, 8}).describe(), "hwa 64x64 w8x8");
  EXPECT_EQ(PatternSpec::kernelled(PatternKind::SA, {56, 56}, {7, 7}).describe(), "sa 56x56 k7x7");
}

// The library predicate agrees with the independent definition everywhere.
TEST(PatternProperty, PredicateMatchesOracle) {
  for (const auto& spec : sample_specs()) {
    const Pattern p(spec);
    for (std::uint32_t q = 0; q < p.tokens(); ++q) {
      for (std::uint32_t k = 0; k < p.tokens(); ++k) {
        ASSERT_EQ(p.allowed(q, k), oracle::allowed(spec, q, k)) << spec.describe() << " q=" << q << " k=" << k;
      }
    }
  }
}

// The per-query key intervals enumerate exactly the allowed keys.
TEST(PatternProperty, IntervalsMatchPredicate) {
  std::vector<KeyInterval> iv;
  for (const auto& spec : sample_specs()) {
    const Pattern p(spec);
    for (std::uint32_t q = 0; q < p.tokens(); ++q) {
      p.allowed_keys(q, iv);
      std::vector<char> hit(p.tokens(), 0);
      std::uint32_t prev_end = 0;
      for (std::size_t i = 0; i < iv.size(); ++i) {
        ASSERT_LT(iv[i].begin, iv[i].end);
        if (i) ASSERT_GT(iv[i].begin, prev_end) << "intervals must be sorted and merged";
        prev_end = iv[i].end;
        for (auto k = iv[i].begin; k < iv[i].end; ++k) hit[k] = 1;
      }
      for (std::uint32_t k = 0; k < p.tokens(); ++k) ASSERT_EQ(bool(hit[k]), p.allowed(q, k)) << spec.describe();
    }
  }
}

TEST(PatternProperty, DiagonalAlwaysAllowed) {
  for (const auto& spec : sample_specs()) {
    const Pattern p(spec);
    for (std::uint32_t q = 0; q < p.tokens(); ++q) ASSERT_TRUE(p.allowed(q, q)) << spec.describe();
  }
}

TEST(PatternProperty, Symmetry) {
  for (const auto& spec : sample_specs()) {
    const MaskMatrix m = materialize_mask(Pattern(spec));
    switch (spec.kind) {
      case PatternKind::WSA:
      case PatternKind::HWA:
      case PatternKind::SA:
      case PatternKind::HSA:
      case PatternKind::HSWA:
        EXPECT_TRUE(m.symmetric()) << spec.describe();
        break;
      default:
        break;
    }
  }
  // Clamping breaks symmetry at the borders.
  EXPECT_FALSE(materialize_mask(Pattern(PatternSpec::kernelled(PatternKind::NA2D, {5, 5}, {3, 3}))).symmetric());
  EXPECT_FALSE(materialize_mask(Pattern(PatternSpec::banded_radius(PatternKind::HNA, {4, 4}, 2))).symmetric());
}

TEST(PatternProperty, Cardinality) {
  for (const auto& spec : sample_specs()) {
    const Pattern p(spec);
    const MaskMatrix m = materialize_mask(p);
    for (std::uint32_t q = 0; q < p.tokens(); ++q) {
      switch (spec.kind) {
        case PatternKind::NA2D:
          ASSERT_EQ(m.row_count(q), spec.kernel.area()) << spec.describe();
          break;
        case PatternKind::WSA:
        case PatternKind::HWA:
          ASSERT_EQ(m.row_count(q), spec.window.area()) << spec.describe();
          break;
        case PatternKind::HNA:
          ASSERT_EQ(m.row_count(q), std::min<std::size_t>(2 * spec.radius1d + 1, p.tokens())) << spec.describe();
          break;
        case PatternKind::HSWA: {
          // Rows in the wrapped window lose the pairs across the wrap point.
          const std::uint32_t w = spec.window.area();
          const bool wrapped = p.shifted_window(q) == (p.tokens() - spec.shift1d) / w;
          if (!wrapped) {
            ASSERT_EQ(m.row_count(q), w) << spec.describe();
          } else {
            ASSERT_EQ(m.row_count(q), q < spec.shift1d ? spec.shift1d : w - spec.shift1d) << spec.describe();
          }
          break;
        }
        default:
          ASSERT_GE(m.row_count(q), 1u);
      }
    }
  }
}

// HWA is the contiguous-chunk mask; conjugating WSA by the Hilbert permutation
// keeps every row sum.
TEST(PatternProperty, PermutationRelation) {
  for (const GridShape shape : {GridShape{8, 8}, GridShape{16, 16}, GridShape{12, 8}}) {
    const Extent2D window{4, 4};
    const Pattern hwa(PatternSpec::windowed(PatternKind::HWA, shape, window));
    const MaskMatrix hwa_mask = materialize_mask(hwa);
    const std::uint32_t w = window.area();
    for (std::uint32_t q = 0; q < hwa.tokens(); ++q) {
      for (std::uint32_t k = 0; k < hwa.tokens(); ++k) ASSERT_EQ(hwa_mask.get(q, k), q / w == k / w);
    }

    const MaskMatrix wsa = materialize_mask(Pattern(PatternSpec::windowed(PatternKind::WSA, shape, window)));
    const auto& curve = hwa.mapping();
    std::vector<std::uint32_t> perm(curve.size());
    for (std::uint32_t i = 0; i < perm.size(); ++i) perm[i] = curve.cell(i).row * shape.width + curve.cell(i).col;
    const MaskMatrix conj = permute_mask(wsa, perm);
    EXPECT_EQ(conj.count(), wsa.count());
    for (std::uint32_t i = 0; i < perm.size(); ++i) EXPECT_EQ(conj.row_count(i), wsa.row_count(perm[i]));
  }
  // On power-of-two squares the Hilbert windows are exactly the 2D windows.
  const GridShape sq{16, 16};
  const Pattern hwa(PatternSpec::windowed(PatternKind::HWA, sq, {4, 4}));
  const MaskMatrix wsa = materialize_mask(Pattern(PatternSpec::windowed(PatternKind::WSA, sq, {4, 4})));
  std::vector<std::uint32_t> perm(sq.tokens());
  for (std::uint32_t i = 0; i < perm.size(); ++i) perm[i] = hwa.mapping().cell(i).row * 16 + hwa.mapping().cell(i).col;
  EXPECT_EQ(permute_mask(wsa, perm), materialize_mask(hwa));
}

TEST(PatternProperty, HswaSegmentsSplitWrappedWindow) {
  const Pattern p(PatternSpec::windowed(PatternKind::HSWA, {4, 4}, {2, 2}));  // N=16, w=4, shift=2
  // Tokens 0,1 (head) and 14,15 (tail) share the wrapped window but not a segment.
  EXPECT_EQ(p.shifted_window(0), p.shifted_window(15));
  EXPECT_TRUE(p.allowed(0, 1));
  EXPECT_TRUE(p.allowed(14, 15));
  EXPECT_FALSE(p.allowed(0, 15));
  EXPECT_FALSE(p.allowed(15, 1));
  // Shifted windows start at the offset.
  EXPECT_TRUE(p.allowed(2, 5));
  EXPECT_FALSE(p.allowed(5, 6));
}

TEST(MaskMatrix, CapacityLimit) {
  const Pattern p(PatternSpec::banded_radius(PatternKind::HSA, {64, 64}, 3));
  EXPECT_THROW(materialize_mask(p, 1024), CapacityError);
  EXPECT_NO_THROW(materialize_mask(p, 4096));
}

TEST(MaskMatrix, BitOperationsAndCounts) {
  MaskMatrix m(70);
  m.set(0, 0);
  m.set(0, 69);
  m.set(69, 64);
  EXPECT_TRUE(m.get(0, 69));
  EXPECT_EQ(m.row_count(0), 2u);
  EXPECT_EQ(m.count(), 3u);
  EXPECT_EQ(m.count_in(0, 70, 64, 70), 2u);
  EXPECT_EQ(m.count_in(1, 70, 0, 64), 0u);
  EXPECT_FALSE(m.symmetric());
  m.set(0, 69, false);
  EXPECT_EQ(m.count(), 2u);
}

TEST(MaskMatrix, RandomPermutationPreservesCount) {
  std::mt19937_64 rng(7);
  const MaskMatrix m = materialize_mask(Pattern(PatternSpec::kernelled(PatternKind::NA2D, {9, 9}, {3, 5})));
  std::vector<std::uint32_t> perm(81);
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), rng);
  const MaskMatrix p = permute_mask(m, perm);
  EXPECT_EQ(p.count(), m.count());
  for (std::uint32_t i = 0; i < 81; ++i) {
    for (std::uint32_t j = 0; j < 81; ++j) ASSERT_EQ(p.get(i, j), m.get(perm[i], perm[j]));
  }
}
