#include <gtest/gtest.h>

#include <iterator>
#include <sstream>

#include "hatk/error.hpp"
#include "hatk/render.hpp"

using namespace hatk;

namespace {

struct Pgm {
  std::size_t width = 0, height = 0;
  std::string pixels;
};

Pgm parse_pgm(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  int maxval = 0;
  Pgm p;
  in >> magic >> p.width >> p.height >> maxval;
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(maxval, 255);
  in.get();
  p.pixels.assign(std::istreambuf_iterator<char>(in), {});
  EXPECT_EQ(p.pixels.size(), p.width * p.height);
  return p;
}

std::uint8_t px(const Pgm& p, std::size_t r, std::size_t c) {
  return static_cast<std::uint8_t>(p.pixels[r * p.width + c]);
}

}  // namespace

TEST(RenderGrid, HwaDiagonalTones) {
  const auto g = classify(Pattern(PatternSpec::windowed(PatternKind::HWA, {4, 4}, {2, 2})), {4, 4});
  const auto img = parse_pgm(render_grid(g, ImageFormat::Pgm, {1}));
  ASSERT_EQ(img.width, 4u);
  ASSERT_EQ(img.height, 4u);
  std::size_t full = 0, empty = 0;
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      const auto v = px(img, r, c);
      EXPECT_EQ(v, r == c ? kToneFull : kToneEmpty);
      full += v == kToneFull;
      empty += v == kToneEmpty;
    }
  }
  EXPECT_EQ(full, 4u);
  EXPECT_EQ(empty, 12u);
}

TEST(RenderGrid, PartialTilesAndScaling) {
  const auto g = classify(Pattern(PatternSpec::windowed(PatternKind::WSA, {4, 4}, {2, 2})), {4, 4});
  const auto img = parse_pgm(render_grid(g, ImageFormat::Pgm, {3}));
  ASSERT_EQ(img.width, 12u);
  for (std::size_t r = 0; r < 12; ++r) {
    for (std::size_t c = 0; c < 12; ++c) {
      const auto want = g.label(r / 3, c / 3) == BlockLabel::Partial ? kTonePartial : kToneEmpty;
      ASSERT_EQ(px(img, r, c), want);
    }
  }
  const auto svg = render_grid(g, ImageFormat::Svg, {3});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("#808080"), std::string::npos);
}

TEST(RenderMask, AllowedIsWhite) {
  const Pattern p(PatternSpec::banded_radius(PatternKind::HSA, {3, 3}, 1));
  const auto m = materialize_mask(p);
  const auto img = parse_pgm(render_mask(m, ImageFormat::Pgm, {1}));
  for (std::size_t q = 0; q < 9; ++q) {
    for (std::size_t k = 0; k < 9; ++k) EXPECT_EQ(px(img, q, k), m.get(q, k) ? 255 : 0);
  }
}

TEST(RenderCurve, SingleCell) {
  const auto m = hilbert_order({1, 1});
  const auto img = parse_pgm(render_curve(m, ImageFormat::Pgm, {1}));
  EXPECT_EQ(img.width, 1u);
  EXPECT_EQ(px(img, 0, 0), 0);
  const auto svg = render_curve(m, ImageFormat::Svg, {8});
  EXPECT_NE(svg.find("<circle cx=\"4.0\" cy=\"4.0\""), std::string::npos);
}

TEST(RenderCurve, GradientFollowsOrder) {
  const auto m = hilbert_order({4, 4});
  const auto img = parse_pgm(render_curve(m, ImageFormat::Pgm, {1}));
  int prev = -1;
  for (std::uint32_t i = 0; i < m.size(); ++i) {
    const int v = px(img, m.cell(i).row, m.cell(i).col);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_EQ(prev, 255);
}

TEST(Render, Deterministic) {
  const auto m = hilbert_order({12, 7});
  EXPECT_EQ(render_curve(m, ImageFormat::Svg), render_curve(m, ImageFormat::Svg));
  EXPECT_EQ(render_curve(m, ImageFormat::Pgm), render_curve(m, ImageFormat::Pgm));
}

TEST(Render, CapIsEnforced) {
  const auto m = hilbert_order({40, 40});
  EXPECT_THROW(render_curve(m, ImageFormat::Pgm, {1, 32}), CapacityError);
  EXPECT_NO_THROW(render_curve(m, ImageFormat::Pgm, {1, 40}));
  EXPECT_EQ(parse_image_format("svg"), ImageFormat::Svg);
  EXPECT_THROW(parse_image_format("png"), ValidationError);
}
