#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "hatk/block_analysis.hpp"
#include "hatk/grid_curve.hpp"
#include "hatk/patterns.hpp"

namespace hatk {

enum class ImageFormat : std::uint8_t { Svg, Pgm };

ImageFormat parse_image_format(const std::string& name);

// Grey levels used for block tiles in both formats.
inline constexpr std::uint8_t kToneFull = 0;
inline constexpr std::uint8_t kTonePartial = 128;
inline constexpr std::uint8_t kToneEmpty = 255;

struct RenderOptions {
  std::size_t cell_px = 8;               // pixels per grid cell / tile / mask entry
  std::size_t cap = kDefaultDenseCap;    // largest side, in cells, that may be rendered
};

// Curve: SVG draws the visiting path through cell centres; PGM shades each
// cell by its position along the curve (black first, white last).
std::string render_curve(const CurveMapping& mapping, ImageFormat format, RenderOptions options = {});

// Mask: allowed pairs are white, masked pairs black.
std::string render_mask(const MaskMatrix& mask, ImageFormat format, RenderOptions options = {});

// Block grid: full, partial and empty tiles use the three tones above.
std::string render_grid(const BlockGrid& grid, ImageFormat format, RenderOptions options = {});

}  // namespace hatk
