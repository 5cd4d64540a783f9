#include "hatk/render.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <sstream>

#include "hatk/error.hpp"

namespace hatk {

ImageFormat parse_image_format(const std::string& name) {
  if (name == "svg") return ImageFormat::Svg;
  if (name == "pgm") return ImageFormat::Pgm;
  throw ValidationError("unknown image format '" + name + "' (svg or pgm)");
}

namespace {

void check(std::size_t rows, std::size_t cols, const RenderOptions& o, const char* what) {
  if (o.cell_px == 0) throw ValidationError("cell size must be >= 1 pixel");
  if (rows > o.cap || cols > o.cap) {
    throw CapacityError(std::string(what) + " of " + std::to_string(rows) + "x" + std::to_string(cols) +
                        " exceeds the render cap of " + std::to_string(o.cap));
  }
  const std::size_t limit = std::size_t{1} << 31;
  if (rows * o.cell_px > limit / (cols * o.cell_px)) throw CapacityError(std::string(what) + " image is too large");
}

// Binary greyscale image; each logical cell becomes a cell_px square.
std::string pgm(std::size_t rows, std::size_t cols, std::size_t px,
                const std::function<std::uint8_t(std::size_t, std::size_t)>& tone) {
  const std::size_t w = cols * px, h = rows * px;
  std::string out = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + w * h);
  for (std::size_t r = 0; r < rows; ++r) {
    char* line = out.data() + header + r * px * w;
    for (std::size_t c = 0; c < cols; ++c) {
      const char v = static_cast<char>(tone(r, c));
      for (std::size_t x = 0; x < px; ++x) line[c * px + x] = v;
    }
    for (std::size_t y = 1; y < px; ++y) std::copy(line, line + w, line + y * w);
  }
  return out;
}

std::string svg_open(std::size_t w, std::size_t h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) + "\">\n";
}

std::string hex(std::uint8_t tone) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", tone, tone, tone);
  return buf;
}

// Horizontal runs of equal tone become one rect each.
std::string svg_cells(std::size_t rows, std::size_t cols, std::size_t px, std::uint8_t background,
                      const std::function<std::uint8_t(std::size_t, std::size_t)>& tone) {
  std::ostringstream out;
  out << svg_open(cols * px, rows * px);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"" << hex(background) << "\"/>\n";
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t c = 0;
    while (c < cols) {
      const std::uint8_t t = tone(r, c);
      std::size_t end = c + 1;
      while (end < cols && tone(r, end) == t) ++end;
      if (t != background) {
        out << "<rect x=\"" << c * px << "\" y=\"" << r * px << "\" width=\"" << (end - c) * px << "\" height=\"" << px
            << "\" fill=\"" << hex(t) << "\"/>\n";
      }
      c = end;
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::uint8_t tone_of(BlockLabel label) {
  switch (label) {
    case BlockLabel::Full: return kToneFull;
    case BlockLabel::Partial: return kTonePartial;
    case BlockLabel::Empty: return kToneEmpty;
  }
  return kToneEmpty;
}

}  // namespace

std::string render_curve(const CurveMapping& mapping, ImageFormat format, RenderOptions options) {
  const std::size_t rows = mapping.shape().height, cols = mapping.shape().width;
  check(rows, cols, options, "curve");
  const std::size_t px = options.cell_px;
  if (format == ImageFormat::Pgm) {
    const double last = mapping.size() > 1 ? static_cast<double>(mapping.size() - 1) : 1.0;
    return pgm(rows, cols, px, [&](std::size_t r, std::size_t c) {
      const double t = mapping.index(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c)) / last;
      return static_cast<std::uint8_t>(t * 255.0 + 0.5);
    });
  }
  std::ostringstream out;
  out << svg_open(cols * px, rows * px);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#000000\" stroke-width=\"" << std::max<std::size_t>(1, px / 4)
      << "\" points=\"";
  auto centre = [&](std::uint32_t v) { return static_cast<double>(v) * static_cast<double>(px) + px / 2.0; };
  char buf[96];
  for (std::size_t i = 0; i < mapping.size(); ++i) {
    const Cell& cell = mapping.cell(static_cast<std::uint32_t>(i));
    std::snprintf(buf, sizeof buf, "%s%.1f,%.1f", i ? " " : "", centre(cell.col), centre(cell.row));
    out << buf;
  }
  out << "\"/>\n";
  const Cell& start = mapping.cell(0);
  std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"%zu\" fill=\"#000000\"/>\n",
                centre(start.col), centre(start.row), std::max<std::size_t>(1, px / 4));
  out << buf;
  out << "</svg>\n";
  return out.str();
}

std::string render_mask(const MaskMatrix& mask, ImageFormat format, RenderOptions options) {
  const std::size_t n = mask.size();
  check(n, n, options, "mask");
  auto tone = [&](std::size_t q, std::size_t k) -> std::uint8_t { return mask.get(q, k) ? 255 : 0; };
  if (format == ImageFormat::Pgm) return pgm(n, n, options.cell_px, tone);
  return svg_cells(n, n, options.cell_px, 0, tone);
}

std::string render_grid(const BlockGrid& grid, ImageFormat format, RenderOptions options) {
  check(grid.rows(), grid.cols(), options, "block grid");
  auto tone = [&](std::size_t r, std::size_t c) { return tone_of(grid.label(r, c)); };
  if (format == ImageFormat::Pgm) return pgm(grid.rows(), grid.cols(), options.cell_px, tone);
  return svg_cells(grid.rows(), grid.cols(), options.cell_px, kToneEmpty, tone);
}

}  // namespace hatk
