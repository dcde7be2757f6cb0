#pragma once

#include <filesystem>
#include <string>

#include "flowguard/image.hpp"
#include "flowguard/pipeline.hpp"

namespace flowguard {

// 8-bit RGB drawing surface for overlays.
struct Canvas {
  Index width = 0;
  Index height = 0;
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row major

  static Canvas fromGray(const ImageF& img);
  RgbImage toRgbImage() const;

  void setPixel(Index x, Index y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

void drawLine(Canvas& canvas, double x0, double y0, double x1, double y1, std::uint8_t r,
              std::uint8_t g, std::uint8_t b);
void drawCircle(Canvas& canvas, double cx, double cy, int radius, std::uint8_t r, std::uint8_t g,
                std::uint8_t b);
// 5x7 bitmap font; digits, uppercase letters and . - = _ : + are covered.
void drawText(Canvas& canvas, Index x, Index y, const std::string& text, std::uint8_t r,
              std::uint8_t g, std::uint8_t b);

// Grid lines, green flow arrows, red FOE circle and the balance readout,
// drawn from record data alone so a stored record reproduces the overlay
// byte for byte.
void drawOverlay(Canvas& canvas, const FrameRecord& rec);

// Renders the overlay for rec on the given frame and writes
// overlay_<frame>.ppm into outDir. Returns the written path.
std::filesystem::path writeOverlay(const ImageF& frame, const FrameRecord& rec,
                                   const std::filesystem::path& outDir);

}  // namespace flowguard
