#include "flowguard/annotate.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "flowguard/flow.hpp"
#include "flowguard/netpbm.hpp"

namespace flowguard {

namespace {

struct Glyph {
  char ch;
  std::array<std::uint8_t, 7> rows;  // 5 bits per row, MSB left
};

constexpr Glyph kFont[] = {
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
    {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
    {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
    {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}},
    {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
    {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
};

const Glyph* findGlyph(char ch) {
  for (const Glyph& g : kFont)
    if (g.ch == ch) return &g;
  return nullptr;
}

std::string formatNumber(const char* fmt, double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

Canvas Canvas::fromGray(const ImageF& img) {
  Canvas c{img.cols(), img.rows(), {}};
  c.rgb.resize(static_cast<std::size_t>(3 * img.size()));
  for (Index i = 0; i < img.size(); ++i) {
    const auto v = static_cast<std::uint8_t>(
        std::lround(std::clamp(static_cast<double>(img.data()[i]), 0.0, 1.0) * 255.0));
    c.rgb[3 * i] = c.rgb[3 * i + 1] = c.rgb[3 * i + 2] = v;
  }
  return c;
}

RgbImage Canvas::toRgbImage() const { return RgbImage{width, height, rgb}; }

void Canvas::setPixel(Index x, Index y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || x >= width || y < 0 || y >= height) return;
  const std::size_t i = static_cast<std::size_t>(3 * (y * width + x));
  rgb[i] = r;
  rgb[i + 1] = g;
  rgb[i + 2] = b;
}

void drawLine(Canvas& canvas, double x0, double y0, double x1, double y1, std::uint8_t r,
              std::uint8_t g, std::uint8_t b) {
  Index ax = static_cast<Index>(std::lround(x0));
  Index ay = static_cast<Index>(std::lround(y0));
  const Index bx = static_cast<Index>(std::lround(x1));
  const Index by = static_cast<Index>(std::lround(y1));
  const Index dx = std::abs(bx - ax), sx = ax < bx ? 1 : -1;
  const Index dy = -std::abs(by - ay), sy = ay < by ? 1 : -1;
  Index err = dx + dy;
  while (true) {
    canvas.setPixel(ax, ay, r, g, b);
    if (ax == bx && ay == by) break;
    const Index e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      ax += sx;
    }
    if (e2 <= dx) {
      err += dx;
      ay += sy;
    }
  }
}

void drawCircle(Canvas& canvas, double cx, double cy, int radius, std::uint8_t r, std::uint8_t g,
                std::uint8_t b) {
  const Index icx = static_cast<Index>(std::lround(cx));
  const Index icy = static_cast<Index>(std::lround(cy));
  Index x = radius, y = 0, err = 1 - radius;
  while (x >= y) {
    canvas.setPixel(icx + x, icy + y, r, g, b);
    canvas.setPixel(icx + y, icy + x, r, g, b);
    canvas.setPixel(icx - y, icy + x, r, g, b);
    canvas.setPixel(icx - x, icy + y, r, g, b);
    canvas.setPixel(icx - x, icy - y, r, g, b);
    canvas.setPixel(icx - y, icy - x, r, g, b);
    canvas.setPixel(icx + y, icy - x, r, g, b);
    canvas.setPixel(icx + x, icy - y, r, g, b);
    ++y;
    if (err < 0) {
      err += 2 * y + 1;
    } else {
      --x;
      err += 2 * (y - x) + 1;
    }
  }
}

void drawText(Canvas& canvas, Index x, Index y, const std::string& text, std::uint8_t r,
              std::uint8_t g, std::uint8_t b) {
  Index cx = x;
  for (char ch : text) {
    if (const Glyph* glyph = findGlyph(std::toupper(static_cast<unsigned char>(ch)))) {
      for (int row = 0; row < 7; ++row)
        for (int col = 0; col < 5; ++col)
          if (glyph->rows[row] & (0x10 >> col)) canvas.setPixel(cx + col, y + row, r, g, b);
    }
    cx += 6;
  }
}

void drawOverlay(Canvas& canvas, const FrameRecord& rec) {
  // 16x16 grid under everything else.
  for (int k = 1; k < TtcGrid::kCells; ++k) {
    const double gx = k * canvas.width / static_cast<double>(TtcGrid::kCells);
    const double gy = k * canvas.height / static_cast<double>(TtcGrid::kCells);
    drawLine(canvas, gx, 0, gx, canvas.height - 1, 90, 90, 90);
    drawLine(canvas, 0, gy, canvas.width - 1, gy, 90, 90, 90);
  }

  for (const FlowVector& f : rec.flows) {
    const Eigen::Vector2d q = f.p + f.v;
    drawLine(canvas, f.p.x(), f.p.y(), q.x(), q.y(), 0, 200, 0);
    const Eigen::Vector2d tip = arrowEndpoint(f.p.x(), f.p.y(), q.x(), q.y(), 4.0);
    drawLine(canvas, q.x(), q.y(), tip.x(), tip.y(), 0, 200, 0);
  }

  if (rec.foe) {
    drawCircle(canvas, rec.foe->x(), rec.foe->y(), 4, 230, 40, 40);
    drawLine(canvas, rec.foe->x() - 1, rec.foe->y(), rec.foe->x() + 1, rec.foe->y(), 230, 40, 40);
  }

  drawText(canvas, 2, 2, "L=" + formatNumber("%.1f", rec.sumLeft), 255, 255, 255);
  drawText(canvas, 2, 11, "R=" + formatNumber("%.1f", rec.sumRight), 255, 255, 255);
  drawText(canvas, 2, 20, "D=" + formatNumber("%.3f", rec.delta), 255, 255, 255);
  drawText(canvas, 2, 29, std::string(decisionName(rec.decision)), 255, 255, 0);
}

std::filesystem::path writeOverlay(const ImageF& frame, const FrameRecord& rec,
                                   const std::filesystem::path& outDir) {
  Canvas canvas = Canvas::fromGray(frame);
  drawOverlay(canvas, rec);
  char name[32];
  std::snprintf(name, sizeof(name), "overlay_%05ld.ppm", rec.frame);
  const std::filesystem::path path = outDir / name;
  savePpm(canvas.toRgbImage(), path);
  return path;
}

}  // namespace flowguard
