#include "flowguard/netpbm.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "flowguard/imageops.hpp"

namespace flowguard {

namespace {

std::vector<unsigned char> readAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

struct HeaderCursor {
  const std::vector<unsigned char>& bytes;
  std::size_t pos = 0;

  void skipSpace() {
    while (pos < bytes.size()) {
      if (std::isspace(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {  // comment runs to end of line
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  long nextInt(const char* what) {
    skipSpace();
    const std::size_t start = pos;
    long value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000'000L) throw ParseError(std::string("oversized ") + what, start);
      ++pos;
    }
    if (pos == start) throw ParseError(std::string("expected ") + what, pos);
    return value;
  }
};

struct PnmHeader {
  char magic;  // '5' or '6'
  Index width;
  Index height;
  std::size_t payloadStart;
};

PnmHeader parseHeader(const std::vector<unsigned char>& bytes, const std::string& name) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw ParseError(name + ": not a P5/P6 netpbm file", 0);
  HeaderCursor cur{bytes, 2};
  const long w = cur.nextInt("width");
  const long h = cur.nextInt("height");
  if (w < 1 || h < 1) throw ParseError(name + ": dimensions must be positive", 2);
  const std::size_t maxvalPos = (cur.skipSpace(), cur.pos);
  const long maxval = cur.nextInt("maxval");
  if (maxval != 255) throw ParseError(name + ": only maxval 255 is supported", maxvalPos);
  if (cur.pos >= bytes.size() || !std::isspace(bytes[cur.pos]))
    throw ParseError(name + ": expected single whitespace after maxval", cur.pos);
  ++cur.pos;  // exactly one whitespace byte separates header and payload
  return {static_cast<char>(bytes[1]), static_cast<Index>(w), static_cast<Index>(h), cur.pos};
}

void checkPayload(const std::vector<unsigned char>& bytes, const PnmHeader& hdr,
                  std::size_t needed, const std::string& name) {
  if (bytes.size() - hdr.payloadStart < needed)
    throw ParseError(name + ": payload truncated, need " + std::to_string(needed) + " bytes",
                     bytes.size());
}

unsigned char quantize(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

ImageF loadPgm(const std::filesystem::path& path) {
  const auto bytes = readAll(path);
  const PnmHeader hdr = parseHeader(bytes, path.filename().string());
  if (hdr.magic != '5')
    throw ParseError(path.filename().string() + ": expected P5 grayscale", 1);
  const std::size_t n = static_cast<std::size_t>(hdr.width) * hdr.height;
  checkPayload(bytes, hdr, n, path.filename().string());
  ImageF img(hdr.height, hdr.width);
  const unsigned char* src = bytes.data() + hdr.payloadStart;
  for (std::size_t i = 0; i < n; ++i) img.data()[i] = src[i] / 255.0f;
  return img;
}

void savePgm(const ImageF& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  std::vector<unsigned char> buf(static_cast<std::size_t>(img.size()));
  for (Index i = 0; i < img.size(); ++i) buf[i] = quantize(img.data()[i]);
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
  if (!out) throw IoError("short write to " + path.string());
}

RgbImage loadPpm(const std::filesystem::path& path) {
  const auto bytes = readAll(path);
  const PnmHeader hdr = parseHeader(bytes, path.filename().string());
  if (hdr.magic != '6')
    throw ParseError(path.filename().string() + ": expected P6 color", 1);
  const std::size_t n = static_cast<std::size_t>(3 * hdr.width) * hdr.height;
  checkPayload(bytes, hdr, n, path.filename().string());
  RgbImage img{hdr.width, hdr.height, {}};
  img.data.assign(bytes.begin() + hdr.payloadStart, bytes.begin() + hdr.payloadStart + n);
  return img;
}

void savePpm(const RgbImage& img, const std::filesystem::path& path) {
  if (!img.sizeConsistent()) throw InvalidInput("savePpm: inconsistent raster size");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), img.data.size());
  if (!out) throw IoError("short write to " + path.string());
}

ImageF loadImage(const std::filesystem::path& path) {
  const auto bytes = readAll(path);
  const PnmHeader hdr = parseHeader(bytes, path.filename().string());
  if (hdr.magic == '5') return loadPgm(path);
  return rgbToGrayscale(loadPpm(path));
}

}  // namespace flowguard
