#pragma once

// Binary (P5) PGM export for canvases and filter strips.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "canvas.hpp"
#include "errors.hpp"

namespace motorfep {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

inline std::uint8_t to_gray(double v) {
  return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

inline GrayImage canvas_image(std::span<const double> pixels) {
  if (pixels.size() != kPixels) throw ShapeError("canvas image needs 4096 pixels");
  GrayImage img{kCanvasSide, kCanvasSide, {}};
  img.pixels.reserve(kPixels);
  for (double v : pixels) img.pixels.push_back(to_gray(v));
  return img;
}

inline GrayImage canvas_image(const Canvas& c) { return canvas_image(observe(c).view()); }

/// Filters laid side by side: (count * 64) wide, 64 tall.
template <typename FilterAt>
GrayImage filter_strip(std::size_t count, FilterAt&& filter_at) {
  GrayImage img{count * kCanvasSide, kCanvasSide, {}};
  img.pixels.assign(img.width * img.height, 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::span<const double> f = filter_at(i);
    if (f.size() != kPixels) throw ShapeError("filter strip needs 4096-pixel filters");
    for (std::size_t r = 0; r < kCanvasSide; ++r)
      for (std::size_t c = 0; c < kCanvasSide; ++c)
        img.pixels[r * img.width + i * kCanvasSide + c] = to_gray(f[r * kCanvasSide + c]);
  }
  return img;
}

inline void write_pgm(std::ostream& os, const GrayImage& img) {
  os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.pixels.size()));
}

inline void save_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_pgm(out, img);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace motorfep
