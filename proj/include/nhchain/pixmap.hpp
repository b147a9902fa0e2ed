#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nhchain/io.hpp"

namespace nhchain {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// Fixed five-anchor sequential colormap (dark violet to yellow), linearly
// interpolated in RGB. Values are clipped to [lo, hi]; non-finite values
// get the dedicated invalid-cell gray.
inline constexpr std::array<Rgb, 5> kColormapAnchors = {{{68, 1, 84},
                                                         {59, 82, 139},
                                                         {33, 145, 140},
                                                         {94, 201, 98},
                                                         {253, 231, 37}}};
inline constexpr Rgb kInvalidColor = {128, 128, 128};

inline Rgb colormap(double value, double lo, double hi) {
  if (!std::isfinite(value)) return kInvalidColor;
  double t = hi > lo ? (value - lo) / (hi - lo) : 0.5;
  t = std::clamp(t, 0.0, 1.0);
  const double scaled = t * (kColormapAnchors.size() - 1);
  const int i =
      std::min<int>(int(scaled), int(kColormapAnchors.size()) - 2);
  const double frac = scaled - i;
  const Rgb& a = kColormapAnchors[i];
  const Rgb& b = kColormapAnchors[i + 1];
  auto mix = [&](std::uint8_t x, std::uint8_t y) {
    return std::uint8_t(std::lround(x + (double(y) - x) * frac));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

class Image {
 public:
  Image(int width, int height, Rgb fill = {0, 0, 0})
      : width_(width), height_(height), pixels_(std::size_t(width) * height, fill) {
    if (width < 1 || height < 1)
      throw std::invalid_argument("image: dimensions must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return;  // clipped
    pixels_[std::size_t(y) * width_ + x] = c;
  }
  Rgb get(int x, int y) const {
    if (x < 0 || y < 0 || x >= width_ || y >= height_)
      throw std::out_of_range("image: pixel out of range");
    return pixels_[std::size_t(y) * width_ + x];
  }

  void fill_rect(int x0, int y0, int w, int h, Rgb c) {
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) set(x, y, c);
  }

  // Bresenham segment with an on/off dash pattern measured in pixels along
  // the traversal; pattern {0} draws solid.
  void draw_line(int x0, int y0, int x1, int y1, Rgb c,
                 const std::vector<int>& dash_pattern = {}) {
    int total = 0;
    for (int d : dash_pattern) total += d;
    int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    int step = 0;
    while (true) {
      bool on = true;
      if (total > 0) {
        int phase = step % total;
        int acc = 0;
        for (std::size_t i = 0; i < dash_pattern.size(); ++i) {
          acc += dash_pattern[i];
          if (phase < acc) {
            on = (i % 2 == 0);  // even segments are ink
            break;
          }
        }
      }
      if (on) set(x0, y0, c);
      if (x0 == x1 && y0 == y1) break;
      int e2 = 2 * err;
      if (e2 >= dy) { err += dy; x0 += sx; }
      if (e2 <= dx) { err += dx; y0 += sy; }
      ++step;
    }
  }

  void write_p6(const std::string& path) const {
    std::ofstream out = open_output(path);
    out << "P6\n" << width_ << ' ' << height_ << "\n255\n";
    for (const Rgb& p : pixels_) {
      out.put(char(p.r));
      out.put(char(p.g));
      out.put(char(p.b));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
  }

 private:
  int width_, height_;
  std::vector<Rgb> pixels_;
};

// Overlay styles for the two analytic boundary families.
inline const std::vector<int>& dash_pattern_dashed() {
  static const std::vector<int> p = {6, 4};
  return p;
}
inline const std::vector<int>& dash_pattern_dash_dot() {
  static const std::vector<int> p = {6, 3, 1, 3};
  return p;
}
inline constexpr Rgb kRealGapColor = {0, 255, 255};  // cyan, dashed
inline constexpr Rgb kImagZeroColor = {0, 0, 0};     // black, dash-dot

}  // namespace nhchain
