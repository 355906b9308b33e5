#pragma once

#include <cstdint>
#include <vector>

namespace gspose {

/// Row-major interleaved image of doubles in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, fill) {}

  double& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
};

/// Binary mask, row-major, values strictly 0 or 1.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> grid;

  BinaryMask() = default;
  BinaryMask(int h, int w) : height(h), width(w), grid(static_cast<std::size_t>(h) * w, 0) {}

  std::uint8_t& at(int y, int x) { return grid[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return grid[static_cast<std::size_t>(y) * width + x]; }
};

}  // namespace gspose
