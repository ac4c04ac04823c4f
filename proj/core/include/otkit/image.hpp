#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace otkit {

/// Interleaved 8-bit RGB raster, row-major from the top-left pixel.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height

  std::size_t size() const noexcept { return width * height; }
  std::uint8_t channel(std::size_t pixel, std::size_t c) const { return pixels[3 * pixel + c]; }
};

}  // namespace otkit
