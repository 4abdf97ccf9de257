#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "taskeval/core/types.hpp"

namespace taskeval {

struct ImageSize {
  std::size_t width = 0;
  std::size_t height = 0;
};

/// Encodes 8-bit RGB pixels (row-major, 3 bytes per pixel).
PngImage encode_png_rgb(std::span<const std::uint8_t> rgb, std::size_t width, std::size_t height);

/// Reads width/height from the IHDR chunk. Throws std::invalid_argument for non-PNG data.
ImageSize png_size(const PngImage& image);

}  // namespace taskeval
