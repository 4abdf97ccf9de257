#include "taskeval/core/png.hpp"

#include <png.h>

#include <array>
#include <stdexcept>

namespace taskeval {

namespace {

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_nothing(png_structp) {}

}  // namespace

PngImage encode_png_rgb(std::span<const std::uint8_t> rgb, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0 || rgb.size() != width * height * 3) {
    throw std::invalid_argument("encode_png_rgb: pixel buffer does not match " + std::to_string(width) + "x" +
                                std::to_string(height) + " RGB");
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("libpng: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("libpng: cannot create info struct");
  }

  PngImage image;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng: encoding failed");
  }
  png_set_write_fn(png, &image.bytes, append_bytes, flush_nothing);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (std::size_t y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(rgb.data() + y * width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return image;
}

ImageSize png_size(const PngImage& image) {
  static constexpr std::array<std::uint8_t, 8> kSignature{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  const auto& b = image.bytes;
  if (b.size() < 24 || !std::equal(kSignature.begin(), kSignature.end(), b.begin()) ||
      !std::equal(b.begin() + 12, b.begin() + 16, "IHDR")) {
    throw std::invalid_argument("not a PNG image");
  }
  auto be32 = [&](std::size_t at) {
    return (std::size_t{b[at]} << 24) | (std::size_t{b[at + 1]} << 16) | (std::size_t{b[at + 2]} << 8) |
           std::size_t{b[at + 3]};
  };
  return {be32(16), be32(20)};
}

}  // namespace taskeval
