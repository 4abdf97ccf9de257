#include <doctest.h>

#include "taskeval/core/digest.hpp"
#include "taskeval/core/png.hpp"

using namespace taskeval;

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("base64 known answers") {
  auto enc = [](std::string_view s) {
    return base64_encode(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  };
  CHECK(enc("") == "");
  CHECK(enc("f") == "Zg==");
  CHECK(enc("fo") == "Zm8=");
  CHECK(enc("foobar") == "Zm9vYmFy");
}

TEST_CASE("png encode and header size") {
  std::vector<std::uint8_t> rgb(5 * 3 * 3, 128);
  const PngImage img = encode_png_rgb(rgb, 5, 3);
  REQUIRE(img.bytes.size() > 8);
  CHECK(img.bytes[1] == 'P');
  CHECK(png_size(img).width == 5);
  CHECK(png_size(img).height == 3);
  CHECK(encode_png_rgb(rgb, 5, 3) == img);
  CHECK_THROWS(encode_png_rgb(rgb, 4, 3));
  CHECK_THROWS(png_size(PngImage{{1, 2, 3}}));
}
