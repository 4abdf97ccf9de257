#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace taskeval {

std::string sha256_hex(std::string_view data);
std::string sha256_hex(std::span<const std::uint8_t> data);

std::string base64_encode(std::span<const std::uint8_t> data);

}  // namespace taskeval
