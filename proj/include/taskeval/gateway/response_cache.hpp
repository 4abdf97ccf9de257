#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace taskeval::gateway {

struct CacheEntry {
  std::string body;  // raw response bytes as received
  nlohmann::json meta;
};

/// Content-addressed store: <dir>/<key[0:2]>/<key>.body plus <key>.json metadata.
/// The metadata file is renamed into place last and marks the entry as complete,
/// so readers never observe a half-written entry.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  [[nodiscard]] std::optional<CacheEntry> get(const std::string& key) const;
  void put(const std::string& key, const CacheEntry& entry) const;

  [[nodiscard]] const std::filesystem::path& dir() const { return dir_; }

 private:
  [[nodiscard]] std::filesystem::path stem(const std::string& key) const;

  std::filesystem::path dir_;
};

}  // namespace taskeval::gateway
