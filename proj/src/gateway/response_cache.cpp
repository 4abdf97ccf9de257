#include "taskeval/gateway/response_cache.hpp"

#include "taskeval/core/text_io.hpp"
#include "taskeval/gateway/endpoint.hpp"

namespace taskeval::gateway {

namespace fs = std::filesystem;

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw GatewayError(GatewayErrc::cache_error, "cannot create cache directory " + dir_.string() + ": " + ec.message());
}

fs::path ResponseCache::stem(const std::string& key) const { return dir_ / key.substr(0, 2) / key; }

std::optional<CacheEntry> ResponseCache::get(const std::string& key) const {
  const fs::path base = stem(key);
  fs::path meta_path = base;
  meta_path += ".json";
  fs::path body_path = base;
  body_path += ".body";
  if (!fs::is_regular_file(meta_path)) return std::nullopt;
  try {
    CacheEntry entry;
    entry.meta = nlohmann::json::parse(read_text_file(meta_path));
    entry.body = read_text_file(body_path);
    return entry;
  } catch (const std::exception& e) {
    throw GatewayError(GatewayErrc::cache_error, "unreadable cache entry " + key + ": " + e.what());
  }
}

void ResponseCache::put(const std::string& key, const CacheEntry& entry) const {
  const fs::path base = stem(key);
  fs::path meta_path = base;
  meta_path += ".json";
  fs::path body_path = base;
  body_path += ".body";
  try {
    fs::create_directories(base.parent_path());
    write_file_atomically(body_path, entry.body);
    write_file_atomically(meta_path, entry.meta.dump(2) + "\n");
  } catch (const std::exception& e) {
    throw GatewayError(GatewayErrc::cache_error, "cannot write cache entry " + key + ": " + e.what());
  }
}

}  // namespace taskeval::gateway
