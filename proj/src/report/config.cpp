#include "taskeval/report/config.hpp"

#include <algorithm>
#include <set>

#include <toml.hpp>

#include "taskeval/core/digest.hpp"
#include "taskeval/core/text_io.hpp"

namespace taskeval::report {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string_view> kKnownMetrics{kMetricQuality, kMetricDiversityText, kMetricDiversityDyn,
                                               kMetricGeneralize, kMetricConsistency};

void reject_unknown_keys(const toml::table& table, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (const auto& [key, node] : table) {
    if (std::find(allowed.begin(), allowed.end(), key.str()) == allowed.end()) {
      throw ConfigError(where + ": unknown key '" + std::string(key.str()) + "'");
    }
  }
}

template <typename T>
std::optional<T> get(const toml::table& table, std::string_view key, const std::string& where) {
  const toml::node* node = table.get(key);
  if (!node) return std::nullopt;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node->value<double>()) return *v;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (node->is_boolean()) return node->value<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (node->is_integer()) {
      const auto v = *node->value<std::int64_t>();
      if (v < 0) throw ConfigError(where + "." + std::string(key) + " must be non-negative");
      return static_cast<T>(v);
    }
  } else {
    if (node->is_string()) return std::string(*node->value<std::string_view>());
  }
  throw ConfigError(where + "." + std::string(key) + " has the wrong type");
}

std::vector<std::string> get_strings(const toml::table& table, std::string_view key, const std::string& where) {
  const toml::node* node = table.get(key);
  if (!node) return {};
  const toml::array* array = node->as_array();
  if (!array) throw ConfigError(where + "." + std::string(key) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& item : *array) {
    if (!item.is_string()) throw ConfigError(where + "." + std::string(key) + " must be an array of strings");
    out.emplace_back(*item.value<std::string_view>());
  }
  return out;
}

const toml::table* get_table(const toml::table& table, std::string_view key, const std::string& where) {
  const toml::node* node = table.get(key);
  if (!node) return nullptr;
  if (!node->is_table()) throw ConfigError(where + "." + std::string(key) + " must be a table");
  return node->as_table();
}

std::vector<const toml::table*> get_table_array(const toml::table& table, std::string_view key, const std::string& where) {
  const toml::node* node = table.get(key);
  if (!node) return {};
  const toml::array* array = node->as_array();
  if (!array) throw ConfigError(where + "." + std::string(key) + " must be an array of tables");
  std::vector<const toml::table*> out;
  for (const auto& item : *array) {
    if (!item.is_table()) throw ConfigError(where + "." + std::string(key) + " must be an array of tables");
    out.push_back(item.as_table());
  }
  return out;
}

json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json j = json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (const auto* a = node.as_array()) {
    json j = json::array();
    for (const auto& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (node.is_string()) return std::string(*node.value<std::string_view>());
  if (node.is_integer()) return *node.value<std::int64_t>();
  if (node.is_floating_point()) return *node.value<double>();
  if (node.is_boolean()) return *node.value<bool>();
  throw ConfigError("unsupported TOML value type (dates are not accepted)");
}

fs::path resolve(const fs::path& base, const std::string& text) {
  fs::path p(text);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

gateway::ModelEndpoint parse_endpoint(const toml::table& t, const std::string& where) {
  reject_unknown_keys(t, {"id", "kind", "base_url", "model", "auth_env", "timeout_ms", "max_retries", "temperature", "max_tokens"}, where);
  gateway::ModelEndpoint ep;
  ep.endpoint_id = get<std::string>(t, "id", where).value_or("");
  if (ep.endpoint_id.empty()) throw ConfigError(where + ": endpoint needs an id");
  try {
    ep.kind = gateway::parse_endpoint_kind(get<std::string>(t, "kind", where).value_or(""));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  ep.base_url = get<std::string>(t, "base_url", where).value_or("");
  ep.model = get<std::string>(t, "model", where).value_or("");
  ep.auth_env = get<std::string>(t, "auth_env", where).value_or("");
  ep.timeout = std::chrono::milliseconds(get<std::int64_t>(t, "timeout_ms", where).value_or(60'000));
  ep.max_retries = static_cast<int>(get<std::int64_t>(t, "max_retries", where).value_or(3));
  ep.temperature = get<double>(t, "temperature", where).value_or(0.7);
  ep.max_tokens = static_cast<int>(get<std::int64_t>(t, "max_tokens", where).value_or(1024));
  try {
    ep.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return ep;
}

}  // namespace

bool RunConfig::wants(std::string_view metric) const {
  return std::find(metrics.begin(), metrics.end(), metric) != metrics.end();
}

const gateway::ModelEndpoint& RunConfig::endpoint(std::string_view id) const {
  auto it = std::find_if(endpoints.begin(), endpoints.end(), [&](const auto& e) { return e.endpoint_id == id; });
  if (it == endpoints.end()) throw ConfigError("undefined endpoint '" + std::string(id) + "'");
  return *it;
}

void RunConfig::validate() const {
  if (datasets.empty()) throw ConfigError("no dataset configured");
  if (metrics.empty()) throw ConfigError("no metrics requested");
  for (const auto& m : metrics) {
    if (!kKnownMetrics.count(m)) throw ConfigError("unknown metric '" + m + "'");
  }
  if (iterations == 0) throw ConfigError("iterations must be at least 1");
  if (max_in_flight == 0 || max_in_flight > 1024) throw ConfigError("max_in_flight must be in [1, 1024]");
  if (output_dir.empty()) throw ConfigError("output_dir is required");
  if (backoff_initial.count() < 0 || backoff_factor < 1.0 || backoff_jitter < 0.0 || backoff_jitter >= 1.0) {
    throw ConfigError("retry settings out of range");
  }

  std::set<std::string> ids;
  for (const auto& ep : endpoints) {
    if (!ids.insert(ep.endpoint_id).second) throw ConfigError("endpoint '" + ep.endpoint_id + "' defined twice");
  }
  auto expect_kind = [&](const std::string& id, std::initializer_list<gateway::EndpointKind> kinds, const char* role) {
    const auto kind = endpoint(id).kind;
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
      throw ConfigError(std::string(role) + " '" + id + "' cannot be a " + std::string(gateway::to_string(kind)) + " endpoint");
    }
  };
  using gateway::EndpointKind;
  for (const auto& id : completion_judges) expect_kind(id, {EndpointKind::vision_chat}, "completion judge");
  for (const auto& id : direct_judges) expect_kind(id, {EndpointKind::vision_chat}, "direct alignment judge");
  for (const auto& p : caption_pipelines) {
    expect_kind(p.captioner, {EndpointKind::vision_chat}, "captioner");
    expect_kind(p.judge, {EndpointKind::chat, EndpointKind::vision_chat}, "caption pipeline judge");
  }
  for (const auto& id : embedders) expect_kind(id, {EndpointKind::embedding}, "embedder");

  const bool needs_quality = wants(kMetricQuality) || wants(kMetricConsistency);
  if (needs_quality && completion_judges.empty() && direct_judges.empty() && caption_pipelines.empty()) {
    throw ConfigError("quality requested but no judges configured");
  }
  if (wants(kMetricDiversityText) && embedders.empty()) throw ConfigError("diversity-text requested but no embedders configured");
  if (wants(kMetricConsistency)) {
    if (human.empty()) throw ConfigError("consistency requested but no human rating sources configured");
    for (const auto& h : human) {
      if (h.metric != "alignment" && h.metric != "completion") throw ConfigError("human source metric must be alignment or completion");
      if (!fs::is_regular_file(h.path)) throw ConfigError("human ratings file not found: " + h.path.string());
    }
  }
  if ((wants(kMetricDiversityDyn) || wants(kMetricGeneralize)) && secondary.sizes.empty()) {
    throw ConfigError("secondary.sizes must not be empty");
  }

  const fs::path out = fs::weakly_canonical(output_dir);
  for (const auto& d : datasets) {
    if (fs::weakly_canonical(d) == out) throw ConfigError("output_dir must differ from dataset root " + d.string());
  }
  if ((needs_quality || wants(kMetricDiversityText)) && cache_dir.empty()) throw ConfigError("cache_dir is required");
}

json RunConfig::semantic_json() const {
  json eps = json::array();
  for (const auto& ep : endpoints) {
    eps.push_back({{"endpoint_id", ep.endpoint_id},
                   {"kind", gateway::to_string(ep.kind)},
                   {"model", ep.model},
                   {"temperature", ep.temperature},
                   {"max_tokens", ep.max_tokens},
                   {"max_retries", ep.max_retries}});
  }
  json pipelines = json::array();
  for (const auto& p : caption_pipelines) pipelines.push_back({{"captioner", p.captioner}, {"judge", p.judge}});
  json humans = json::array();
  for (const auto& h : human) humans.push_back({{"metric", h.metric}, {"label", h.label}, {"pipeline_id", h.pipeline_id}});
  return json{{"metrics", metrics},
              {"iterations", iterations},
              {"groups", groups},
              {"seed", seed},
              {"endpoints", eps},
              {"quality",
               {{"completion_judges", completion_judges},
                {"direct_judges", direct_judges},
                {"caption_pipelines", pipelines},
                {"episode_index", episode_index},
                {"max_requeries", max_requeries},
                {"substitute_view_count", substitute_view_count}}},
              {"diversity_text", {{"embedders", embedders}, {"normalize", normalize_embeddings}}},
              {"consistency", {{"human", humans}}},
              {"secondary",
               {{"sizes", secondary.sizes},
                {"groups", secondary.groups},
                {"dyn_params", secondary.dyn_params},
                {"gen_params", secondary.gen_params}}}};
}

std::string RunConfig::digest() const { return sha256_hex(semantic_json().dump()); }

RunConfig parse_run_config(std::string_view toml_text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config parse error: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(msg.str());
  }
  const std::string top = "config";
  reject_unknown_keys(root, {"datasets", "output_dir", "cache_dir", "metrics", "iterations", "seed", "groups", "max_in_flight",
                             "retry", "endpoints", "quality", "diversity_text", "consistency", "secondary"},
                      top);

  RunConfig config;
  for (const auto& d : get_strings(root, "datasets", top)) config.datasets.push_back(resolve(base_dir, d));
  if (auto v = get<std::string>(root, "output_dir", top)) config.output_dir = resolve(base_dir, *v);
  if (auto v = get<std::string>(root, "cache_dir", top)) config.cache_dir = resolve(base_dir, *v);
  config.metrics = get_strings(root, "metrics", top);
  config.iterations = get<std::size_t>(root, "iterations", top).value_or(5);
  config.seed = get<std::uint64_t>(root, "seed", top).value_or(0);
  config.groups = get_strings(root, "groups", top);
  config.max_in_flight = get<std::size_t>(root, "max_in_flight", top).value_or(4);

  if (const auto* retry = get_table(root, "retry", top)) {
    reject_unknown_keys(*retry, {"initial_delay_ms", "factor", "jitter"}, "retry");
    config.backoff_initial = std::chrono::milliseconds(get<std::int64_t>(*retry, "initial_delay_ms", "retry").value_or(1000));
    config.backoff_factor = get<double>(*retry, "factor", "retry").value_or(2.0);
    config.backoff_jitter = get<double>(*retry, "jitter", "retry").value_or(0.2);
  }

  std::size_t index = 0;
  for (const auto* t : get_table_array(root, "endpoints", top)) {
    config.endpoints.push_back(parse_endpoint(*t, "endpoints[" + std::to_string(index++) + "]"));
  }

  if (const auto* q = get_table(root, "quality", top)) {
    reject_unknown_keys(*q, {"completion_judges", "direct_judges", "caption_pipelines", "episode_index", "max_requeries",
                             "substitute_view_count"},
                        "quality");
    config.completion_judges = get_strings(*q, "completion_judges", "quality");
    config.direct_judges = get_strings(*q, "direct_judges", "quality");
    for (const auto* p : get_table_array(*q, "caption_pipelines", "quality")) {
      reject_unknown_keys(*p, {"captioner", "judge"}, "quality.caption_pipelines");
      config.caption_pipelines.push_back({get<std::string>(*p, "captioner", "quality.caption_pipelines").value_or(""),
                                          get<std::string>(*p, "judge", "quality.caption_pipelines").value_or("")});
    }
    config.episode_index = get<std::size_t>(*q, "episode_index", "quality").value_or(0);
    config.max_requeries = get<std::size_t>(*q, "max_requeries", "quality").value_or(2);
    config.substitute_view_count = get<bool>(*q, "substitute_view_count", "quality").value_or(false);
  }

  if (const auto* d = get_table(root, "diversity_text", top)) {
    reject_unknown_keys(*d, {"embedders", "normalize"}, "diversity_text");
    config.embedders = get_strings(*d, "embedders", "diversity_text");
    config.normalize_embeddings = get<bool>(*d, "normalize", "diversity_text").value_or(true);
  }

  if (const auto* c = get_table(root, "consistency", top)) {
    reject_unknown_keys(*c, {"human"}, "consistency");
    for (const auto* h : get_table_array(*c, "human", "consistency")) {
      reject_unknown_keys(*h, {"metric", "path", "label", "pipeline_id"}, "consistency.human");
      HumanSource source;
      source.metric = get<std::string>(*h, "metric", "consistency.human").value_or("");
      source.path = resolve(base_dir, get<std::string>(*h, "path", "consistency.human").value_or(""));
      source.label = get<std::string>(*h, "label", "consistency.human").value_or(source.path.stem().string());
      source.pipeline_id = get<std::string>(*h, "pipeline_id", "consistency.human").value_or("");
      config.human.push_back(std::move(source));
    }
  }

  if (const auto* s = get_table(root, "secondary", top)) {
    reject_unknown_keys(*s, {"launcher", "sizes", "groups", "dyn_params", "gen_params"}, "secondary");
    if (auto v = get<std::string>(*s, "launcher", "secondary")) config.secondary.launcher = resolve(base_dir, *v);
    if (const toml::node* sizes = s->get("sizes")) {
      const toml::array* array = sizes->as_array();
      if (!array) throw ConfigError("secondary.sizes must be an array of positive integers");
      config.secondary.sizes.clear();
      for (const auto& item : *array) {
        if (!item.is_integer() || *item.value<std::int64_t>() <= 0) {
          throw ConfigError("secondary.sizes must be an array of positive integers");
        }
        config.secondary.sizes.push_back(static_cast<std::size_t>(*item.value<std::int64_t>()));
      }
    }
    config.secondary.groups = get_strings(*s, "groups", "secondary");
    if (const auto* p = get_table(*s, "dyn_params", "secondary")) config.secondary.dyn_params = toml_to_json(*p);
    if (const auto* p = get_table(*s, "gen_params", "secondary")) config.secondary.gen_params = toml_to_json(*p);
  }
  return config;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return parse_run_config(text, fs::absolute(path).parent_path());
}

}  // namespace taskeval::report
