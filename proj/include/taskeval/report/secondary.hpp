#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace taskeval::report {

inline constexpr std::string_view kSubcommandDyn = "diversity-dyn";
inline constexpr std::string_view kSubcommandGeneralize = "generalize";

enum class SecondaryStatus { ok, unavailable, failed, schema_error };
std::string_view to_string(SecondaryStatus status);

struct SecondaryResult {
  SecondaryStatus status = SecondaryStatus::unavailable;
  int exit_code = -1;
  nlohmann::json result;  // validated payload when status is ok
  std::string detail;
};

/// Runs `<launcher> <subcommand> --params <work_dir>/params.json --result <work_dir>/result.json`
/// and validates the result file. Output of the child goes to `<work_dir>/secondary.log`.
/// A missing or non-executable launcher yields status `unavailable` without spawning.
SecondaryResult invoke_secondary(const std::filesystem::path& launcher, std::string_view subcommand,
                                 const nlohmann::json& params, const std::filesystem::path& work_dir);

/// Problems found in a diversity-dyn result; empty when valid. Requires `group`, `seed`,
/// `relative_drop` and a non-negative `err<size>` for every requested size.
std::vector<std::string> validate_dyn_result(const nlohmann::json& result, std::span<const std::size_t> sizes);

/// Problems found in a generalize result; empty when valid.
std::vector<std::string> validate_generalize_result(const nlohmann::json& result);

}  // namespace taskeval::report
