#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "iris/features.hpp"
#include "iris/matching.hpp"

namespace iris {

struct AppConfig {
    PipelineConfig pipeline;
    MatchConfig matching;

    void validate() const;
    friend bool operator==(const AppConfig&, const AppConfig&) = default;
};

// key=value lines, keys prefixed by module ("matching.max_shift=4").
// Blank lines and lines starting with '#' are ignored.
std::string serialize_config(const AppConfig& cfg);
AppConfig parse_config(std::string_view text, AppConfig base = {});
AppConfig load_config(const std::filesystem::path& path, AppConfig base = {});

void set_config_value(AppConfig& cfg, std::string_view key, std::string_view value);
const std::vector<std::string>& config_keys();

// Named parameter variants for the enhancement ablation study.
const std::vector<std::string>& ablation_names();
void apply_ablation(AppConfig& cfg, std::string_view name);

}  // namespace iris
