#pragma once

#include <string>

#include "luxland/scenario.hpp"

namespace luxland {

// Extra knobs that live in the config file but outside ScenarioConfig.
struct RunSettings {
    ScenarioConfig scenario;
    double sweep_success_floor = 0.9;  // cmd_sweep exit criterion
    double range_height = 1.0;         // [m] for cmd_range
    double range_limit = 30.0;         // [m]
};

// Parses a JSON scenario description. Unknown keys are rejected with their
// full path; all other validation errors name the offending field.
RunSettings load_config(const std::string& path);
RunSettings parse_config(const std::string& text, const std::string& origin = "config");

}  // namespace luxland
