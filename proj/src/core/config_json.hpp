#pragma once

// Internal: JSON-object level readers shared by config.cpp and harness.cpp.

#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "plantres/config.hpp"

namespace plantres::detail {

nlohmann::json parse_json(std::string_view text, const std::string& what);

// Throws Error(kConfig) when `obj` is not an object or carries a key
// outside `allowed`.
void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                const std::string& what);

SynthFieldParams synth_params_from(const nlohmann::json& j);
DegradeParams degrade_params_from(const nlohmann::json& j);
DetectorConfig detector_config_from(const nlohmann::json& j);
EvalConfig eval_config_from(const nlohmann::json& j);

}  // namespace plantres::detail
