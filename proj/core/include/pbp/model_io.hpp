#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "pbp/model.hpp"

namespace pbp {

/// JSON document with fields state_vars, vision_state_indices, actions,
/// transition[a][s][s'], reward[s][a], discount, initial_belief, nonvision_obs
/// ({"values": [...], "table": [[...]]}) and optional terminal.
nlohmann::json model_to_json(const VPomdpModel& model);
VPomdpModel model_from_json(const nlohmann::json& doc);

VPomdpModel load_model(const std::filesystem::path& path);
void save_model(const VPomdpModel& model, const std::filesystem::path& path);

}  // namespace pbp
