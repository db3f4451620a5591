#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pbp/model.hpp"
#include "pbp/perception.hpp"
#include "pbp/random.hpp"
#include "pbp/synthetic_channel.hpp"

namespace pbp {

enum class CorruptionMode { additive, pure };
const char* to_string(CorruptionMode mode);
CorruptionMode corruption_mode_from_string(const std::string& name);

struct CorruptionConfig {
    double noise_probability = 0.0;
    CorruptionMode mode = CorruptionMode::pure;
    /// Target argmax accuracy of additive-noise outputs.
    double additive_accuracy = 0.4;
    std::uint64_t seed = 0;
};

/// Observation-ID pools standing in for images. Every class has a clean pool in
/// each split; corrupted variants exist for the plan and act splits once
/// apply_corruption has run with a positive noise probability.
struct VisionChannel {
    SyntheticChannelSpec spec;
    PerceptionTable table;
    /// pools[split][class], split indexed by Split.
    std::array<std::vector<std::vector<ObsId>>, 3> pools;
    std::vector<std::vector<ObsId>> corrupt_plan;
    std::vector<std::vector<ObsId>> corrupt_act;
    double act_noise = 0.0;
    /// D^plan as handed to the planner (after any corruption).
    VisionDataset plan_dataset{Split::plan};

    const std::vector<ObsId>& pool(Split split, std::size_t vision_class) const {
        return pools[static_cast<std::size_t>(split)].at(vision_class);
    }
    VisionDataset dataset(Split split) const;
};

VisionChannel make_vision_channel(const SyntheticChannelSpec& spec, std::size_t ids_per_class);

/// Replaces plan-split pairs with corrupted variants with probability p and makes
/// env_step draw corrupted act IDs with probability p. p = 0 returns the channel unchanged.
VisionChannel apply_corruption(const VisionChannel& channel, const CorruptionConfig& cfg);

/// Act-split observation for a vision class. Consumes exactly two draws.
ObsId draw_act_observation(const VisionChannel& channel, std::size_t vision_class, Rng& rng);

struct ChannelOptions {
    double accuracy = 0.9;
    double sharpness = 3.0;
    /// 0 selects the environment's default pool size.
    std::size_t ids_per_class = 0;
    std::uint64_t seed = 0;
    double uncertainty_noise = 0.0;
    bool overconfident_on_corrupt = false;
};

struct EnvInstance {
    std::string name;
    std::shared_ptr<const VPomdpModel> model;
    VisionChannel channel;
    std::size_t horizon = 200;
};

struct EnvObservation {
    ObsId vision;
    std::size_t nonvision;
};

struct StepResult {
    StateIndex next;
    EnvObservation obs;
    double reward;
    bool done;
};

std::shared_ptr<const VPomdpModel> frozen_lake_model(std::size_t n);
std::shared_ptr<const VPomdpModel> flower_grid_model();
std::shared_ptr<const VPomdpModel> intersection_model();

EnvInstance make_frozen_lake(std::size_t n, const ChannelOptions& opts = {});
EnvInstance make_flower_grid(const ChannelOptions& opts = {});
EnvInstance make_intersection(const ChannelOptions& opts = {});
/// "frozenlake4", "frozenlake8", "flowergrid" or "intersection".
EnvInstance make_environment(const std::string& name, const ChannelOptions& opts = {});

/// One environment transition. `t` is the index of this step within the episode
/// (0-based); the episode is done when s' is terminal or t + 1 reaches the horizon.
StepResult env_step(const EnvInstance& env, StateIndex s, ActionIndex a, std::size_t t, Rng& rng);

}  // namespace pbp
