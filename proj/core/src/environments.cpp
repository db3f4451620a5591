#include "pbp/environments.hpp"

#include <algorithm>
#include <map>

#include "pbp/errors.hpp"

namespace pbp {

namespace {

using Matrix = std::vector<std::vector<double>>;

constexpr int kDr[4] = {-1, 0, 1, 0};  // N E S W
constexpr int kDc[4] = {0, 1, 0, -1};

const std::vector<std::string> kFrozenLake4 = {"SFFF", "FHFH", "FFFH", "HFFG"};
const std::vector<std::string> kFrozenLake8 = {"SFFFFFFF", "FFFFFFFF", "FFFHFFFF", "FFFFFHFF",
                                               "FFFHFFFF", "FHHFFFHF", "FHFFHFHF", "FFFHFFFG"};

ModelData empty_model(std::vector<StateVariable> vars, std::vector<std::size_t> vision, std::vector<std::string> actions) {
    ModelData d;
    std::size_t n = 1;
    for (const auto& v : vars) n *= v.values.size();
    d.state_vars = std::move(vars);
    d.vision_state_indices = std::move(vision);
    d.actions = std::move(actions);
    d.transition.assign(d.actions.size(), Matrix(n, std::vector<double>(n, 0.0)));
    d.reward.assign(n, std::vector<double>(d.actions.size(), 0.0));
    d.discount = 0.95;
    d.initial_belief.assign(n, 0.0);
    d.terminal.assign(n, false);
    return d;
}

void make_absorbing(ModelData& d, StateIndex s) {
    d.terminal[s] = true;
    for (auto& t : d.transition) t[s][s] = 1.0;
    std::fill(d.reward[s].begin(), d.reward[s].end(), 0.0);
}

}  // namespace

const char* to_string(CorruptionMode mode) { return mode == CorruptionMode::additive ? "additive" : "pure"; }

CorruptionMode corruption_mode_from_string(const std::string& name) {
    if (name == "additive") return CorruptionMode::additive;
    if (name == "pure") return CorruptionMode::pure;
    throw InvalidArgument("unknown corruption mode '" + name + "'");
}

VisionDataset VisionChannel::dataset(Split split) const {
    if (split == Split::plan) return plan_dataset;
    VisionDataset d(split);
    const auto& p = pools[static_cast<std::size_t>(split)];
    for (std::size_t c = 0; c < p.size(); ++c) {
        for (ObsId id : p[c]) d.add(id, c);
    }
    return d;
}

VisionChannel make_vision_channel(const SyntheticChannelSpec& spec, std::size_t ids_per_class) {
    auto synth = synthesize_channel(spec, ids_per_class);
    VisionChannel ch;
    ch.spec = spec;
    const VisionDataset* datasets[] = {&synth.perc, &synth.plan, &synth.act};
    for (std::size_t si = 0; si < 3; ++si) {
        ch.pools[si].assign(spec.classes, {});
        for (const auto& [id, c] : datasets[si]->pairs()) ch.pools[si][c].push_back(id);
    }
    ch.plan_dataset = synth.plan;
    ch.table = std::move(synth.table);
    return ch;
}

VisionChannel apply_corruption(const VisionChannel& channel, const CorruptionConfig& cfg) {
    if (!(cfg.noise_probability >= 0.0 && cfg.noise_probability <= 1.0)) {
        throw InvalidArgument("noise probability must lie in [0,1]");
    }
    if (cfg.noise_probability == 0.0) return channel;
    const std::size_t k = channel.spec.classes;
    const double chance = 1.0 / static_cast<double>(k);
    if (cfg.mode == CorruptionMode::additive && !(cfg.additive_accuracy >= chance && cfg.additive_accuracy <= 1.0)) {
        throw InvalidArgument("additive accuracy must lie in [1/classes, 1]");
    }

    VisionChannel out = channel;
    out.act_noise = cfg.noise_probability;
    const double bias = cfg.mode == CorruptionMode::additive ? calibrate_bias(cfg.additive_accuracy, k) : 0.0;
    const char* prefix = cfg.mode == CorruptionMode::additive ? "additive" : "pure";
    auto make_pool = [&](Split split, std::uint64_t stream) {
        std::vector<std::vector<ObsId>> pool(k);
        const auto& clean = channel.pools[static_cast<std::size_t>(split)];
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t i = 0; i < clean[c].size(); ++i) {
                Rng rng(derive_seed(channel.spec.seed, 101, stream, c, i));
                PerceptionOutput o;
                if (cfg.mode == CorruptionMode::additive) {
                    o = draw_perception_output(c, k, bias, channel.spec.sharpness, channel.spec.uncertainty_noise, rng);
                } else if (channel.spec.overconfident_on_corrupt) {
                    o = draw_overconfident_output(c, k, rng);
                } else {
                    // Near-uniform output: tiny logits carry no class signal.
                    o = draw_perception_output(c, k, 0.0, 0.005, 0.0, rng);
                    o.uncertainty = 1.0;
                }
                const std::string name = std::string(prefix) + "-" + to_string(split);
                pool[c].push_back(out.table.add(observation_name(name, c, i), std::move(o), c));
            }
        }
        return pool;
    };
    out.corrupt_plan = make_pool(Split::plan, 0);
    out.corrupt_act = make_pool(Split::act, 1);

    // The k-th clean plan image of a class is swapped for its k-th corrupted variant.
    Rng rng(derive_seed(cfg.seed, 202));
    out.plan_dataset = VisionDataset(Split::plan);
    const auto& clean_plan = channel.pools[static_cast<std::size_t>(Split::plan)];
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < clean_plan[c].size(); ++i) {
            const bool corrupt = uniform01(rng) < cfg.noise_probability;
            out.plan_dataset.add(corrupt ? out.corrupt_plan[c][i] : clean_plan[c][i], c);
        }
    }
    return out;
}

ObsId draw_act_observation(const VisionChannel& channel, std::size_t vision_class, Rng& rng) {
    const double u = uniform01(rng);
    const double pick = uniform01(rng);
    const bool corrupt = !channel.corrupt_act.empty() && u < channel.act_noise;
    const auto& pool = corrupt ? channel.corrupt_act.at(vision_class) : channel.pool(Split::act, vision_class);
    return pool[std::min(pool.size() - 1, static_cast<std::size_t>(pick * static_cast<double>(pool.size())))];
}

std::shared_ptr<const VPomdpModel> frozen_lake_model(std::size_t n) {
    if (n != 4 && n != 8) throw InvalidArgument("FrozenLake size must be 4 or 8");
    const auto& map = n == 4 ? kFrozenLake4 : kFrozenLake8;
    StateVariable position{"position", {}};
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) position.values.push_back("r" + std::to_string(r) + "c" + std::to_string(c));
    }
    auto d = empty_model({position, {"slippery", {"dry", "slippery"}}}, {0}, {"north", "east", "south", "west"});
    const std::size_t cells = n * n;
    auto cell_at = [&](std::size_t p) { return map[p / n][p % n]; };
    auto move = [&](std::size_t p, int dir) {
        const int r = static_cast<int>(p / n) + kDr[dir];
        const int c = static_cast<int>(p % n) + kDc[dir];
        if (r < 0 || c < 0 || r >= static_cast<int>(n) || c >= static_cast<int>(n)) return p;
        return static_cast<std::size_t>(r) * n + static_cast<std::size_t>(c);
    };
    for (std::size_t p = 0; p < cells; ++p) {
        for (std::size_t slip = 0; slip < 2; ++slip) {
            const StateIndex s = p * 2 + slip;
            if (cell_at(p) == 'H' || cell_at(p) == 'G') {
                make_absorbing(d, s);
                continue;
            }
            for (int a = 0; a < 4; ++a) {
                std::vector<std::pair<std::size_t, double>> targets;
                if (slip == 0) {
                    targets.emplace_back(move(p, a), 1.0);
                } else {
                    targets.emplace_back(move(p, (a + 1) % 4), 0.5);
                    targets.emplace_back(move(p, (a + 3) % 4), 0.5);
                }
                for (const auto& [q, pr] : targets) {
                    for (std::size_t ns = 0; ns < 2; ++ns) d.transition[a][s][q * 2 + ns] += 0.5 * pr;
                    if (cell_at(q) == 'G') d.reward[s][a] += pr;
                }
            }
        }
    }
    d.initial_belief[0] = 0.5;
    d.initial_belief[1] = 0.5;
    d.nonvision_obs = {"dry", "slippery"};
    d.nonvision_obs_fn.assign(cells * 2, std::vector<double>(2, 0.0));
    for (StateIndex s = 0; s < cells * 2; ++s) d.nonvision_obs_fn[s][s % 2] = 1.0;
    return std::make_shared<const VPomdpModel>(std::move(d));
}

std::shared_ptr<const VPomdpModel> flower_grid_model() {
    constexpr std::size_t kSide = 5;
    constexpr std::size_t kCells = kSide * kSide;
    // 1-indexed cell numbers. Cell 20 holds the target, which takes precedence
    // over the poison list that also names it.
    const std::vector<std::size_t> poison = {2, 5, 8, 11, 17, 19, 23};
    constexpr std::size_t kTarget = 20;
    constexpr std::size_t kGoal = 25;
    auto is_poison = [&](std::size_t cell) { return std::find(poison.begin(), poison.end(), cell) != poison.end(); };

    StateVariable position{"position", {}};
    for (std::size_t cell = 1; cell <= kCells; ++cell) position.values.push_back("cell" + std::to_string(cell));
    auto d = empty_model({position, {"picked", {"no", "yes"}}}, {0},
                         {"north", "east", "south", "west", "pick"});
    auto state = [](std::size_t cell, std::size_t picked) { return (cell - 1) * 2 + picked; };
    const StateIndex sink = state(kGoal, 1);
    auto neighbor = [&](std::size_t cell, int dir) -> std::optional<std::size_t> {
        const int r = static_cast<int>((cell - 1) / kSide) + kDr[dir];
        const int c = static_cast<int>((cell - 1) % kSide) + kDc[dir];
        if (r < 0 || c < 0 || r >= static_cast<int>(kSide) || c >= static_cast<int>(kSide)) return std::nullopt;
        return static_cast<std::size_t>(r) * kSide + static_cast<std::size_t>(c) + 1;
    };

    for (std::size_t cell = 1; cell <= kCells; ++cell) {
        for (std::size_t picked = 0; picked < 2; ++picked) {
            const StateIndex s = state(cell, picked);
            if (s == sink) {
                make_absorbing(d, s);
                continue;
            }
            std::vector<std::size_t> around{cell};
            for (int dir = 0; dir < 4; ++dir) {
                if (auto nb = neighbor(cell, dir)) around.push_back(*nb);
            }
            for (int a = 0; a < 4; ++a) {
                std::map<std::size_t, double> dest;
                dest[neighbor(cell, a).value_or(cell)] += 0.6;
                for (auto q : around) dest[q] += 0.4 / static_cast<double>(around.size());
                for (const auto& [q, pr] : dest) {
                    const StateIndex next = state(q, picked);
                    d.transition[a][s][next] += pr;
                    if (next == sink) d.reward[s][a] += 100.0 * pr;
                }
            }
            constexpr int kPick = 4;
            if (cell == kTarget && picked == 0) {
                d.transition[kPick][s][state(cell, 1)] = 1.0;
                d.reward[s][kPick] = 10.0;
            } else if (is_poison(cell)) {
                d.transition[kPick][s][sink] = 1.0;
                d.reward[s][kPick] = -10.0;
            } else {
                d.transition[kPick][s][s] = 1.0;
                d.reward[s][kPick] = -1.0;
            }
        }
    }
    d.initial_belief[state(1, 0)] = 1.0;
    d.nonvision_obs = {"not-picked", "picked"};
    d.nonvision_obs_fn.assign(kCells * 2, std::vector<double>(2, 0.0));
    for (StateIndex s = 0; s < kCells * 2; ++s) d.nonvision_obs_fn[s][s % 2] = 1.0;
    return std::make_shared<const VPomdpModel>(std::move(d));
}

std::shared_ptr<const VPomdpModel> intersection_model() {
    enum { kGreen, kRed, kYellow };
    const double light_next[3][3] = {{0.6, 0.4, 0.0}, {0.0, 0.7, 0.3}, {1.0, 0.0, 0.0}};
    const double siren_next[2][2] = {{0.8, 0.2}, {0.2, 0.8}};
    constexpr std::size_t kPositions = 7;  // index 0 is the terminal position -1
    auto d = empty_model({{"light", {"green", "red", "yellow"}},
                          {"position", {"-1", "0", "1", "2", "3", "4", "5"}},
                          {"siren", {"off", "on"}}},
                         {0}, {"wait", "back-1", "back-2"});
    auto state = [](std::size_t light, std::size_t pos, std::size_t siren) { return (light * kPositions + pos) * 2 + siren; };
    for (std::size_t light = 0; light < 3; ++light) {
        for (std::size_t pos = 0; pos < kPositions; ++pos) {
            for (std::size_t siren = 0; siren < 2; ++siren) {
                const StateIndex s = state(light, pos, siren);
                if (pos == 0) {
                    make_absorbing(d, s);
                    continue;
                }
                for (std::size_t a = 0; a < 3; ++a) {
                    const std::size_t next_pos = a == 0 ? pos : (pos > a ? pos - a : 0);
                    for (std::size_t l2 = 0; l2 < 3; ++l2) {
                        for (std::size_t s2 = 0; s2 < 2; ++s2) {
                            d.transition[a][s][state(l2, next_pos, s2)] += light_next[light][l2] * siren_next[siren][s2];
                        }
                    }
                    if (a == 0) {
                        d.reward[s][a] = -1.0;
                    } else if (next_pos == 0) {
                        d.reward[s][a] = (light == kRed ? -100.0 : 0.0) + (siren == 1 ? -200.0 : 0.0);
                    }
                }
            }
        }
    }
    for (std::size_t light = 0; light < 3; ++light) d.initial_belief[state(light, 6, 0)] = 1.0 / 3.0;
    for (std::size_t pos = 0; pos < kPositions; ++pos) {
        for (const char* reading : {"none", "coming"}) {
            d.nonvision_obs.push_back("pos" + d.state_vars[1].values[pos] + "-" + reading);
        }
    }
    const std::size_t n = 3 * kPositions * 2;
    d.nonvision_obs_fn.assign(n, std::vector<double>(kPositions * 2, 0.0));
    for (std::size_t light = 0; light < 3; ++light) {
        for (std::size_t pos = 0; pos < kPositions; ++pos) {
            d.nonvision_obs_fn[state(light, pos, 1)][pos * 2 + 1] = 1.0;
            d.nonvision_obs_fn[state(light, pos, 0)][pos * 2] = 0.5;
            d.nonvision_obs_fn[state(light, pos, 0)][pos * 2 + 1] = 0.5;
        }
    }
    return std::make_shared<const VPomdpModel>(std::move(d));
}

namespace {

EnvInstance make_env(std::string name, std::shared_ptr<const VPomdpModel> model, const ChannelOptions& opts,
                     std::size_t default_pool) {
    SyntheticChannelSpec spec;
    spec.classes = model->states().num_vision_classes();
    spec.accuracy = opts.accuracy;
    spec.sharpness = opts.sharpness;
    spec.seed = opts.seed;
    spec.uncertainty_noise = opts.uncertainty_noise;
    spec.overconfident_on_corrupt = opts.overconfident_on_corrupt;
    EnvInstance env;
    env.name = std::move(name);
    env.model = std::move(model);
    env.channel = make_vision_channel(spec, opts.ids_per_class ? opts.ids_per_class : default_pool);
    return env;
}

}  // namespace

EnvInstance make_frozen_lake(std::size_t n, const ChannelOptions& opts) {
    return make_env("frozenlake" + std::to_string(n), frozen_lake_model(n), opts, 40);
}

EnvInstance make_flower_grid(const ChannelOptions& opts) { return make_env("flowergrid", flower_grid_model(), opts, 20); }

EnvInstance make_intersection(const ChannelOptions& opts) {
    return make_env("intersection", intersection_model(), opts, 40);
}

EnvInstance make_environment(const std::string& name, const ChannelOptions& opts) {
    if (name == "frozenlake4") return make_frozen_lake(4, opts);
    if (name == "frozenlake8") return make_frozen_lake(8, opts);
    if (name == "flowergrid") return make_flower_grid(opts);
    if (name == "intersection") return make_intersection(opts);
    throw InvalidArgument("unknown environment '" + name + "'");
}

StepResult env_step(const EnvInstance& env, StateIndex s, ActionIndex a, std::size_t t, Rng& rng) {
    const auto& m = *env.model;
    if (s >= m.num_states()) throw InvalidArgument("state out of range");
    m.check_action(a);
    if (m.is_terminal(s)) throw ContractError("env_step called on a terminal state");
    std::vector<double> w;
    const auto succ = m.successors(s, a);
    for (const auto& sc : succ) w.push_back(sc.prob);
    const StateIndex next = succ[sample_index(w, rng)].next;
    std::size_t znv = 0;
    w.assign(m.num_nonvision_obs(), 0.0);
    for (std::size_t z = 0; z < w.size(); ++z) w[z] = m.nonvision_obs_prob(next, z);
    znv = sample_index(w, rng);
    const ObsId vision = draw_act_observation(env.channel, m.states().vision_class(next), rng);
    return {next, {vision, znv}, m.reward(s, a), m.is_terminal(next) || t + 1 >= env.horizon};
}

}  // namespace pbp
