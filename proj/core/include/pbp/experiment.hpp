#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pbp/environments.hpp"
#include "pbp/hsvi.hpp"
#include "pbp/planning_model.hpp"
#include "pbp/pomcp.hpp"

namespace pbp {

enum class Algorithm { pbp_hsvi, tpbp_hsvi, wpbp_hsvi, tpbp_pomcp, psrl_hsvi, noperc, oracle };
const char* to_string(Algorithm algo);
Algorithm algorithm_from_string(const std::string& name);
bool is_pomcp(Algorithm algo);

struct ExperimentConfig {
    std::string env = "frozenlake4";
    Algorithm algorithm = Algorithm::pbp_hsvi;
    /// TUQ threshold for tpbp-hsvi / tpbp-pomcp.
    double eps = 0.1;
    UncertaintyFunction unc_fn = UncertaintyFunction::table;
    ChannelOptions channel;
    CorruptionConfig corruption;
    /// 0 picks the default: 1000 episodes, 10 for POMCP.
    std::size_t episodes = 0;
    std::size_t horizon = 200;
    HsviConfig hsvi;
    PomcpConfig pomcp;
    ParticleFilterConfig filter;
    /// Master seed: episodes, planner streams and, unless pinned below, the channel.
    std::uint64_t seed = 0;
    /// Pins the synthetic channel / corruption draws independently of `seed`.
    std::optional<std::uint64_t> channel_seed;
    std::optional<std::uint64_t> corruption_seed;

    std::size_t episode_count() const { return episodes ? episodes : (is_pomcp(algorithm) ? 10 : 1000); }
};

/// Throws ConfigError naming the first invalid field.
void validate(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies PBP_SEED from the environment when set.
void apply_seed_override(ExperimentConfig& cfg);

struct ReturnStats {
    double mean = 0.0;
    double ci95 = 0.0;
};

/// Mean and 1.96 * sample-sd / sqrt(n) half-width.
ReturnStats summarize(const std::vector<double>& returns);

struct ResultRecord {
    std::string env;
    std::string algo;
    std::string unc_fn;
    double eps = 0.0;
    std::string noise_mode;
    double noise_p = 0.0;
    std::uint64_t seed = 0;
    std::size_t episodes = 0;
    double V = 0.0;
    double ci95 = 0.0;
    double t_seconds = 0.0;
    std::size_t fallbacks = 0;
    /// Mean per-step L1 distance between particle and exact belief; POMCP only.
    std::optional<double> belief_l1;
    std::string config_hash;
    std::vector<double> returns;
};

inline constexpr const char* kCsvHeader =
    "env,algo,unc_fn,eps,noise_mode,noise_p,seed,episodes,V,ci95,t_seconds,fallbacks,belief_l1";
void write_csv_header(std::ostream& out);
void write_csv_row(const ResultRecord& r, std::ostream& out);

/// Everything a run plans with: the corrupted channel, the planning model built
/// from its plan split, and the planner evidence.
struct PlanningSetup {
    EnvInstance env;
    std::shared_ptr<PlanningModel> planning_model;
    PlannerEvidence evidence;
    UqConfig uq;
    UpdateRule rule = UpdateRule::pbp;
};

PlanningSetup make_planning_setup(const ExperimentConfig& cfg);

/// Solved HSVI plan plus its solve time.
struct SolvedPolicy {
    AlphaVectorSet policy;
    HsviResult result;
};

/// Caches solved policies by a hash of everything that determines them
/// (environment, plan channel, algorithm, UQ settings, budget, seed).
class PolicyCache {
public:
    std::shared_ptr<const SolvedPolicy> get_or_solve(const ExperimentConfig& cfg, const PlanningSetup& setup);
    std::size_t size() const noexcept { return cache_.size(); }
    std::size_t hits() const noexcept { return hits_; }

private:
    std::map<std::string, std::shared_ptr<const SolvedPolicy>> cache_;
    std::size_t hits_ = 0;
};

std::string plan_key(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

/// Perception distribution the acting agent feeds into its update for a received ID.
Distribution acting_distribution(const ExperimentConfig& cfg, const PlanningSetup& setup, ObsId id);

/// Plans (or reuses a cached plan) and runs the configured number of episodes.
ResultRecord run_experiment(const ExperimentConfig& cfg, PolicyCache* cache = nullptr,
                            std::shared_ptr<const SolvedPolicy> policy = nullptr);

/// One record per noise probability, sharing `cache` across points.
std::vector<ResultRecord> sweep_noise(const ExperimentConfig& cfg, const std::vector<double>& probabilities,
                                      PolicyCache* cache = nullptr);

/// Σ_s |b(s) - freq(s)| over the whole particle set.
double belief_l1(const Belief& b, const ParticleSet& ps, std::size_t num_states);

/// Greedy Γ policy simulated on the planning model itself: states, observations
/// and rewards come from M̂; the agent updates with `rule` (pbp/psrl use the
/// evidence, standard uses M̂'s Bayes posterior).
ReturnStats evaluate_on_planning_model(const PlanningModel& pm, const PlannerEvidence& evidence,
                                       const AlphaVectorSet& policy, std::size_t episodes, std::size_t horizon,
                                       std::uint64_t seed);

}  // namespace pbp
