#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pbp/planning_model.hpp"
#include "pbp/random.hpp"

namespace pbp {

/// Unweighted particle belief. Invigorated particles sit at the end.
class ParticleSet {
public:
    ParticleSet() = default;
    explicit ParticleSet(std::vector<StateIndex> particles, std::size_t invigorated = 0);

    static ParticleSet sample(const Belief& b, std::size_t k, Rng& rng);

    std::span<const StateIndex> particles() const noexcept { return particles_; }
    std::size_t size() const noexcept { return particles_.size(); }
    bool empty() const noexcept { return particles_.empty(); }
    std::size_t invigorated() const noexcept { return invigorated_; }

    /// Empirical distribution over `num_states`, optionally over the
    /// non-invigorated prefix only.
    std::vector<double> distribution(std::size_t num_states, bool exclude_invigorated = false) const;

private:
    std::vector<StateIndex> particles_;
    std::size_t invigorated_ = 0;
};

struct ParticleFilterConfig {
    std::size_t particles = 1000;
    double invigoration = 0.05;
    std::size_t max_tries = 1'000'000;
};

struct FilterResult {
    ParticleSet particles;
    /// All draws were rejected; `particles` holds uniform-random states.
    bool fallback = false;
    double acceptance_rate = 0.0;
};

/// Number of particles replaced by fresh uniform draws: ceil(rate * K).
std::size_t invigoration_count(std::size_t k, double rate);

/// Rejection-sampling filter step: a successor x' of a random particle is kept
/// when u < f(x'_v) * O_nv(z_nv | x'), u ~ U(0,1).
FilterResult particle_filter_update(const VPomdpModel& model, const ParticleSet& ps, ActionIndex a,
                                    std::span<const double> perc_dist, std::optional<std::size_t> z_nv,
                                    const ParticleFilterConfig& cfg, Rng& rng);

/// Sequential importance weights after observing (z_v, z_nv): w' ∝ w * f(x_v) * O_nv(z_nv | x).
/// Returns all zeros when nothing is consistent with the evidence.
std::vector<double> sis_reweight(const VPomdpModel& model, std::span<const StateIndex> particles,
                                 std::span<const double> weights, std::span<const double> perc_dist,
                                 std::optional<std::size_t> z_nv);

struct PomcpConfig {
    std::size_t simulations = 1000;
    /// Negative selects (R_max - R_min) / (1 - γ).
    double c_ucb = -1.0;
    std::size_t max_depth = 50;
    double random_rollout_prob = 0.2;
};

/// Monte-Carlo tree search over histories of the planning model. Observations
/// are bucketed by (argmax of the evidence distribution, z_nv).
class PomcpPlanner {
public:
    PomcpPlanner(const PlanningModel& pm, const PlannerEvidence& evidence, QTable mdp_q, PomcpConfig cfg);

    /// Builds a fresh tree from the particles and returns argmax of the root Q
    /// (lowest index on ties). With zero simulations the action is uniform-random.
    ActionIndex plan_action(const ParticleSet& root, Rng& rng);

    /// Discounted return of up to `steps` steps under the rollout policy.
    double rollout(StateIndex s, std::size_t steps, Rng& rng) const;

    double c_ucb() const noexcept { return c_ucb_; }
    /// Root statistics of the last search: (visits, Q) per action.
    const std::vector<std::pair<std::size_t, double>>& root_stats() const noexcept { return root_stats_; }

private:
    struct ActionNode {
        std::size_t visits = 0;
        double q = 0.0;
        std::vector<std::pair<std::size_t, std::size_t>> children;  // (bucket, history node)
    };
    struct HistoryNode {
        std::size_t visits = 0;
        std::vector<ActionNode> actions;
    };

    double simulate(StateIndex s, std::size_t node, std::size_t depth, Rng& rng);
    std::size_t child_node(std::size_t node, ActionIndex a, std::size_t bucket);
    ActionIndex ucb_action(const HistoryNode& node) const;

    const PlanningModel* pm_;
    const PlannerEvidence* evidence_;
    QTable q_;
    PomcpConfig cfg_;
    double c_ucb_;
    std::vector<std::size_t> bucket_of_vision_;
    std::vector<HistoryNode> tree_;
    std::vector<std::pair<std::size_t, double>> root_stats_;
};

}  // namespace pbp
