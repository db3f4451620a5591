#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "pbp/planning_model.hpp"
#include "pbp/random.hpp"

namespace pbp {

/// Lower-bound hyperplane. Values are stored densely over S; evaluation walks
/// only the belief's support.
struct AlphaVector {
    std::vector<double> values;
    ActionIndex action = 0;

    double dot(const Belief& b) const;
    double dot(std::span<const Belief::Entry> b) const;
};

/// Γ: max over vectors is a lower bound on the optimal value.
class AlphaVectorSet {
public:
    AlphaVectorSet() = default;

    /// Appends without any checks.
    void add(AlphaVector v);

    /// Adds `v` if it raises the bound at `at` by more than `tol`, then drops
    /// vectors that `v` pointwise dominates. Returns whether `v` was kept.
    bool add_if_improves(AlphaVector v, const Belief& at, double tol = 1e-12);

    /// Value and index of the maximizing vector (lowest index on ties).
    std::pair<double, std::size_t> best(const Belief& b) const;
    std::pair<double, std::size_t> best(std::span<const Belief::Entry> b) const;
    double value(const Belief& b) const { return best(b).first; }
    ActionIndex action(const Belief& b) const;

    /// Removes vectors that another vector dominates pointwise; of exact
    /// duplicates the earliest survives. Returns the number removed.
    std::size_t prune_dominated();

    const std::vector<AlphaVector>& vectors() const noexcept { return vectors_; }
    std::size_t size() const noexcept { return vectors_.size(); }
    bool empty() const noexcept { return vectors_.empty(); }

private:
    std::vector<AlphaVector> vectors_;
};

/// Sawtooth upper bound: corner values at point masses plus (belief, value) anchors.
class SawtoothBound {
public:
    struct Anchor {
        Belief belief;
        double value;
        /// value minus the corner interpolation at `belief` (always negative).
        double delta;
        /// Bit (s mod 64) set for every support state; a cheap subset precheck.
        std::uint64_t mask;
    };

    SawtoothBound() = default;
    explicit SawtoothBound(std::vector<double> corners);

    double corner_value(const Belief& b) const;
    double corner_value(std::span<const Belief::Entry> b) const;
    double value(const Belief& b) const;
    double value(std::span<const Belief::Entry> b) const;

    /// Adds an anchor when it lowers the bound at `b` by more than `tol`.
    bool add(const Belief& b, double v, double tol = 1e-12);

    /// Drops anchors whose point is already bounded at least as tightly by the
    /// corners and the remaining anchors. Returns the number removed.
    std::size_t prune();

    const std::vector<double>& corners() const noexcept { return corners_; }
    const std::vector<Anchor>& anchors() const noexcept { return anchors_; }

private:
    double value_excluding(std::span<const Belief::Entry> b, std::size_t skip,
                           const std::vector<bool>* removed = nullptr) const;
    void rebuild_index();

    std::vector<double> corners_;
    std::vector<Anchor> anchors_;
    /// Anchors keyed by the first state of their support: an anchor only
    /// tightens the bound at b when its whole support lies inside b's.
    std::vector<std::vector<std::size_t>> by_first_state_;
};

struct HsviBudget {
    enum class Mode { iterations, seconds };
    Mode mode = Mode::iterations;
    std::size_t iterations = 200;
    double seconds = 300.0;
};

struct HsviConfig {
    double eps_explore = 0.1;
    double slack = 0.01;
    HsviBudget budget;
    std::uint64_t seed = 0;
    std::size_t max_depth = 200;
    /// Full Γ / anchor pruning every this many trials (tree pruning runs every trial).
    std::size_t prune_every = 5;
    /// Tolerance of the value iteration that seeds the upper-bound corners.
    double mdp_tolerance = 1e-9;
};

struct BoundSample {
    std::size_t iteration;
    double seconds;
    double lower;
    double upper;
};

/// Node of the explored belief tree.
struct BeliefNode {
    Belief belief;
    double lower = 0.0;
    double upper = 0.0;
    /// Last computed action values; stale entries stay valid bounds.
    std::vector<double> q_lower;
    std::vector<double> q_upper;
    std::vector<bool> pruned_action;
    /// children[a] = (observation index, node id), ascending observation.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> children;
};

struct BackupResult {
    AlphaVector vector;
    /// β_a · b for every action.
    std::vector<double> q;
};

struct HsviResult {
    AlphaVectorSet policy;
    std::vector<BoundSample> trace;
    double lower = 0.0;
    double upper = 0.0;
    std::size_t iterations = 0;
    double seconds = 0.0;
    bool converged = false;
};

/// Heuristic search value iteration on a planning model. Successor beliefs in
/// backups and in exploration follow the evidence's update rule; the upper bound
/// is maintained with the planning model's own Bayes posterior so that both
/// bounds bracket the same value function.
class HsviSolver {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    HsviSolver(const PlanningModel& pm, PlannerEvidence evidence, HsviConfig cfg);

    HsviResult solve();

    /// One forward exploration trial from the root followed by backups along
    /// the path; appends a trace sample.
    void run_trial();

    double lower(const Belief& b) const { return lower_.value(b); }
    double upper(const Belief& b) const { return upper_.value(b); }

    BackupResult backup(const Belief& b) const;
    /// max_a of the upper-bound Bellman update at `b`, with per-action values.
    std::pair<double, std::vector<double>> upper_backup(const Belief& b) const;

    /// Chooses (a, z) from `node_id` and returns the child node id, or npos when
    /// no observation branch exists.
    std::size_t explore_step(std::size_t node_id, std::size_t depth);

    /// Tree pruning plus dominated Γ vectors and anchors.
    void prune(bool full = true);

    const AlphaVectorSet& lower_bound() const noexcept { return lower_; }
    const SawtoothBound& upper_bound() const noexcept { return upper_; }
    const std::vector<BoundSample>& trace() const noexcept { return trace_; }
    const BeliefNode& node(std::size_t id) const { return nodes_.at(id); }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t root() const noexcept { return 0; }
    std::size_t iterations() const noexcept { return iteration_; }
    const BeliefStepper& stepper() const noexcept { return stepper_; }

private:
    std::size_t find_or_add_node(Belief b);
    void update_node(std::size_t id);
    double threshold(std::size_t depth) const;
    double elapsed() const;
    std::vector<std::size_t> evidence_group_;

    const PlanningModel* pm_;
    PlannerEvidence evidence_;
    HsviConfig cfg_;
    BeliefStepper stepper_;
    AlphaVectorSet lower_;
    SawtoothBound upper_;
    std::vector<BeliefNode> nodes_;
    std::unordered_multimap<std::uint64_t, std::size_t> node_index_;
    std::vector<BoundSample> trace_;
    Rng rng_;
    std::size_t iteration_ = 0;
    std::chrono::steady_clock::time_point start_;
};

/// Best single-action-forever vectors, iterated from R_min / (1 - γ).
AlphaVectorSet blind_policy_bound(const VPomdpModel& model, double tol = 1e-10);

HsviResult solve_hsvi(const PlanningModel& pm, const PlannerEvidence& evidence, const HsviConfig& cfg);

/// Greedy policy over a fixed Γ.
class AlphaVectorPolicy {
public:
    AlphaVectorPolicy() = default;
    explicit AlphaVectorPolicy(AlphaVectorSet set) : set_(std::move(set)) {}
    ActionIndex action(const Belief& b) const { return set_.action(b); }
    double value(const Belief& b) const { return set_.value(b); }
    const AlphaVectorSet& vectors() const noexcept { return set_; }

private:
    AlphaVectorSet set_;
};

nlohmann::json policy_to_json(const AlphaVectorSet& set, const VPomdpModel& model);
AlphaVectorSet policy_from_json(const nlohmann::json& doc, const VPomdpModel& model);
void save_policy(const AlphaVectorSet& set, const VPomdpModel& model, const std::filesystem::path& path);
AlphaVectorSet load_policy(const std::filesystem::path& path, const VPomdpModel& model);

/// CSV with header iteration,seconds,lower,upper.
void write_bound_trace(const std::vector<BoundSample>& trace, std::ostream& out);

}  // namespace pbp
