#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbp/belief.hpp"

namespace pbp {

struct StateVariable {
    std::string name;
    std::vector<std::string> values;
};

/// Product of finite state variables, indexed row-major: the last variable varies
/// fastest. Splits each state into its vision component (the variables listed in
/// `vision_indices`, also row-major among themselves) and the non-vision rest.
class StateSpace {
public:
    StateSpace() = default;
    StateSpace(std::vector<StateVariable> variables, std::vector<std::size_t> vision_indices);

    std::size_t size() const noexcept { return size_; }
    const std::vector<StateVariable>& variables() const noexcept { return variables_; }
    const std::vector<std::size_t>& vision_indices() const noexcept { return vision_indices_; }

    std::vector<std::size_t> decode(StateIndex s) const;
    StateIndex encode(std::span<const std::size_t> values) const;

    std::size_t num_vision_classes() const noexcept { return num_vision_classes_; }
    std::size_t num_nonvision_components() const noexcept { return num_nonvision_; }
    std::size_t vision_class(StateIndex s) const { return vision_class_[s]; }
    std::size_t nonvision_component(StateIndex s) const { return nonvision_[s]; }
    StateIndex compose(std::size_t vision_class, std::size_t nonvision_component) const {
        return compose_[vision_class * num_nonvision_ + nonvision_component];
    }
    /// States whose vision component equals `vision_class`, ascending.
    std::span<const StateIndex> states_of_class(std::size_t vision_class) const {
        return states_of_class_[vision_class];
    }

private:
    std::vector<StateVariable> variables_;
    std::vector<std::size_t> vision_indices_;
    std::size_t size_ = 0;
    std::size_t num_vision_classes_ = 0;
    std::size_t num_nonvision_ = 0;
    std::vector<std::size_t> vision_class_;
    std::vector<std::size_t> nonvision_;
    std::vector<StateIndex> compose_;
    std::vector<std::vector<StateIndex>> states_of_class_;
};

/// Plain-data description of a vision POMDP; the on-disk JSON mirrors these fields.
struct ModelData {
    std::vector<StateVariable> state_vars;
    std::vector<std::size_t> vision_state_indices;
    std::vector<std::string> actions;
    /// transition[a][s][s'].
    std::vector<std::vector<std::vector<double>>> transition;
    /// reward[s][a].
    std::vector<std::vector<double>> reward;
    double discount = 0.95;
    std::vector<double> initial_belief;
    std::vector<std::string> nonvision_obs;
    /// nonvision_obs_fn[s][z]; empty for pure-vision models.
    std::vector<std::vector<double>> nonvision_obs_fn;
    /// Absorbing zero-reward states; empty means none.
    std::vector<bool> terminal;
};

struct Successor {
    StateIndex next;
    double prob;
};

/// Immutable vision POMDP: known dynamics, rewards and non-vision observation
/// function; the vision observation function is deliberately absent.
class VPomdpModel {
public:
    explicit VPomdpModel(ModelData data);

    const ModelData& data() const noexcept { return data_; }
    const StateSpace& states() const noexcept { return space_; }
    std::size_t num_states() const noexcept { return space_.size(); }
    std::size_t num_actions() const noexcept { return data_.actions.size(); }
    double discount() const noexcept { return data_.discount; }

    double transition(StateIndex s, ActionIndex a, StateIndex next) const {
        return transition_[(a * num_states() + s) * num_states() + next];
    }
    std::span<const Successor> successors(StateIndex s, ActionIndex a) const {
        const auto& r = successor_ranges_[a * num_states() + s];
        return {successors_.data() + r.first, r.second};
    }
    double reward(StateIndex s, ActionIndex a) const { return reward_[s * num_actions() + a]; }
    double reward_min() const noexcept { return reward_min_; }
    double reward_max() const noexcept { return reward_max_; }

    const Belief& initial_belief() const noexcept { return initial_belief_; }

    /// Pure-vision models report a single implicit non-vision observation.
    bool pure_vision() const noexcept { return data_.nonvision_obs_fn.empty(); }
    std::size_t num_nonvision_obs() const noexcept { return pure_vision() ? 1 : data_.nonvision_obs.size(); }
    double nonvision_obs_prob(StateIndex s, std::size_t z) const {
        return pure_vision() ? 1.0 : nonvision_obs_[s * num_nonvision_obs() + z];
    }

    bool is_terminal(StateIndex s) const { return !terminal_.empty() && terminal_[s]; }

    void check_action(ActionIndex a) const;

private:
    ModelData data_;
    StateSpace space_;
    std::vector<double> transition_;
    std::vector<Successor> successors_;
    std::vector<std::pair<std::size_t, std::size_t>> successor_ranges_;
    std::vector<double> reward_;
    std::vector<double> nonvision_obs_;
    std::vector<bool> terminal_;
    Belief initial_belief_;
    double reward_min_ = 0.0;
    double reward_max_ = 0.0;
};

/// Pr(s' | b, a) as a dense vector over states.
std::vector<double> propagate(const VPomdpModel& model, const Belief& b, ActionIndex a);

/// Bayes update with a per-state likelihood of the received observation.
/// Throws EmptyBeliefError when no successor is consistent with the evidence.
Belief standard_belief_update(const VPomdpModel& model, const Belief& b, ActionIndex a,
                              std::span<const double> obs_prob);

/// Fully observable Q-values, q[s * num_actions + a].
class QTable {
public:
    QTable(std::size_t num_states, std::size_t num_actions, std::vector<double> q)
        : num_states_(num_states), num_actions_(num_actions), q_(std::move(q)) {}

    double q(StateIndex s, ActionIndex a) const { return q_[s * num_actions_ + a]; }
    double value(StateIndex s) const;
    ActionIndex best_action(StateIndex s) const;
    std::vector<double> values() const;
    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_actions() const noexcept { return num_actions_; }
    std::size_t sweeps = 0;
    double residual = 0.0;

private:
    std::size_t num_states_;
    std::size_t num_actions_;
    std::vector<double> q_;
};

/// Value iteration started from R_min / (1 - gamma); stops once the sup-norm
/// Bellman residual is at most `tol`.
QTable mdp_value_iteration(const VPomdpModel& model, double tol);

}  // namespace pbp
