#include "pbp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pbp/errors.hpp"

namespace pbp {

StateSpace::StateSpace(std::vector<StateVariable> variables, std::vector<std::size_t> vision_indices)
    : variables_(std::move(variables)), vision_indices_(std::move(vision_indices)) {
    if (variables_.empty()) throw InvalidArgument("state space needs at least one variable");
    std::sort(vision_indices_.begin(), vision_indices_.end());
    if (std::adjacent_find(vision_indices_.begin(), vision_indices_.end()) != vision_indices_.end()) {
        throw InvalidArgument("duplicate vision state index");
    }
    for (auto i : vision_indices_) {
        if (i >= variables_.size()) throw InvalidArgument("vision state index out of range");
    }
    size_ = 1;
    num_vision_classes_ = 1;
    num_nonvision_ = 1;
    std::vector<bool> is_vision(variables_.size(), false);
    for (auto i : vision_indices_) is_vision[i] = true;
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto n = variables_[i].values.size();
        if (n == 0) throw InvalidArgument("state variable '" + variables_[i].name + "' has no values");
        size_ *= n;
        (is_vision[i] ? num_vision_classes_ : num_nonvision_) *= n;
    }

    vision_class_.resize(size_);
    nonvision_.resize(size_);
    compose_.assign(num_vision_classes_ * num_nonvision_, 0);
    states_of_class_.assign(num_vision_classes_, {});
    for (StateIndex s = 0; s < size_; ++s) {
        const auto values = decode(s);
        std::size_t v = 0, nv = 0;
        for (std::size_t i = 0; i < variables_.size(); ++i) {
            const auto n = variables_[i].values.size();
            if (is_vision[i]) {
                v = v * n + values[i];
            } else {
                nv = nv * n + values[i];
            }
        }
        vision_class_[s] = v;
        nonvision_[s] = nv;
        compose_[v * num_nonvision_ + nv] = s;
        states_of_class_[v].push_back(s);
    }
}

std::vector<std::size_t> StateSpace::decode(StateIndex s) const {
    std::vector<std::size_t> values(variables_.size());
    for (std::size_t i = variables_.size(); i-- > 0;) {
        const auto n = variables_[i].values.size();
        values[i] = s % n;
        s /= n;
    }
    return values;
}

StateIndex StateSpace::encode(std::span<const std::size_t> values) const {
    if (values.size() != variables_.size()) throw InvalidArgument("encode: wrong number of values");
    StateIndex s = 0;
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        const auto n = variables_[i].values.size();
        if (values[i] >= n) throw InvalidArgument("encode: value out of range for " + variables_[i].name);
        s = s * n + values[i];
    }
    return s;
}

VPomdpModel::VPomdpModel(ModelData data)
    : data_(std::move(data)), space_(data_.state_vars, data_.vision_state_indices) {
    const std::size_t n = space_.size();
    const std::size_t na = data_.actions.size();
    if (na == 0) throw InvalidArgument("model has no actions");
    if (!(data_.discount > 0.0 && data_.discount < 1.0)) throw InvalidArgument("discount must lie in (0,1)");

    if (data_.transition.size() != na) throw InvalidArgument("transition: expected one table per action");
    transition_.assign(na * n * n, 0.0);
    successor_ranges_.resize(na * n);
    for (ActionIndex a = 0; a < na; ++a) {
        if (data_.transition[a].size() != n) throw InvalidArgument("transition: wrong number of rows");
        for (StateIndex s = 0; s < n; ++s) {
            if (data_.transition[a][s].size() != n) throw InvalidArgument("transition: wrong row length");
            const auto row = checked_simplex(data_.transition[a][s], kLoadTolerance,
                                             ("transition row a=" + std::to_string(a) + " s=" + std::to_string(s)).c_str());
            data_.transition[a][s] = row;
            const std::size_t begin = successors_.size();
            for (StateIndex t = 0; t < n; ++t) {
                transition_[(a * n + s) * n + t] = row[t];
                if (row[t] > 0.0) successors_.push_back({t, row[t]});
            }
            successor_ranges_[a * n + s] = {begin, successors_.size() - begin};
        }
    }

    if (data_.reward.size() != n) throw InvalidArgument("reward: wrong number of rows");
    reward_.resize(n * na);
    reward_min_ = std::numeric_limits<double>::infinity();
    reward_max_ = -std::numeric_limits<double>::infinity();
    for (StateIndex s = 0; s < n; ++s) {
        if (data_.reward[s].size() != na) throw InvalidArgument("reward: wrong row length");
        for (ActionIndex a = 0; a < na; ++a) {
            const double r = data_.reward[s][a];
            if (!std::isfinite(r)) throw InvalidArgument("reward: non-finite entry");
            reward_[s * na + a] = r;
            reward_min_ = std::min(reward_min_, r);
            reward_max_ = std::max(reward_max_, r);
        }
    }

    if (data_.initial_belief.size() != n) throw InvalidArgument("initial_belief: wrong length");
    initial_belief_ = Belief::from_dense(data_.initial_belief);
    data_.initial_belief = initial_belief_.dense(n);

    if (!data_.nonvision_obs_fn.empty()) {
        const std::size_t nz = data_.nonvision_obs.size();
        if (nz == 0) throw InvalidArgument("nonvision_obs: empty observation set");
        if (data_.nonvision_obs_fn.size() != n) throw InvalidArgument("nonvision_obs: wrong number of rows");
        nonvision_obs_.resize(n * nz);
        for (StateIndex s = 0; s < n; ++s) {
            if (data_.nonvision_obs_fn[s].size() != nz) throw InvalidArgument("nonvision_obs: wrong row length");
            const auto row = checked_simplex(data_.nonvision_obs_fn[s], kLoadTolerance, "nonvision_obs row");
            data_.nonvision_obs_fn[s] = row;
            std::copy(row.begin(), row.end(), nonvision_obs_.begin() + static_cast<std::ptrdiff_t>(s * nz));
        }
    }

    if (!data_.terminal.empty()) {
        if (data_.terminal.size() != n) throw InvalidArgument("terminal: wrong length");
        terminal_ = data_.terminal;
        for (StateIndex s = 0; s < n; ++s) {
            if (!terminal_[s]) continue;
            for (ActionIndex a = 0; a < na; ++a) {
                if (transition(s, a, s) != 1.0 || reward(s, a) != 0.0) {
                    throw InvalidArgument("terminal state " + std::to_string(s) + " must be absorbing with zero reward");
                }
            }
        }
    }
}

void VPomdpModel::check_action(ActionIndex a) const {
    if (a >= num_actions()) throw InvalidArgument("unknown action " + std::to_string(a));
}

std::vector<double> propagate(const VPomdpModel& model, const Belief& b, ActionIndex a) {
    model.check_action(a);
    std::vector<double> out(model.num_states(), 0.0);
    for (const auto& e : b.entries()) {
        for (const auto& succ : model.successors(e.state, a)) out[succ.next] += e.prob * succ.prob;
    }
    return out;
}

Belief standard_belief_update(const VPomdpModel& model, const Belief& b, ActionIndex a,
                              std::span<const double> obs_prob) {
    if (obs_prob.size() != model.num_states()) throw InvalidArgument("obs_prob: wrong length");
    for (double p : obs_prob) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("obs_prob: entries must lie in [0,1]");
    }
    auto weights = propagate(model, b, a);
    for (StateIndex s = 0; s < weights.size(); ++s) weights[s] *= obs_prob[s];
    return Belief::normalized(weights);
}

double QTable::value(StateIndex s) const {
    double best = -std::numeric_limits<double>::infinity();
    for (ActionIndex a = 0; a < num_actions_; ++a) best = std::max(best, q(s, a));
    return best;
}

ActionIndex QTable::best_action(StateIndex s) const {
    ActionIndex best = 0;
    for (ActionIndex a = 1; a < num_actions_; ++a) {
        if (q(s, a) > q(s, best)) best = a;
    }
    return best;
}

std::vector<double> QTable::values() const {
    std::vector<double> v(num_states_);
    for (StateIndex s = 0; s < num_states_; ++s) v[s] = value(s);
    return v;
}

QTable mdp_value_iteration(const VPomdpModel& model, double tol) {
    if (!(tol > 0.0)) throw InvalidArgument("mdp_value_iteration: tol must be positive");
    const std::size_t n = model.num_states();
    const std::size_t na = model.num_actions();
    const double gamma = model.discount();
    std::vector<double> v(n, model.reward_min() / (1.0 - gamma));
    std::vector<double> q(n * na, 0.0);
    std::size_t sweeps = 0;
    double residual = 0.0;
    do {
        residual = 0.0;
        std::vector<double> next_v(n);
        for (StateIndex s = 0; s < n; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (ActionIndex a = 0; a < na; ++a) {
                double future = 0.0;
                for (const auto& succ : model.successors(s, a)) future += succ.prob * v[succ.next];
                const double value = model.reward(s, a) + gamma * future;
                q[s * na + a] = value;
                best = std::max(best, value);
            }
            next_v[s] = best;
            residual = std::max(residual, std::abs(best - v[s]));
        }
        v = std::move(next_v);
        ++sweeps;
    } while (residual > tol);
    QTable table(n, na, std::move(q));
    table.sweeps = sweeps;
    table.residual = residual;
    return table;
}

}  // namespace pbp
