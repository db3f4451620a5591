#include "pbp/pomcp.hpp"

#include <algorithm>
#include <cmath>

#include "pbp/errors.hpp"

namespace pbp {

ParticleSet::ParticleSet(std::vector<StateIndex> particles, std::size_t invigorated)
    : particles_(std::move(particles)), invigorated_(invigorated) {
    if (invigorated_ > particles_.size()) throw InvalidArgument("more invigorated particles than particles");
}

ParticleSet ParticleSet::sample(const Belief& b, std::size_t k, Rng& rng) {
    std::vector<double> w;
    w.reserve(b.support_size());
    for (const auto& e : b.entries()) w.push_back(e.prob);
    std::vector<StateIndex> out(k);
    for (auto& s : out) s = b.entries()[sample_index(w, rng)].state;
    return ParticleSet(std::move(out));
}

std::vector<double> ParticleSet::distribution(std::size_t num_states, bool exclude_invigorated) const {
    std::vector<double> d(num_states, 0.0);
    const std::size_t n = exclude_invigorated ? particles_.size() - invigorated_ : particles_.size();
    if (n == 0) return d;
    for (std::size_t i = 0; i < n; ++i) d.at(particles_[i]) += 1.0;
    for (auto& x : d) x /= static_cast<double>(n);
    return d;
}

std::size_t invigoration_count(std::size_t k, double rate) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("invigoration rate must lie in [0,1]");
    // The small offset keeps exact products such as 0.05 * 1000 from rounding up.
    return std::min(k, static_cast<std::size_t>(std::ceil(rate * static_cast<double>(k) - 1e-9)));
}

FilterResult particle_filter_update(const VPomdpModel& model, const ParticleSet& ps, ActionIndex a,
                                    std::span<const double> perc_dist, std::optional<std::size_t> z_nv,
                                    const ParticleFilterConfig& cfg, Rng& rng) {
    if (ps.empty()) throw InvalidArgument("particle set is empty");
    model.check_action(a);
    const auto& space = model.states();
    if (perc_dist.size() != space.num_vision_classes()) throw InvalidArgument("perception distribution has wrong size");
    if (z_nv && *z_nv >= model.num_nonvision_obs()) throw InvalidArgument("unknown non-vision observation");
    const std::size_t k = cfg.particles;
    const std::size_t n = model.num_states();
    const auto particles = ps.particles();

    std::vector<double> weights;
    std::vector<StateIndex> accepted;
    accepted.reserve(k);
    std::size_t tries = 0;
    while (accepted.size() < k && tries < cfg.max_tries) {
        ++tries;
        const StateIndex x = particles[uniform_index(particles.size(), rng)];
        const auto succ = model.successors(x, a);
        weights.clear();
        for (const auto& sc : succ) weights.push_back(sc.prob);
        const StateIndex next = succ[sample_index(weights, rng)].next;
        double accept = perc_dist[space.vision_class(next)];
        if (accept < kPerceptionFloor) accept = 0.0;
        if (z_nv) accept *= model.nonvision_obs_prob(next, *z_nv);
        if (uniform01(rng) < accept) accepted.push_back(next);
    }
    FilterResult result;
    result.acceptance_rate = static_cast<double>(accepted.size()) / static_cast<double>(tries);
    if (accepted.size() < k) {
        std::vector<StateIndex> uniform(k);
        for (auto& s : uniform) s = uniform_index(n, rng);
        result.particles = ParticleSet(std::move(uniform), k);
        result.fallback = true;
        return result;
    }
    const std::size_t m = invigoration_count(k, cfg.invigoration);
    for (std::size_t i = k - m; i < k; ++i) accepted[i] = uniform_index(n, rng);
    result.particles = ParticleSet(std::move(accepted), m);
    return result;
}

std::vector<double> sis_reweight(const VPomdpModel& model, std::span<const StateIndex> particles,
                                 std::span<const double> weights, std::span<const double> perc_dist,
                                 std::optional<std::size_t> z_nv) {
    if (particles.size() != weights.size()) throw InvalidArgument("one weight per particle required");
    const auto& space = model.states();
    std::vector<double> out(particles.size());
    double total = 0.0;
    for (std::size_t i = 0; i < particles.size(); ++i) {
        double f = perc_dist[space.vision_class(particles[i])];
        if (f < kPerceptionFloor) f = 0.0;
        if (z_nv) f *= model.nonvision_obs_prob(particles[i], *z_nv);
        out[i] = weights[i] * f;
        total += out[i];
    }
    if (total > 0.0) {
        for (auto& w : out) w /= total;
    }
    return out;
}

PomcpPlanner::PomcpPlanner(const PlanningModel& pm, const PlannerEvidence& evidence, QTable mdp_q, PomcpConfig cfg)
    : pm_(&pm), evidence_(&evidence), q_(std::move(mdp_q)), cfg_(cfg) {
    const auto& m = pm.model();
    if (q_.num_states() != m.num_states() || q_.num_actions() != m.num_actions()) {
        throw InvalidArgument("Q-table does not match the model");
    }
    if (evidence.per_vision_obs.size() != pm.num_vision_obs()) throw InvalidArgument("evidence does not match model");
    c_ucb_ = cfg_.c_ucb >= 0.0 ? cfg_.c_ucb : (m.reward_max() - m.reward_min()) / (1.0 - m.discount());
    bucket_of_vision_.resize(pm.num_vision_obs());
    for (std::size_t v = 0; v < pm.num_vision_obs(); ++v) bucket_of_vision_[v] = argmax(evidence.per_vision_obs[v]);
}

double PomcpPlanner::rollout(StateIndex s, std::size_t steps, Rng& rng) const {
    const auto& m = pm_->model();
    const auto& space = m.states();
    const auto& vision = pm_->vision();
    std::vector<double> w;
    double total = 0.0;
    double discount = 1.0;
    for (std::size_t t = 0; t < steps && !m.is_terminal(s); ++t) {
        ActionIndex a;
        if (uniform01(rng) < cfg_.random_rollout_prob) {
            a = uniform_index(m.num_actions(), rng);
        } else {
            // Imagine a vision observation for s, read it through the evidence and
            // act MDP-optimally for the perceived state.
            const auto& row = vision.rows[space.vision_class(s)];
            w.clear();
            for (const auto& [v, p] : row) w.push_back(p);
            const std::size_t v = row[sample_index(w, rng)].first;
            const std::size_t perceived = sample_index(evidence_->per_vision_obs[v], rng);
            a = q_.best_action(space.compose(perceived, space.nonvision_component(s)));
        }
        total += discount * m.reward(s, a);
        discount *= m.discount();
        const auto succ = m.successors(s, a);
        w.clear();
        for (const auto& sc : succ) w.push_back(sc.prob);
        s = succ[sample_index(w, rng)].next;
    }
    return total;
}

ActionIndex PomcpPlanner::ucb_action(const HistoryNode& node) const {
    ActionIndex best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    const double log_n = std::log(static_cast<double>(std::max<std::size_t>(node.visits, 1)));
    for (ActionIndex a = 0; a < node.actions.size(); ++a) {
        const auto& an = node.actions[a];
        if (an.visits == 0) return a;
        const double score = an.q + c_ucb_ * std::sqrt(log_n / static_cast<double>(an.visits));
        if (score > best_score) {
            best_score = score;
            best = a;
        }
    }
    return best;
}

std::size_t PomcpPlanner::child_node(std::size_t node, ActionIndex a, std::size_t bucket) {
    auto& children = tree_[node].actions[a].children;
    for (const auto& [b, id] : children) {
        if (b == bucket) return id;
    }
    tree_.push_back(HistoryNode{0, std::vector<ActionNode>(pm_->model().num_actions())});
    tree_[node].actions[a].children.emplace_back(bucket, tree_.size() - 1);
    return tree_.size() - 1;
}

double PomcpPlanner::simulate(StateIndex s, std::size_t node, std::size_t depth, Rng& rng) {
    const auto& m = pm_->model();
    if (depth >= cfg_.max_depth || m.is_terminal(s)) return 0.0;
    if (tree_[node].visits == 0) {
        ++tree_[node].visits;
        return rollout(s, cfg_.max_depth - depth, rng);
    }
    const ActionIndex a = ucb_action(tree_[node]);
    const auto succ = m.successors(s, a);
    std::vector<double> w;
    w.reserve(succ.size());
    for (const auto& sc : succ) w.push_back(sc.prob);
    const StateIndex next = succ[sample_index(w, rng)].next;

    const auto& space = m.states();
    const auto& row = pm_->vision().rows[space.vision_class(next)];
    w.clear();
    for (const auto& [v, p] : row) w.push_back(p);
    const std::size_t v = row[sample_index(w, rng)].first;
    std::size_t znv = 0;
    if (!m.pure_vision()) {
        w.assign(m.num_nonvision_obs(), 0.0);
        for (std::size_t z = 0; z < w.size(); ++z) w[z] = m.nonvision_obs_prob(next, z);
        znv = sample_index(w, rng);
    }
    const std::size_t bucket = bucket_of_vision_[v] * m.num_nonvision_obs() + znv;
    const std::size_t child = child_node(node, a, bucket);
    const double ret = m.reward(s, a) + m.discount() * simulate(next, child, depth + 1, rng);

    auto& hn = tree_[node];
    ++hn.visits;
    auto& an = hn.actions[a];
    ++an.visits;
    an.q += (ret - an.q) / static_cast<double>(an.visits);
    return ret;
}

ActionIndex PomcpPlanner::plan_action(const ParticleSet& root, Rng& rng) {
    if (root.empty()) throw InvalidArgument("cannot plan from an empty particle set");
    const std::size_t na = pm_->model().num_actions();
    tree_.clear();
    tree_.push_back(HistoryNode{0, std::vector<ActionNode>(na)});
    if (cfg_.simulations == 0) {
        root_stats_.assign(na, {0, 0.0});
        return uniform_index(na, rng);
    }
    // The root is expanded up front so every simulation descends through UCB1.
    tree_[0].visits = 1;
    const auto particles = root.particles();
    for (std::size_t i = 0; i < cfg_.simulations; ++i) {
        simulate(particles[uniform_index(particles.size(), rng)], 0, 0, rng);
    }
    root_stats_.clear();
    ActionIndex best = 0;
    for (ActionIndex a = 0; a < na; ++a) {
        const auto& an = tree_[0].actions[a];
        root_stats_.emplace_back(an.visits, an.q);
        if (an.visits > 0 && (tree_[0].actions[best].visits == 0 || an.q > tree_[0].actions[best].q)) best = a;
    }
    return best;
}

}  // namespace pbp
