#include "pbp/pbp_update.hpp"

#include "pbp/errors.hpp"

namespace pbp {

namespace {

void check_inputs(const VPomdpModel& model, std::span<const double> perc_dist, std::optional<std::size_t> z_nv) {
    if (perc_dist.size() != model.states().num_vision_classes()) {
        throw InvalidArgument("perception distribution has wrong number of vision classes");
    }
    if (z_nv && *z_nv >= model.num_nonvision_obs()) throw InvalidArgument("unknown non-vision observation");
}

}  // namespace

std::vector<Belief::Entry> support_of(std::span<const double> dense) {
    std::vector<Belief::Entry> out;
    for (StateIndex s = 0; s < dense.size(); ++s) {
        if (dense[s] > 0.0) out.push_back({s, dense[s]});
    }
    return out;
}

UpdateResult pbp_update_predicted(const VPomdpModel& model, std::span<const Belief::Entry> predicted,
                                  std::span<const double> perc_dist, std::optional<std::size_t> z_nv) {
    check_inputs(model, perc_dist, z_nv);
    const auto& space = model.states();
    std::vector<Belief::Entry> weighted;
    weighted.reserve(predicted.size());
    double total = 0.0;
    for (const auto& e : predicted) {
        double f = perc_dist[space.vision_class(e.state)];
        if (f < kPerceptionFloor) continue;
        if (z_nv) f *= model.nonvision_obs_prob(e.state, *z_nv);
        const double w = f * e.prob;
        if (w > 0.0) {
            weighted.push_back({e.state, w});
            total += w;
        }
    }
    if (!(total > 0.0)) return {Belief::uniform(model.num_states()), true};
    for (auto& e : weighted) e.prob /= total;
    return {Belief::from_sorted_entries(std::move(weighted)), false};
}

UpdateResult pbp_update(const VPomdpModel& model, const Belief& b, ActionIndex a,
                        std::span<const double> perc_dist, std::optional<std::size_t> z_nv) {
    const auto predicted = propagate(model, b, a);
    return pbp_update_predicted(model, support_of(predicted), perc_dist, z_nv);
}

std::vector<double> lift_to_states(const StateSpace& space, std::span<const double> dist_v) {
    if (dist_v.size() != space.num_vision_classes()) throw InvalidArgument("lift_to_states: wrong class count");
    std::vector<double> out(space.size());
    for (StateIndex s = 0; s < out.size(); ++s) out[s] = dist_v[space.vision_class(s)];
    return out;
}

std::vector<double> multiplicative_pool(std::span<const double> d1, std::span<const double> d2) {
    if (d1.size() != d2.size()) throw InvalidArgument("multiplicative_pool: size mismatch");
    std::vector<double> out(d1.size());
    double total = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = d1[i] * d2[i];
        total += out[i];
    }
    if (!(total > 0.0)) throw EmptyBeliefError("multiplicative_pool: product has no mass");
    for (auto& p : out) p /= total;
    return out;
}

UpdateResult uncertainty_aware_update(const VPomdpModel& model, const Belief& b, ActionIndex a,
                                      const PerceptionOutput& out, std::optional<std::size_t> z_nv,
                                      const UqConfig& cfg) {
    const auto dist = effective_distribution(out, cfg);
    return pbp_update(model, b, a, dist, z_nv);
}

UpdateResult psrl_update_predicted(const VPomdpModel& model, std::span<const Belief::Entry> predicted,
                                   std::span<const double> perc_dist, std::optional<std::size_t> z_nv) {
    check_inputs(model, perc_dist, z_nv);
    const auto& space = model.states();
    std::vector<double> marginal(space.num_nonvision_components(), 0.0);
    double marginal_total = 0.0;
    for (const auto& e : predicted) {
        const double w = (z_nv ? model.nonvision_obs_prob(e.state, *z_nv) : 1.0) * e.prob;
        marginal[space.nonvision_component(e.state)] += w;
        marginal_total += w;
    }
    if (!(marginal_total > 0.0)) return {Belief::uniform(model.num_states()), true};
    std::vector<double> weights(model.num_states(), 0.0);
    for (StateIndex s = 0; s < weights.size(); ++s) {
        const double f = perc_dist[space.vision_class(s)];
        if (f < kPerceptionFloor) continue;
        weights[s] = f * marginal[space.nonvision_component(s)];
    }
    try {
        return {Belief::normalized(weights), false};
    } catch (const EmptyBeliefError&) {
        return {Belief::uniform(model.num_states()), true};
    }
}

UpdateResult psrl_update(const VPomdpModel& model, const Belief& b, ActionIndex a,
                         std::span<const double> perc_dist, std::optional<std::size_t> z_nv) {
    const auto predicted = propagate(model, b, a);
    return psrl_update_predicted(model, support_of(predicted), perc_dist, z_nv);
}

}  // namespace pbp
