#include "pbp/planning_model.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "pbp/errors.hpp"
#include "pbp/model_io.hpp"

namespace pbp {

double EstimatedVisionObs::prob(std::size_t obs_index, std::size_t vision_class) const {
    const auto& row = rows.at(vision_class);
    auto it = std::lower_bound(row.begin(), row.end(), obs_index,
                               [](const auto& e, std::size_t v) { return e.first < v; });
    return (it != row.end() && it->first == obs_index) ? it->second : 0.0;
}

EstimatedVisionObs estimate_vision_obs_fn(const VisionDataset& d_plan, std::size_t num_classes) {
    EstimatedVisionObs est;
    est.num_classes = num_classes;
    std::unordered_map<ObsId, std::size_t> index;
    std::vector<std::vector<std::size_t>> counts(num_classes);
    std::vector<std::size_t> totals(num_classes, 0);
    for (const auto& [id, label] : d_plan.pairs()) {
        if (label >= num_classes) throw InvalidArgument("dataset label outside the vision classes");
        auto [it, inserted] = index.try_emplace(id, est.observations.size());
        if (inserted) est.observations.push_back(id);
        auto& row = counts[label];
        if (row.size() <= it->second) row.resize(it->second + 1, 0);
        ++row[it->second];
        ++totals[label];
    }
    est.rows.resize(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (totals[c] == 0) {
            throw CoverageError(c, "vision class " + std::to_string(c) + " has no examples in the plan dataset");
        }
        const double total = static_cast<double>(totals[c]);
        for (std::size_t v = 0; v < counts[c].size(); ++v) {
            if (counts[c][v] > 0) est.rows[c].emplace_back(v, static_cast<double>(counts[c][v]) / total);
        }
    }
    return est;
}

PlanningModel::PlanningModel(std::shared_ptr<const VPomdpModel> model, EstimatedVisionObs vision)
    : model_(std::move(model)), vision_(std::move(vision)) {
    if (!model_) throw InvalidArgument("planning model needs a base model");
    if (vision_.num_classes != model_->states().num_vision_classes() || vision_.rows.size() != vision_.num_classes) {
        throw InvalidArgument("vision observation estimate does not match the model's vision classes");
    }
    classes_of_.resize(vision_.observations.size());
    for (std::size_t c = 0; c < vision_.num_classes; ++c) {
        if (vision_.rows[c].empty()) throw CoverageError(c, "vision class " + std::to_string(c) + " is not covered");
        for (const auto& [v, p] : vision_.rows[c]) {
            if (v >= classes_of_.size()) throw InvalidArgument("vision observation index out of range");
            classes_of_[v].emplace_back(c, p);
        }
    }
    for (const auto& cls : classes_of_) block_ = block_ && cls.size() == 1;
}

double PlanningModel::obs_prob(std::size_t obs, StateIndex s) const {
    const std::size_t c = model_->states().vision_class(s);
    return vision_.prob(vision_part(obs), c) * model_->nonvision_obs_prob(s, nonvision_part(obs));
}

PlanningModel build_planning_model(std::shared_ptr<const VPomdpModel> model, const EstimatedVisionObs& est) {
    return PlanningModel(std::move(model), est);
}

nlohmann::json planning_model_to_json(const PlanningModel& pm, const PerceptionTable& table) {
    auto doc = model_to_json(pm.model());
    nlohmann::json obs = nlohmann::json::array();
    for (ObsId id : pm.vision().observations) obs.push_back(table.name(id));
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : pm.vision().rows) {
        nlohmann::json r = nlohmann::json::array();
        for (const auto& [v, p] : row) r.push_back({{"obs_id", table.name(pm.vision_obs_id(v))}, {"prob", p}});
        rows.push_back(r);
    }
    doc["observation_manifest"] = {
        {"vision_observations", obs},
        {"vision_obs_fn", rows},
        {"observation_count", pm.num_observations()},
        {"order", "vision-major: index = vision_obs * |Z_nv| + z_nv"},
    };
    return doc;
}

PlannerEvidence table_evidence(const PlanningModel& pm, const PerceptionTable& table, const UqConfig& uq,
                               UpdateRule rule) {
    PlannerEvidence ev;
    ev.rule = rule;
    ev.per_vision_obs.reserve(pm.num_vision_obs());
    for (ObsId id : pm.vision().observations) ev.per_vision_obs.push_back(effective_distribution(table.predict(id), uq));
    return ev;
}

PlannerEvidence oracle_evidence(const PlanningModel& pm, const PerceptionTable& table) {
    PlannerEvidence ev;
    const std::size_t k = pm.vision().num_classes;
    for (ObsId id : pm.vision().observations) {
        Distribution d(k, 0.0);
        d[table.label(id)] = 1.0;
        ev.per_vision_obs.push_back(std::move(d));
    }
    return ev;
}

PlannerEvidence uniform_evidence(const PlanningModel& pm) {
    PlannerEvidence ev;
    ev.per_vision_obs.assign(pm.num_vision_obs(), uniform_distribution(pm.vision().num_classes));
    return ev;
}

PlannerEvidence posterior_evidence(const PlanningModel& pm) {
    PlannerEvidence ev;
    const std::size_t k = pm.vision().num_classes;
    for (std::size_t v = 0; v < pm.num_vision_obs(); ++v) {
        Distribution d(k, 0.0);
        double total = 0.0;
        for (const auto& [c, p] : pm.classes_of(v)) {
            d[c] = p;
            total += p;
        }
        for (auto& x : d) x /= total;
        ev.per_vision_obs.push_back(std::move(d));
    }
    return ev;
}

PlannerEvidence standard_evidence(const PlanningModel& pm) {
    PlannerEvidence ev = posterior_evidence(pm);
    ev.rule = UpdateRule::standard;
    return ev;
}

BeliefStepper::BeliefStepper(const PlanningModel& pm, const PlannerEvidence& evidence)
    : pm_(&pm),
      evidence_(&evidence),
      scratch_(pm.model().num_states(), 0.0),
      obs_scratch_(pm.num_observations(), 0.0) {
    if (evidence.per_vision_obs.size() != pm.num_vision_obs()) {
        throw InvalidArgument("planner evidence does not cover the planning model's vision observations");
    }
    for (const auto& d : evidence.per_vision_obs) {
        if (d.size() != pm.vision().num_classes) throw InvalidArgument("planner evidence has wrong class count");
    }
}

std::vector<Belief::Entry> BeliefStepper::predict(const Belief& b, ActionIndex a) const {
    const auto& m = pm_->model();
    touched_.clear();
    for (const auto& e : b.entries()) {
        for (const auto& succ : m.successors(e.state, a)) {
            if (scratch_[succ.next] == 0.0) touched_.push_back(succ.next);
            scratch_[succ.next] += e.prob * succ.prob;
        }
    }
    std::sort(touched_.begin(), touched_.end());
    std::vector<Belief::Entry> out;
    out.reserve(touched_.size());
    for (auto s : touched_) {
        if (scratch_[s] > 0.0) out.push_back({s, scratch_[s]});
        scratch_[s] = 0.0;
    }
    return out;
}

std::vector<ObservationBranch> BeliefStepper::branches(std::span<const Belief::Entry> predicted) const {
    const auto& m = pm_->model();
    const auto& space = m.states();
    const std::size_t nz = m.num_nonvision_obs();
    obs_touched_.clear();
    for (const auto& e : predicted) {
        const std::size_t c = space.vision_class(e.state);
        for (std::size_t znv = 0; znv < nz; ++znv) {
            const double onv = m.nonvision_obs_prob(e.state, znv);
            if (onv == 0.0) continue;
            for (const auto& [v, p] : pm_->vision().rows[c]) {
                const std::size_t z = pm_->observation_index(v, znv);
                if (obs_scratch_[z] == 0.0) obs_touched_.push_back(z);
                obs_scratch_[z] += e.prob * onv * p;
            }
        }
    }
    std::vector<ObservationBranch> out;
    out.reserve(obs_touched_.size());
    for (auto z : obs_touched_) {
        if (obs_scratch_[z] > 0.0) out.push_back({z, obs_scratch_[z]});
        obs_scratch_[z] = 0.0;
    }
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.obs < y.obs; });
    return out;
}

UpdateResult BeliefStepper::next(std::span<const Belief::Entry> predicted, std::size_t obs) const {
    const auto& m = pm_->model();
    const std::optional<std::size_t> z_nv =
        m.pure_vision() ? std::nullopt : std::optional<std::size_t>(pm_->nonvision_part(obs));
    const auto& dist = evidence_->per_vision_obs[pm_->vision_part(obs)];
    switch (evidence_->rule) {
        case UpdateRule::pbp: return pbp_update_predicted(m, predicted, dist, z_nv);
        case UpdateRule::psrl: return psrl_update_predicted(m, predicted, dist, z_nv);
        case UpdateRule::standard: return {standard_next(predicted, obs), false};
    }
    throw ContractError("unknown update rule");
}

bool BeliefStepper::successor_weights(std::span<const Belief::Entry> predicted, std::size_t obs,
                                      std::span<double> out) const {
    const auto& m = pm_->model();
    const auto& space = m.states();
    if (evidence_->rule == UpdateRule::psrl) return false;
    if (evidence_->rule == UpdateRule::standard) {
        for (std::size_t j = 0; j < predicted.size(); ++j) out[j] = pm_->obs_prob(obs, predicted[j].state) * predicted[j].prob;
        return true;
    }
    const auto& dist = evidence_->per_vision_obs[pm_->vision_part(obs)];
    const std::size_t znv = pm_->nonvision_part(obs);
    for (std::size_t j = 0; j < predicted.size(); ++j) {
        const StateIndex s = predicted[j].state;
        double f = dist[space.vision_class(s)];
        if (f < kPerceptionFloor) {
            out[j] = 0.0;
            continue;
        }
        if (!m.pure_vision()) f *= m.nonvision_obs_prob(s, znv);
        out[j] = f * predicted[j].prob;
    }
    return true;
}

Belief BeliefStepper::standard_next(std::span<const Belief::Entry> predicted, std::size_t obs) const {
    std::vector<Belief::Entry> weighted;
    weighted.reserve(predicted.size());
    double total = 0.0;
    for (const auto& e : predicted) {
        const double w = pm_->obs_prob(obs, e.state) * e.prob;
        if (w > 0.0) {
            weighted.push_back({e.state, w});
            total += w;
        }
    }
    if (!(total > 0.0)) throw EmptyBeliefError("observation has zero probability under the planning model");
    for (auto& e : weighted) e.prob /= total;
    return Belief::from_sorted_entries(std::move(weighted));
}

std::vector<std::pair<double, Belief>> BeliefStepper::standard_children(
    std::span<const Belief::Entry> predicted) const {
    std::vector<std::pair<double, Belief>> out;
    const auto& m = pm_->model();
    if (!pm_->block_structured()) {
        for (const auto& br : branches(predicted)) out.emplace_back(br.prob, standard_next(predicted, br.obs));
        return out;
    }
    // In a block model every vision observation pins down the class, so the
    // posterior depends only on (class, z_nv) and the Ô_v factor cancels.
    const auto& space = m.states();
    const std::size_t nz = m.num_nonvision_obs();
    std::map<std::size_t, std::vector<Belief::Entry>> groups;
    for (const auto& e : predicted) {
        const std::size_t c = space.vision_class(e.state);
        for (std::size_t znv = 0; znv < nz; ++znv) {
            const double w = m.nonvision_obs_prob(e.state, znv) * e.prob;
            if (w > 0.0) groups[c * nz + znv].push_back({e.state, w});
        }
    }
    out.reserve(groups.size());
    for (auto& [key, entries] : groups) {
        double total = 0.0;
        for (const auto& e : entries) total += e.prob;
        for (auto& e : entries) e.prob /= total;
        out.emplace_back(total, Belief::from_sorted_entries(std::move(entries)));
    }
    return out;
}

}  // namespace pbp
