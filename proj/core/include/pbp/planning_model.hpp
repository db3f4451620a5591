#pragma once

#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <vector>

#include "pbp/model.hpp"
#include "pbp/pbp_update.hpp"
#include "pbp/perception.hpp"

namespace pbp {

/// Empirical vision observation function: for each vision class, the relative
/// frequency of every observation labelled with it.
struct EstimatedVisionObs {
    std::size_t num_classes = 0;
    /// Distinct observations in order of first appearance in the dataset.
    std::vector<ObsId> observations;
    /// rows[c] = (index into `observations`, probability), ascending index.
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;

    double prob(std::size_t obs_index, std::size_t vision_class) const;
};

/// Count-ratio estimate; throws CoverageError naming the first class without examples.
EstimatedVisionObs estimate_vision_obs_fn(const VisionDataset& d_plan, std::size_t num_classes);

/// Fully specified POMDP whose observations are (vision observation, non-vision
/// observation) pairs with O(z | s) = Ô_v(z_v | s_v) * O_nv(z_nv | s).
class PlanningModel {
public:
    PlanningModel(std::shared_ptr<const VPomdpModel> model, EstimatedVisionObs vision);

    const VPomdpModel& model() const noexcept { return *model_; }
    std::shared_ptr<const VPomdpModel> model_ptr() const noexcept { return model_; }
    const EstimatedVisionObs& vision() const noexcept { return vision_; }

    std::size_t num_vision_obs() const noexcept { return vision_.observations.size(); }
    std::size_t num_observations() const noexcept { return num_vision_obs() * model_->num_nonvision_obs(); }
    std::size_t observation_index(std::size_t vision_obs, std::size_t z_nv) const {
        return vision_obs * model_->num_nonvision_obs() + z_nv;
    }
    std::size_t vision_part(std::size_t obs) const { return obs / model_->num_nonvision_obs(); }
    std::size_t nonvision_part(std::size_t obs) const { return obs % model_->num_nonvision_obs(); }
    ObsId vision_obs_id(std::size_t vision_obs) const { return vision_.observations[vision_obs]; }

    double obs_prob(std::size_t obs, StateIndex s) const;
    /// Classes that can emit a vision observation, with Ô_v(z_v | class).
    std::span<const std::pair<std::size_t, double>> classes_of(std::size_t vision_obs) const {
        return classes_of_[vision_obs];
    }
    /// True when each vision observation is emitted by exactly one class.
    bool block_structured() const noexcept { return block_; }

private:
    std::shared_ptr<const VPomdpModel> model_;
    EstimatedVisionObs vision_;
    std::vector<std::vector<std::pair<std::size_t, double>>> classes_of_;
    bool block_ = true;
};

PlanningModel build_planning_model(std::shared_ptr<const VPomdpModel> model, const EstimatedVisionObs& est);

/// Planning model serialized as the model document plus an observation manifest.
nlohmann::json planning_model_to_json(const PlanningModel& pm, const PerceptionTable& table);

enum class UpdateRule {
    pbp,       ///< perception-based update with the stored distributions
    psrl,      ///< perception output taken as the vision marginal
    standard,  ///< Bayes update under the planning model's own O
};

/// What a planner feeds into its belief update for each planning observation.
struct PlannerEvidence {
    UpdateRule rule = UpdateRule::pbp;
    /// Distribution over vision classes per vision observation of the planning model.
    std::vector<Distribution> per_vision_obs;
};

PlannerEvidence table_evidence(const PlanningModel& pm, const PerceptionTable& table, const UqConfig& uq,
                               UpdateRule rule = UpdateRule::pbp);
/// Point mass on each observation's dataset label.
PlannerEvidence oracle_evidence(const PlanningModel& pm, const PerceptionTable& table);
PlannerEvidence uniform_evidence(const PlanningModel& pm);
/// Exact Pr(s_v | z_v) under a uniform prior over vision classes.
PlannerEvidence posterior_evidence(const PlanningModel& pm);
PlannerEvidence standard_evidence(const PlanningModel& pm);

struct ObservationBranch {
    std::size_t obs;
    double prob;
};

/// Belief transitions on a planning model. Not thread-safe: holds scratch buffers.
class BeliefStepper {
public:
    BeliefStepper(const PlanningModel& pm, const PlannerEvidence& evidence);

    const PlanningModel& planning_model() const noexcept { return *pm_; }
    const PlannerEvidence& evidence() const noexcept { return *evidence_; }

    /// Support of Pr(s' | b, a), ascending.
    std::vector<Belief::Entry> predict(const Belief& b, ActionIndex a) const;

    /// Observations with Pr(z | b, a) > 0 under the planning model, ascending.
    std::vector<ObservationBranch> branches(std::span<const Belief::Entry> predicted) const;

    /// Successor belief under the evidence's update rule.
    UpdateResult next(std::span<const Belief::Entry> predicted, std::size_t obs) const;

    /// Unnormalized successor weights aligned with `predicted`, for rules whose
    /// successor support lies inside the predicted support (pbp, standard).
    /// Returns false for psrl. Normalizing `out` gives next(...).belief unless
    /// every weight is zero.
    bool successor_weights(std::span<const Belief::Entry> predicted, std::size_t obs, std::span<double> out) const;

    /// Bayes posterior under the planning model (no fallback; requires Pr(z) > 0).
    Belief standard_next(std::span<const Belief::Entry> predicted, std::size_t obs) const;

    /// Distinct standard posteriors with their probabilities. Observations that
    /// induce the same posterior (same class and non-vision reading in a block
    /// model) are merged.
    std::vector<std::pair<double, Belief>> standard_children(std::span<const Belief::Entry> predicted) const;

private:
    const PlanningModel* pm_;
    const PlannerEvidence* evidence_;
    mutable std::vector<double> scratch_;
    mutable std::vector<std::size_t> touched_;
    mutable std::vector<double> obs_scratch_;
    mutable std::vector<std::size_t> obs_touched_;
};

}  // namespace pbp
