#include <doctest.h>

#include "pbp/errors.hpp"
#include "pbp/planning_model.hpp"
#include "test_models.hpp"

using namespace pbp;

namespace {

// Two-class table: ids 0..3, labels 0,0,1,1.
PerceptionTable small_table() {
    PerceptionTable t(2);
    t.add("a", {{0.9, 0.1}, 0.05}, 0);
    t.add("b", {{0.6, 0.4}, 0.5}, 0);
    t.add("c", {{0.2, 0.8}, 0.2}, 1);
    t.add("d", {{0.0, 1.0}, 0.0}, 1);
    return t;
}

}  // namespace

TEST_CASE("count-ratio estimate of the vision observation function") {
    VisionDataset d(Split::plan);
    for (auto [id, c] : std::vector<std::pair<ObsId, std::size_t>>{{1, 0}, {0, 0}, {0, 0}, {2, 1}, {3, 1}, {3, 1}, {3, 1}}) {
        d.add(id, c);
    }
    const auto est = estimate_vision_obs_fn(d, 2);
    CHECK(est.observations == std::vector<ObsId>{1, 0, 2, 3});
    CHECK(est.prob(0, 0) == 1.0 / 3.0);
    CHECK(est.prob(1, 0) == 2.0 / 3.0);
    CHECK(est.prob(2, 1) == 0.25);
    CHECK(est.prob(3, 1) == 0.75);
    CHECK(est.prob(3, 0) == 0.0);
}

TEST_CASE("uncovered class is reported by index") {
    VisionDataset d(Split::plan);
    d.add(0, 0);
    d.add(1, 2);
    try {
        estimate_vision_obs_fn(d, 3);
        FAIL("expected CoverageError");
    } catch (const CoverageError& e) {
        CHECK(e.vision_class() == 1);
    }
}

TEST_CASE("planning model observation function factors into vision and non-vision parts") {
    const auto m = testing::tiger_model();
    VisionDataset d(Split::plan);
    d.add(0, 0);
    d.add(1, 0);
    d.add(2, 1);
    d.add(0, 0);
    const PlanningModel pm(m, estimate_vision_obs_fn(d, 2));
    CHECK(pm.num_vision_obs() == 3);
    CHECK(pm.num_observations() == 6);
    CHECK(pm.block_structured());
    for (StateIndex s = 0; s < 4; ++s) {
        double total = 0.0;
        for (std::size_t z = 0; z < pm.num_observations(); ++z) total += pm.obs_prob(z, s);
        CHECK(total == doctest::Approx(1.0));
    }
    // State 1 = (left, on): Ô(id0 | left) = 2/3, O_nv(bright | on) = 0.8.
    CHECK(pm.obs_prob(pm.observation_index(0, 1), 1) == doctest::Approx(2.0 / 3.0 * 0.8));
    CHECK(pm.obs_prob(pm.observation_index(2, 0), 1) == 0.0);

    const auto doc = planning_model_to_json(pm, small_table());
    CHECK(doc.at("observation_manifest").at("observation_count") == 6);
    CHECK(doc.at("observation_manifest").at("vision_observations")[1] == "b");
}

TEST_CASE("shared observations break the block structure") {
    // Datasets give each ID a single label, so this needs a hand-built estimate.
    const auto m = testing::tiger_model();
    EstimatedVisionObs est;
    est.num_classes = 2;
    est.observations = {0, 1};
    est.rows = {{{0, 0.5}, {1, 0.5}}, {{0, 1.0}}};
    const PlanningModel pm(m, est);
    CHECK_FALSE(pm.block_structured());
    CHECK(pm.classes_of(0).size() == 2);
}

TEST_CASE("evidence builders") {
    const auto m = testing::tiger_model();
    VisionDataset d(Split::plan);
    d.add(0, 0);
    d.add(1, 0);
    d.add(2, 1);
    d.add(3, 1);
    const PlanningModel pm(m, estimate_vision_obs_fn(d, 2));
    const auto t = small_table();
    const auto raw = table_evidence(pm, t, {});
    CHECK(raw.per_vision_obs[1] == std::vector<double>{0.6, 0.4});
    UqConfig tuq{UqMode::tuq, 0.1, UncertaintyFunction::table};
    const auto thr = table_evidence(pm, t, tuq);
    CHECK(thr.per_vision_obs[0] == std::vector<double>{0.9, 0.1});
    CHECK(thr.per_vision_obs[1] == std::vector<double>{0.5, 0.5});
    CHECK(oracle_evidence(pm, t).per_vision_obs[2] == std::vector<double>{0.0, 1.0});
    CHECK(uniform_evidence(pm).per_vision_obs[3] == std::vector<double>{0.5, 0.5});
    const auto post = posterior_evidence(pm);
    CHECK(post.per_vision_obs[0] == std::vector<double>{1.0, 0.0});
    CHECK(standard_evidence(pm).rule == UpdateRule::standard);
}

TEST_CASE("belief stepper agrees with the direct updates") {
    Rng rng(5);
    const auto m = testing::tiger_model();
    VisionDataset d(Split::plan);
    d.add(0, 0);
    d.add(1, 0);
    d.add(1, 0);
    d.add(2, 1);
    d.add(3, 1);
    const PlanningModel pm(m, estimate_vision_obs_fn(d, 2));
    const auto t = small_table();
    const auto ev = table_evidence(pm, t, {});
    const BeliefStepper stepper(pm, ev);
    for (int i = 0; i < 20; ++i) {
        const auto b = testing::random_belief(4, rng, 0.3);
        const ActionIndex a = uniform_index(3, rng);
        const auto pred = stepper.predict(b, a);
        CHECK(pred == support_of(propagate(*m, b, a)));
        double total = 0.0;
        for (const auto& br : stepper.branches(pred)) {
            total += br.prob;
            const auto direct = pbp_update(*m, b, a, ev.per_vision_obs[pm.vision_part(br.obs)], pm.nonvision_part(br.obs));
            const auto got = stepper.next(pred, br.obs);
            CHECK(got.belief == direct.belief);
            std::vector<double> w(pred.size());
            REQUIRE(stepper.successor_weights(pred, br.obs, w));
            if (!got.fallback) {
                // Weights are aligned with `pred`; scatter them onto the state axis.
                std::vector<double> dense(4, 0.0);
                for (std::size_t j = 0; j < pred.size(); ++j) dense[pred[j].state] = w[j];
                CHECK(Belief::normalized(dense) == got.belief);
            }
        }
        CHECK(total == doctest::Approx(1.0));
        double merged = 0.0;
        for (const auto& [p, child] : stepper.standard_children(pred)) merged += p;
        CHECK(merged == doctest::Approx(1.0));
    }
}
