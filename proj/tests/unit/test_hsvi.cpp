#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pbp/errors.hpp"
#include "pbp/hsvi.hpp"
#include "test_models.hpp"

using namespace pbp;

namespace {

// One observation ID per class, so the vision channel identifies the class.
PlanningModel identity_planning_model(std::shared_ptr<const VPomdpModel> m) {
    VisionDataset d(Split::plan);
    for (std::size_t c = 0; c < m->states().num_vision_classes(); ++c) d.add(static_cast<ObsId>(c), c);
    return PlanningModel(m, estimate_vision_obs_fn(d, m->states().num_vision_classes()));
}

PlannerEvidence identity_evidence(const PlanningModel& pm) {
    PlannerEvidence ev;
    for (std::size_t v = 0; v < pm.num_vision_obs(); ++v) {
        Distribution d(pm.vision().num_classes, 0.0);
        d[pm.vision_obs_id(v)] = 1.0;
        ev.per_vision_obs.push_back(d);
    }
    return ev;
}

}  // namespace

TEST_CASE("alpha vector set keeps the maximizer and drops dominated vectors") {
    AlphaVectorSet set;
    CHECK_THROWS_AS(set.action(Belief::uniform(2)), ContractError);
    set.add({{1.0, 0.0}, 0});
    set.add({{0.0, 1.0}, 1});
    set.add({{0.4, 0.4}, 2});
    CHECK(set.action(Belief::point_mass(0)) == 0);
    CHECK(set.action(Belief::uniform(2)) == 0);  // tie at 0.5, lowest index
    CHECK(set.value(Belief::uniform(2)) == 0.5);
    CHECK(set.prune_dominated() == 0);
    set.add({{0.5, 0.5}, 2});
    CHECK(set.prune_dominated() == 1);
    CHECK(set.size() == 3);
    set.add({{0.5, 0.5}, 1});
    CHECK(set.prune_dominated() == 1);
    CHECK(set.vectors().back().action == 2);  // earlier duplicate survives

    CHECK_FALSE(set.add_if_improves({{0.2, 0.2}, 0}, Belief::uniform(2)));
    CHECK(set.add_if_improves({{2.0, 2.0}, 1}, Belief::uniform(2)));
    CHECK(set.size() == 1);
}

TEST_CASE("sawtooth interpolation matches a hand computation") {
    SawtoothBound ub({10.0, 4.0, 6.0});
    const auto anchor = Belief::from_dense(std::vector<double>{0.5, 0.5, 0.0});
    // Corner interpolation at the anchor is 7; storing 5 gives delta -2.
    REQUIRE(ub.add(anchor, 5.0));
    CHECK_FALSE(ub.add(anchor, 5.0));
    CHECK(ub.value(anchor) == doctest::Approx(5.0));
    CHECK(ub.value(Belief::point_mass(0)) == 10.0);
    const auto b = Belief::from_dense(std::vector<double>{0.2, 0.6, 0.2});
    // Corners give 2 + 2.4 + 1.2 = 5.6; r = min(0.2/0.5, 0.6/0.5) = 0.4.
    CHECK(ub.value(b) == doctest::Approx(5.6 - 0.8));
    // Anchor support not inside b: no effect.
    const auto c = Belief::from_dense(std::vector<double>{0.0, 0.5, 0.5});
    CHECK(ub.value(c) == doctest::Approx(5.0));
}

TEST_CASE("sawtooth pruning never raises the bound") {
    Rng rng(31);
    const std::size_t n = 6;
    std::vector<double> corners(n);
    for (auto& c : corners) c = 5.0 + uniform01(rng);
    SawtoothBound ub(corners);
    for (int i = 0; i < 200; ++i) {
        const auto b = testing::random_belief(n, rng, 0.4);
        ub.add(b, ub.corner_value(b) - 2.0 * uniform01(rng));
    }
    std::vector<Belief> probes;
    std::vector<double> before;
    for (int i = 0; i < 300; ++i) {
        probes.push_back(testing::random_belief(n, rng, 0.3));
        before.push_back(ub.value(probes.back()));
    }
    const auto removed = ub.prune();
    CHECK(removed > 0);
    for (std::size_t i = 0; i < probes.size(); ++i) CHECK(ub.value(probes[i]) <= before[i] + 1e-12);
}

TEST_CASE("blind policy vectors are fixed points of their action") {
    const auto m = testing::tiger_model();
    const auto set = blind_policy_bound(*m, 1e-12);
    REQUIRE(set.size() >= 1);
    for (const auto& v : set.vectors()) {
        for (StateIndex s = 0; s < m->num_states(); ++s) {
            double next = m->reward(s, v.action);
            for (const auto& succ : m->successors(s, v.action)) next += m->discount() * succ.prob * v.values[succ.next];
            CHECK(next == doctest::Approx(v.values[s]).epsilon(1e-9));
        }
    }
    // Listening forever earns -1 per step.
    CHECK(set.value(m->initial_belief()) >= -1.0 / (1.0 - 0.95) - 1e-6);
}

TEST_CASE("with an identifying channel HSVI recovers the MDP value") {
    const auto m = testing::chain_model();
    const auto pm = identity_planning_model(m);
    HsviConfig cfg;
    cfg.slack = 1e-4;
    cfg.budget.iterations = 500;
    const auto r = solve_hsvi(pm, identity_evidence(pm), cfg);
    CHECK(r.converged);
    const auto q = mdp_value_iteration(*m, 1e-12);
    double expect = -1e300;
    for (ActionIndex a = 0; a < m->num_actions(); ++a) {
        double v = 0.0;
        for (const auto& e : m->initial_belief().entries()) v += e.prob * q.q(e.state, a);
        expect = std::max(expect, v);
    }
    CHECK(r.lower <= expect + 1e-6);
    CHECK(r.upper >= expect - 1e-6);
    CHECK(r.lower == doctest::Approx(expect).epsilon(1e-3));
}

TEST_CASE("bounds bracket and move monotonically on random models") {
    Rng rng(404);
    for (int i = 0; i < 5; ++i) {
        const auto r = testing::random_vpomdp(rng);
        VisionDataset d(Split::plan);
        PerceptionTable table(r.model->states().num_vision_classes());
        for (std::size_t c = 0; c < table.num_classes(); ++c) {
            for (std::size_t k = 0; k < 2; ++k) {
                const auto id = table.add("o" + std::to_string(c) + "-" + std::to_string(k),
                                          {testing::random_simplex(table.num_classes(), rng), 0.1}, c);
                d.add(id, c);
            }
        }
        const PlanningModel pm(r.model, estimate_vision_obs_fn(d, table.num_classes()));
        HsviConfig cfg;
        cfg.budget.iterations = 30;
        cfg.seed = i;
        const auto res = solve_hsvi(pm, table_evidence(pm, table, {}), cfg);
        for (std::size_t k = 0; k < res.trace.size(); ++k) {
            CHECK(res.trace[k].lower <= res.trace[k].upper + 1e-6);
            if (k > 0) {
                CHECK(res.trace[k].lower >= res.trace[k - 1].lower);
                CHECK(res.trace[k].upper <= res.trace[k - 1].upper);
            }
        }
    }
}

TEST_CASE("solver is deterministic for a fixed seed") {
    const auto m = testing::tiger_model();
    VisionDataset d(Split::plan);
    d.add(0, 0);
    d.add(1, 0);
    d.add(2, 1);
    const PlanningModel pm(m, estimate_vision_obs_fn(d, 2));
    const auto ev = uniform_evidence(pm);
    HsviConfig cfg;
    cfg.budget.iterations = 15;
    cfg.seed = 3;
    const auto a = solve_hsvi(pm, ev, cfg);
    const auto b = solve_hsvi(pm, ev, cfg);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    CHECK(a.policy.size() == b.policy.size());
}

TEST_CASE("policy export round trip and bound trace format") {
    const auto m = testing::tiger_model();
    const auto set = blind_policy_bound(*m);
    const auto doc = policy_to_json(set, *m);
    CHECK(doc.at("format") == "alpha-vectors");
    const auto back = policy_from_json(doc, *m);
    REQUIRE(back.size() == set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        CHECK(back.vectors()[i].values == set.vectors()[i].values);
        CHECK(back.vectors()[i].action == set.vectors()[i].action);
    }
    auto bad = doc;
    bad["num_states"] = 7;
    CHECK_THROWS_AS(policy_from_json(bad, *m), InvalidArgument);

    std::ostringstream out;
    write_bound_trace({{0, 0.0, -1.0, 2.0}, {1, 0.5, -0.5, 1.5}}, out);
    CHECK(out.str().rfind("iteration,seconds,lower,upper\n0,0,-1,2\n", 0) == 0);
}
