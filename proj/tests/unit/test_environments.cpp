#include <doctest.h>

#include <cmath>
#include <set>

#include "pbp/environments.hpp"
#include "pbp/errors.hpp"

using namespace pbp;

namespace {

void check_stochastic(const VPomdpModel& m) {
    for (ActionIndex a = 0; a < m.num_actions(); ++a) {
        for (StateIndex s = 0; s < m.num_states(); ++s) {
            double total = 0.0;
            for (const auto& succ : m.successors(s, a)) total += succ.prob;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

}  // namespace

TEST_CASE("frozen lake dynamics") {
    const auto m = frozen_lake_model(4);
    CHECK(m->num_states() == 32);
    CHECK(m->states().num_vision_classes() == 16);
    check_stochastic(*m);
    // From cell 14 (row 3, col 2), dry, moving east enters the goal.
    const StateIndex s14_dry = 14 * 2;
    CHECK(m->reward(s14_dry, 1) == 1.0);
    CHECK(m->transition(s14_dry, 1, 15 * 2) == 0.5);
    // Slippery: east slides north or south with 0.5 each.
    const StateIndex s14_slip = 14 * 2 + 1;
    CHECK(m->reward(s14_slip, 1) == 0.0);
    CHECK(m->transition(s14_slip, 1, 10 * 2) + m->transition(s14_slip, 1, 10 * 2 + 1) == doctest::Approx(0.5));
    CHECK(m->is_terminal(5 * 2));
    CHECK(m->is_terminal(15 * 2 + 1));
    CHECK_FALSE(m->is_terminal(0));
    CHECK(m->initial_belief().prob(0) == 0.5);
    CHECK(m->nonvision_obs_prob(3, 1) == 1.0);
    // MDP value from the start is close to the well-known optimum for this map.
    const auto q = mdp_value_iteration(*m, 1e-10);
    const double v0 = 0.5 * (q.value(0) + q.value(1));
    CHECK(v0 > 0.55);
    CHECK(v0 < 0.70);
    check_stochastic(*frozen_lake_model(8));
}

TEST_CASE("flower grid pick rules") {
    const auto m = flower_grid_model();
    CHECK(m->num_states() == 50);
    check_stochastic(*m);
    auto st = [](std::size_t cell, std::size_t picked) { return (cell - 1) * 2 + picked; };
    constexpr ActionIndex pick = 4;
    CHECK(m->reward(st(20, 0), pick) == 10.0);
    CHECK(m->transition(st(20, 0), pick, st(20, 1)) == 1.0);
    CHECK(m->reward(st(2, 0), pick) == -10.0);
    CHECK(m->transition(st(2, 1), pick, st(25, 1)) == 1.0);
    CHECK(m->reward(st(3, 0), pick) == -1.0);
    CHECK(m->is_terminal(st(25, 1)));
    CHECK_FALSE(m->is_terminal(st(25, 0)));
    // Moving south from cell 20 with the flower: 0.6 + 0.4/4 into the sink.
    CHECK(m->reward(st(20, 1), 2) == doctest::Approx(100.0 * 0.7));
    CHECK(m->initial_belief() == Belief::point_mass(st(1, 0)));
}

TEST_CASE("intersection dynamics") {
    const auto m = intersection_model();
    CHECK(m->num_states() == 42);
    CHECK(m->states().num_vision_classes() == 3);
    check_stochastic(*m);
    auto st = [](std::size_t light, std::size_t pos, std::size_t siren) { return (light * 7 + pos) * 2 + siren; };
    CHECK(m->reward(st(0, 6, 0), 0) == -1.0);
    // Position 0 (index 1) backing up arrives; red with siren costs both penalties.
    CHECK(m->reward(st(1, 1, 1), 1) == -300.0);
    CHECK(m->reward(st(0, 1, 0), 1) == 0.0);
    CHECK(m->reward(st(2, 2, 1), 2) == -200.0);
    CHECK(m->transition(st(1, 3, 0), 0, st(2, 3, 1)) == doctest::Approx(0.3 * 0.2));
    CHECK(m->is_terminal(st(1, 0, 0)));
    CHECK(m->num_nonvision_obs() == 14);
    CHECK(m->initial_belief().support_size() == 3);
}

TEST_CASE("environment step contract") {
    const auto env = make_frozen_lake(4);
    Rng rng(9);
    CHECK_THROWS_AS(env_step(env, 5 * 2, 0, 0, rng), ContractError);
    const auto r = env_step(env, 0, 2, 0, rng);
    CHECK(env.channel.table.label(r.obs.vision) == env.model->states().vision_class(r.next));
    CHECK(r.obs.nonvision == r.next % 2);
    CHECK(env_step(env, 0, 2, env.horizon - 1, rng).done);
    CHECK_THROWS_AS(make_environment("cartpole"), InvalidArgument);
}

TEST_CASE("channel splits use disjoint observation pools") {
    const auto env = make_flower_grid();
    std::set<ObsId> seen;
    for (auto split : {Split::perc, Split::plan, Split::act}) {
        for (std::size_t c = 0; c < 25; ++c) {
            for (auto id : env.channel.pool(split, c)) CHECK(seen.insert(id).second);
        }
    }
    CHECK(env.channel.plan_dataset.size() == 25 * 20);
}

TEST_CASE("corruption replaces plan pairs and act draws") {
    const auto env = make_frozen_lake(4);
    CorruptionConfig none;
    CHECK(apply_corruption(env.channel, none).plan_dataset.pairs() == env.channel.plan_dataset.pairs());

    CorruptionConfig all;
    all.noise_probability = 1.0;
    const auto pure = apply_corruption(env.channel, all);
    for (const auto& [id, label] : pure.plan_dataset.pairs()) {
        CHECK(pure.table.predict(id).uncertainty == 1.0);
        CHECK(pure.table.label(id) == label);
    }
    Rng rng(5);
    for (int i = 0; i < 20; ++i) CHECK(pure.table.name(draw_act_observation(pure, 3, rng)).rfind("pure-act", 0) == 0);

    all.mode = CorruptionMode::additive;
    const auto add = apply_corruption(env.channel, all);
    std::size_t correct = 0;
    for (const auto& [id, label] : add.plan_dataset.pairs()) correct += argmax(add.table.predict(id).dist) == label;
    CHECK(static_cast<double>(correct) / add.plan_dataset.size() == doctest::Approx(0.4).epsilon(0.25));

    CorruptionConfig half;
    half.noise_probability = 0.5;
    const auto mixed = apply_corruption(env.channel, half);
    std::size_t corrupted = 0;
    for (const auto& [id, label] : mixed.plan_dataset.pairs()) corrupted += mixed.table.name(id).rfind("pure", 0) == 0;
    CHECK(static_cast<double>(corrupted) / mixed.plan_dataset.size() == doctest::Approx(0.5).epsilon(0.2));
    CHECK(corruption_mode_from_string("additive") == CorruptionMode::additive);
}
