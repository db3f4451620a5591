#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pbp/belief.hpp"
#include "pbp/errors.hpp"
#include "pbp/model.hpp"
#include "pbp/model_io.hpp"
#include "test_models.hpp"

using namespace pbp;

TEST_CASE("belief construction keeps only positive entries in state order") {
    const std::vector<double> dense{0.0, 0.5, 0.0, 0.5};
    const auto b = Belief::from_dense(dense);
    REQUIRE(b.support_size() == 2);
    CHECK(b.entries()[0].state == 1);
    CHECK(b.entries()[1].state == 3);
    CHECK(b.prob(2) == 0.0);
    CHECK(b.dense(4) == dense);
}

TEST_CASE("from_dense renormalizes near-simplex input and rejects the rest") {
    const std::vector<double> near{0.5, 0.5 + 5e-7};
    const auto b = Belief::from_dense(near);
    CHECK(b.prob(0) + b.prob(1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(Belief::from_dense(std::vector<double>{0.5, 0.6}), InvalidArgument);
    CHECK_THROWS_AS(Belief::from_dense(std::vector<double>{1.5, -0.5}), InvalidArgument);
    CHECK_THROWS_AS(Belief::normalized(std::vector<double>{0.0, 0.0}), EmptyBeliefError);
}

TEST_CASE("l1 distance") {
    CHECK(l1_distance(Belief::point_mass(0), Belief::point_mass(1)) == 2.0);
    CHECK(l1_distance(Belief::uniform(4), Belief::uniform(4)) == 0.0);
    CHECK(l1_distance(Belief::point_mass(2), std::vector<double>{0.0, 0.0, 0.5, 0.5}) == doctest::Approx(1.0));
}

TEST_CASE("sample_index follows the weights") {
    Rng rng(7);
    const std::vector<double> w{1.0, 0.0, 3.0};
    std::size_t counts[3] = {0, 0, 0};
    for (int i = 0; i < 40000; ++i) ++counts[sample_index(w, rng)];
    CHECK(counts[1] == 0);
    CHECK(static_cast<double>(counts[2]) / 40000.0 == doctest::Approx(0.75).epsilon(0.02));
    CHECK_THROWS_AS(sample_index(std::vector<double>{0.0, 0.0}, rng), InvalidArgument);
}

TEST_CASE("state space splits states into vision and non-vision components") {
    StateSpace space({{"a", {"a0", "a1"}}, {"b", {"b0", "b1", "b2"}}}, {1});
    CHECK(space.size() == 6);
    CHECK(space.num_vision_classes() == 3);
    CHECK(space.num_nonvision_components() == 2);
    for (StateIndex s = 0; s < 6; ++s) {
        const auto vals = space.decode(s);
        CHECK(space.encode(vals) == s);
        CHECK(space.vision_class(s) == vals[1]);
        CHECK(space.nonvision_component(s) == vals[0]);
        CHECK(space.compose(vals[1], vals[0]) == s);
    }
    CHECK(space.states_of_class(2).size() == 2);
    CHECK_THROWS_AS(StateSpace({{"a", {"x"}}}, {3}), InvalidArgument);
}

TEST_CASE("propagate and the standard update on the tiger model") {
    const auto m = testing::tiger_model();
    const auto b = Belief::from_dense(std::vector<double>{0.5, 0.0, 0.5, 0.0});
    const auto p = propagate(*m, b, 0);
    CHECK(p[0] == doctest::Approx(0.35));
    CHECK(p[1] == doctest::Approx(0.15));
    // Hear "left" with 0.85 accuracy and see a bright lamp.
    std::vector<double> lik(4);
    for (StateIndex s = 0; s < 4; ++s) {
        lik[s] = (s / 2 == 0 ? 0.85 : 0.15) * m->nonvision_obs_prob(s, 1);
    }
    const auto post = standard_belief_update(*m, b, 0, lik);
    std::vector<double> expect(4);
    double total = 0.0;
    for (StateIndex s = 0; s < 4; ++s) total += (expect[s] = lik[s] * p[s]);
    for (StateIndex s = 0; s < 4; ++s) CHECK(post.prob(s) == doctest::Approx(expect[s] / total));
    CHECK_THROWS_AS(standard_belief_update(*m, b, 0, std::vector<double>(4, 0.0)), EmptyBeliefError);
}

TEST_CASE("model validation names the broken field") {
    ModelData d;
    d.state_vars = {{"x", {"a", "b"}}};
    d.vision_state_indices = {0};
    d.actions = {"go"};
    d.transition = {{{1.0, 0.0}, {0.3, 0.6}}};
    d.reward = {{0.0}, {1.0}};
    d.initial_belief = {1.0, 0.0};
    CHECK_THROWS_WITH_AS(VPomdpModel{d}, doctest::Contains("transition"), InvalidArgument);
    d.transition[0][1] = {0.4, 0.6};
    d.discount = 1.0;
    CHECK_THROWS_WITH_AS(VPomdpModel{d}, doctest::Contains("discount"), InvalidArgument);
    d.discount = 0.9;
    CHECK_NOTHROW(VPomdpModel{d});
}

TEST_CASE("mdp value iteration solves a two-state chain in closed form") {
    ModelData d;
    d.state_vars = {{"x", {"a", "b"}}};
    d.vision_state_indices = {0};
    d.actions = {"stay", "switch"};
    d.transition = {{{1.0, 0.0}, {0.0, 1.0}}, {{0.0, 1.0}, {1.0, 0.0}}};
    d.reward = {{0.0, 0.0}, {1.0, 0.0}};
    d.discount = 0.9;
    d.initial_belief = {1.0, 0.0};
    const VPomdpModel m(d);
    const auto q = mdp_value_iteration(m, 1e-12);
    // V(b) = 1 / (1 - 0.9) staying in b; V(a) = 0.9 * V(b) after switching.
    CHECK(q.value(1) == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(q.value(0) == doctest::Approx(9.0).epsilon(1e-9));
    CHECK(q.best_action(0) == 1);
    CHECK(q.best_action(1) == 0);
    CHECK(q.residual <= 1e-12);
}

TEST_CASE("model JSON round trip is exact") {
    Rng rng(3);
    const auto r = testing::random_vpomdp(rng);
    const auto doc = model_to_json(*r.model);
    const auto back = model_from_json(doc);
    CHECK(model_to_json(back) == doc);
    const auto path = std::filesystem::temp_directory_path() / "pbp_model_roundtrip.json";
    save_model(*r.model, path);
    CHECK(model_to_json(load_model(path)) == doc);
    std::filesystem::remove(path);
    auto broken = doc;
    broken.erase("reward");
    CHECK_THROWS_AS(model_from_json(broken), InvalidArgument);
}
