#include <benchmark/benchmark.h>

#include "pbp/experiment.hpp"
#include "pbp/hsvi.hpp"
#include "pbp/pbp_update.hpp"
#include "pbp/pomcp.hpp"

using namespace pbp;

namespace {

// Shared FlowerGrid setup; building it draws the synthetic channel once.
const PlanningSetup& flowergrid() {
    static const PlanningSetup setup = [] {
        ExperimentConfig cfg;
        cfg.env = "flowergrid";
        return make_planning_setup(cfg);
    }();
    return setup;
}

ObsId some_act_observation(const PlanningSetup& setup, std::size_t vision_class) {
    return setup.env.channel.pool(Split::act, vision_class).front();
}

void BM_PbpUpdate(benchmark::State& state) {
    const auto& setup = flowergrid();
    const auto& model = *setup.env.model;
    const auto& perc = setup.env.channel.table.predict(some_act_observation(setup, 0)).dist;
    const Belief b = Belief::uniform(model.num_states());
    const std::optional<std::size_t> znv = model.pure_vision() ? std::nullopt : std::optional<std::size_t>(0);
    for (auto _ : state) benchmark::DoNotOptimize(pbp_update(model, b, 0, perc, znv));
}
BENCHMARK(BM_PbpUpdate);

void BM_HsviBackup(benchmark::State& state) {
    const auto& setup = flowergrid();
    HsviConfig cfg;
    cfg.budget.iterations = static_cast<std::size_t>(state.range(0));
    HsviSolver solver(*setup.planning_model, setup.evidence, cfg);
    for (std::size_t i = 0; i < cfg.budget.iterations; ++i) solver.run_trial();
    const Belief& b0 = setup.env.model->initial_belief();
    state.counters["alpha_vectors"] = static_cast<double>(solver.lower_bound().size());
    for (auto _ : state) benchmark::DoNotOptimize(solver.backup(b0));
}
BENCHMARK(BM_HsviBackup)->Arg(1)->Arg(5)->Unit(benchmark::kMicrosecond);

void BM_ParticleFilter(benchmark::State& state) {
    const auto& setup = flowergrid();
    const auto& model = *setup.env.model;
    const auto& perc = setup.env.channel.table.predict(some_act_observation(setup, 0)).dist;
    const std::optional<std::size_t> znv = model.pure_vision() ? std::nullopt : std::optional<std::size_t>(0);
    ParticleFilterConfig cfg;
    cfg.particles = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    const auto ps = ParticleSet::sample(model.initial_belief(), cfg.particles, rng);
    for (auto _ : state) benchmark::DoNotOptimize(particle_filter_update(model, ps, 0, perc, znv, cfg, rng));
}
BENCHMARK(BM_ParticleFilter)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
