#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "pbp/errors.hpp"
#include "pbp/experiment.hpp"
#include "pbp/hsvi.hpp"
#include "pbp/perception_io.hpp"
#include "pbp/selftest.hpp"

namespace fs = std::filesystem;
using namespace pbp;

namespace {

struct RunContext {
    ExperimentConfig cfg;
    fs::path dir;
};

// Loads the config, applies PBP_SEED and prepares the run directory with both
// the file as given and the fully resolved configuration.
RunContext open_run(const std::string& config_path, const std::string& run_dir, const std::string& kind) {
    RunContext ctx;
    ctx.cfg = load_config(config_path);
    apply_seed_override(ctx.cfg);
    if (run_dir.empty()) {
        ctx.dir = fs::path("runs") / (kind + "-" + ctx.cfg.env + "-" + to_string(ctx.cfg.algorithm) + "-" +
                                      config_hash(ctx.cfg).substr(0, 8));
    } else {
        ctx.dir = run_dir;
    }
    fs::create_directories(ctx.dir);
    fs::copy_file(config_path, ctx.dir / "input_config.json", fs::copy_options::overwrite_existing);
    std::ofstream(ctx.dir / "config.json") << config_to_json(ctx.cfg).dump(2) << '\n';
    return ctx;
}

void write_results(const fs::path& path, const std::vector<ResultRecord>& records) {
    std::ofstream out(path);
    write_csv_header(out);
    for (const auto& r : records) write_csv_row(r, out);
}

void write_returns(const fs::path& path, const ResultRecord& r) {
    std::ofstream out(path);
    out << "episode,return\n";
    out.precision(17);
    for (std::size_t i = 0; i < r.returns.size(); ++i) out << i << ',' << r.returns[i] << '\n';
}

void print_record(const ResultRecord& r) {
    std::cout << r.env << ' ' << r.algo << " noise=" << r.noise_mode << ':' << r.noise_p << " V=" << r.V << " ± "
              << r.ci95 << " (" << r.episodes << " episodes, t=" << r.t_seconds << " s, fallbacks=" << r.fallbacks;
    if (r.belief_l1) std::cout << ", belief_l1=" << *r.belief_l1;
    std::cout << ")\n";
}

int cmd_plan(const std::string& config, const std::string& run_dir) {
    auto ctx = open_run(config, run_dir, "plan");
    if (is_pomcp(ctx.cfg.algorithm)) {
        throw ConfigError("algorithm", "tpbp-pomcp plans online at every step; use 'evaluate'");
    }
    const auto setup = make_planning_setup(ctx.cfg);
    HsviConfig hc = ctx.cfg.hsvi;
    hc.seed = derive_seed(ctx.cfg.seed, 31);
    const auto result = solve_hsvi(*setup.planning_model, setup.evidence, hc);

    const auto& model = *setup.env.model;
    save_policy(result.policy, model, ctx.dir / "policy.json");
    std::ofstream trace(ctx.dir / "bound_trace.csv");
    write_bound_trace(result.trace, trace);
    std::ofstream(ctx.dir / "planning_model.json") << planning_model_to_json(*setup.planning_model, setup.env.channel.table).dump() << '\n';
    save_perception_table(setup.env.channel.table, ctx.dir / "perception_table.jsonl");
    const auto act = setup.env.channel.dataset(Split::act);
    const auto perc = setup.env.channel.dataset(Split::perc);
    save_split_manifest(setup.env.channel.table, {&perc, &setup.env.channel.plan_dataset, &act},
                        ctx.dir / "splits.json");
    nlohmann::json summary = {{"lower", result.lower},         {"upper", result.upper},
                              {"iterations", result.iterations}, {"seconds", result.seconds},
                              {"converged", result.converged},   {"alpha_vectors", result.policy.size()}};
    std::ofstream(ctx.dir / "plan_summary.json") << summary.dump(2) << '\n';
    std::cout << "planned " << ctx.cfg.env << ' ' << to_string(ctx.cfg.algorithm) << ": lower=" << result.lower
              << " upper=" << result.upper << " after " << result.iterations << " trials (" << result.seconds
              << " s)\nrun directory: " << ctx.dir.string() << '\n';
    return 0;
}

int cmd_evaluate(const std::string& config, const std::string& run_dir, const std::string& policy_path,
                 std::size_t episodes) {
    auto ctx = open_run(config, run_dir, "evaluate");
    if (episodes > 0) ctx.cfg.episodes = episodes;
    std::shared_ptr<const SolvedPolicy> policy;
    if (!policy_path.empty()) {
        if (is_pomcp(ctx.cfg.algorithm)) throw ConfigError("algorithm", "tpbp-pomcp does not use a stored policy");
        auto solved = std::make_shared<SolvedPolicy>();
        solved->policy = load_policy(policy_path, *make_environment(ctx.cfg.env).model);
        policy = solved;
    }
    const auto r = run_experiment(ctx.cfg, nullptr, policy);
    write_results(ctx.dir / "results.csv", {r});
    write_returns(ctx.dir / "returns.csv", r);
    print_record(r);
    std::cout << "run directory: " << ctx.dir.string() << '\n';
    return 0;
}

int cmd_sweep(const std::string& config, const std::string& run_dir, const std::vector<double>& noise,
              const std::vector<std::string>& algorithms, const std::vector<std::string>& modes) {
    auto ctx = open_run(config, run_dir, "sweep");
    std::vector<Algorithm> algos;
    for (const auto& a : algorithms) algos.push_back(algorithm_from_string(a));
    if (algos.empty()) algos.push_back(ctx.cfg.algorithm);
    std::vector<CorruptionMode> mode_list;
    for (const auto& m : modes) {
        try {
            mode_list.push_back(corruption_mode_from_string(m));
        } catch (const std::exception& e) {
            throw ConfigError("modes", e.what());
        }
    }
    if (mode_list.empty()) mode_list.push_back(ctx.cfg.corruption.mode);

    PolicyCache cache;
    std::ofstream out(ctx.dir / "results.csv");
    write_csv_header(out);
    for (auto mode : mode_list) {
        for (auto algo : algos) {
            ExperimentConfig c = ctx.cfg;
            c.algorithm = algo;
            c.corruption.mode = mode;
            for (double p : noise) {
                auto rows = sweep_noise(c, {p}, &cache);
                write_csv_row(rows.front(), out);
                out.flush();
                print_record(rows.front());
            }
        }
    }
    std::cout << "run directory: " << ctx.dir.string() << '\n';
    return 0;
}

int cmd_selftest(std::uint64_t seed) {
    bool ok = true;
    for (const auto& r : run_selftest(seed)) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.cases << " cases, worst deviation "
                  << r.worst << " (tolerance " << r.tolerance << ")\n";
        ok = ok && r.passed;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Perception-based belief planning: plan, evaluate and sweep vision POMDP experiments"};
    app.require_subcommand(1);

    std::string config, run_dir, policy_path;
    std::size_t episodes = 0;
    std::vector<double> noise{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<std::string> algorithms, modes;
    std::uint64_t selftest_seed = 1;

    auto* plan = app.add_subcommand("plan", "Solve the configured planner offline and export its policy");
    plan->add_option("-c,--config", config, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
    plan->add_option("-o,--run-dir", run_dir, "Output directory (default: runs/<kind>-<env>-<algo>-<hash>)");

    auto* evaluate = app.add_subcommand("evaluate", "Run episodes and write a results CSV");
    evaluate->add_option("-c,--config", config, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
    evaluate->add_option("-o,--run-dir", run_dir, "Output directory");
    evaluate->add_option("-p,--policy", policy_path, "Alpha-vector policy from 'plan' (skips solving)")
        ->check(CLI::ExistingFile);
    evaluate->add_option("-n,--episodes", episodes, "Override the episode count");

    auto* sweep = app.add_subcommand("sweep", "Noise-probability sweep; one CSV row per point");
    sweep->add_option("-c,--config", config, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
    sweep->add_option("-o,--run-dir", run_dir, "Output directory");
    sweep->add_option("--noise", noise, "Noise probabilities")->delimiter(',')->check(CLI::Range(0.0, 1.0));
    sweep->add_option("--algorithms", algorithms, "Algorithms to sweep (default: the config's)")->delimiter(',');
    sweep->add_option("--modes", modes, "Corruption modes: pure, additive (default: the config's)")->delimiter(',');

    auto* selftest = app.add_subcommand("selftest", "Run the belief-update property suites");
    selftest->add_option("--seed", selftest_seed, "Seed for the random models");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*plan) return cmd_plan(config, run_dir);
        if (*evaluate) return cmd_evaluate(config, run_dir, policy_path, episodes);
        if (*sweep) return cmd_sweep(config, run_dir, noise, algorithms, modes);
        if (*selftest) return cmd_selftest(selftest_seed);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
