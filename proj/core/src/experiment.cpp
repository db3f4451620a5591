#include "pbp/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "pbp/errors.hpp"

namespace pbp {

using nlohmann::json;

namespace {

struct AlgorithmName {
    Algorithm algo;
    const char* name;
};

constexpr AlgorithmName kAlgorithms[] = {
    {Algorithm::pbp_hsvi, "pbp-hsvi"},     {Algorithm::tpbp_hsvi, "tpbp-hsvi"}, {Algorithm::wpbp_hsvi, "wpbp-hsvi"},
    {Algorithm::tpbp_pomcp, "tpbp-pomcp"}, {Algorithm::psrl_hsvi, "psrl-hsvi"}, {Algorithm::noperc, "noperc"},
    {Algorithm::oracle, "oracle"},
};

const char* const kEnvironments[] = {"frozenlake4", "frozenlake8", "flowergrid", "intersection"};

std::size_t vision_classes(const std::string& env) {
    if (env == "frozenlake4") return 16;
    if (env == "frozenlake8") return 64;
    if (env == "flowergrid") return 25;
    return 3;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename T>
void read_if(const json& doc, const char* key, T& out, const std::string& field) {
    if (!doc.contains(key)) return;
    try {
        out = doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(field, e.what());
    }
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::optional<std::size_t> nonvision(const VPomdpModel& m, std::size_t z) {
    return m.pure_vision() ? std::nullopt : std::optional<std::size_t>(z);
}

StateIndex sample_state(const Belief& b, Rng& rng) {
    std::vector<double> w;
    w.reserve(b.support_size());
    for (const auto& e : b.entries()) w.push_back(e.prob);
    return b.entries()[sample_index(w, rng)].state;
}

}  // namespace

const char* to_string(Algorithm algo) {
    for (const auto& a : kAlgorithms) {
        if (a.algo == algo) return a.name;
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
    for (const auto& a : kAlgorithms) {
        if (name == a.name) return a.algo;
    }
    throw ConfigError("algorithm", "unknown algorithm '" + name + "'");
}

bool is_pomcp(Algorithm algo) { return algo == Algorithm::tpbp_pomcp; }

void validate(const ExperimentConfig& cfg) {
    bool known = false;
    for (const char* e : kEnvironments) known = known || cfg.env == e;
    if (!known) throw ConfigError("env", "unknown environment '" + cfg.env + "'");
    if (!(cfg.eps >= 0.0 && cfg.eps <= 1.0)) throw ConfigError("eps", "must lie in [0,1]");
    if (cfg.episode_count() < 1) throw ConfigError("episodes", "must be at least 1");
    if (cfg.horizon < 1) throw ConfigError("horizon", "must be at least 1");
    const double chance = 1.0 / static_cast<double>(vision_classes(cfg.env));
    if (!(cfg.channel.accuracy >= chance && cfg.channel.accuracy <= 1.0)) {
        throw ConfigError("channel.accuracy", "must lie in [1/classes, 1]");
    }
    if (!(cfg.channel.sharpness > 0.0)) throw ConfigError("channel.sharpness", "must be positive");
    if (!(cfg.channel.uncertainty_noise >= 0.0)) throw ConfigError("channel.uncertainty_noise", "must be nonnegative");
    const auto& c = cfg.corruption;
    if (!(c.noise_probability >= 0.0 && c.noise_probability <= 1.0)) {
        throw ConfigError("corruption.noise_probability", "must lie in [0,1]");
    }
    if (!(c.additive_accuracy >= chance && c.additive_accuracy <= 1.0)) {
        throw ConfigError("corruption.additive_accuracy", "must lie in [1/classes, 1]");
    }
    const auto& h = cfg.hsvi;
    if (!(h.eps_explore >= 0.0 && h.eps_explore <= 1.0)) throw ConfigError("hsvi.eps_explore", "must lie in [0,1]");
    if (!(h.slack > 0.0)) throw ConfigError("hsvi.slack", "must be positive");
    if (h.budget.mode == HsviBudget::Mode::iterations && h.budget.iterations < 1) {
        throw ConfigError("hsvi.budget.iterations", "must be at least 1");
    }
    if (h.budget.mode == HsviBudget::Mode::seconds && !(h.budget.seconds > 0.0)) {
        throw ConfigError("hsvi.budget.seconds", "must be positive");
    }
    if (cfg.filter.particles < 1) throw ConfigError("filter.particles", "must be at least 1");
    if (!(cfg.filter.invigoration >= 0.0 && cfg.filter.invigoration <= 1.0)) {
        throw ConfigError("filter.invigoration", "must lie in [0,1]");
    }
    if (!(cfg.pomcp.random_rollout_prob >= 0.0 && cfg.pomcp.random_rollout_prob <= 1.0)) {
        throw ConfigError("pomcp.random_rollout_prob", "must lie in [0,1]");
    }
}

ExperimentConfig config_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
    ExperimentConfig cfg;
    read_if(doc, "env", cfg.env, "env");
    if (doc.contains("algorithm")) {
        if (!doc.at("algorithm").is_string()) throw ConfigError("algorithm", "must be a string");
        cfg.algorithm = algorithm_from_string(doc.at("algorithm").get<std::string>());
    }
    read_if(doc, "eps", cfg.eps, "eps");
    if (doc.contains("unc_fn")) {
        try {
            cfg.unc_fn = uncertainty_function_from_string(doc.at("unc_fn").get<std::string>());
        } catch (const std::exception& e) {
            throw ConfigError("unc_fn", e.what());
        }
    }
    if (doc.contains("episodes")) {
        read_if(doc, "episodes", cfg.episodes, "episodes");
        if (cfg.episodes == 0) throw ConfigError("episodes", "must be at least 1");
    }
    read_if(doc, "horizon", cfg.horizon, "horizon");
    read_if(doc, "seed", cfg.seed, "seed");

    if (doc.contains("channel")) {
        const auto& c = doc.at("channel");
        read_if(c, "accuracy", cfg.channel.accuracy, "channel.accuracy");
        read_if(c, "sharpness", cfg.channel.sharpness, "channel.sharpness");
        read_if(c, "ids_per_class", cfg.channel.ids_per_class, "channel.ids_per_class");
        read_if(c, "uncertainty_noise", cfg.channel.uncertainty_noise, "channel.uncertainty_noise");
        read_if(c, "overconfident_on_corrupt", cfg.channel.overconfident_on_corrupt, "channel.overconfident_on_corrupt");
        if (c.contains("seed")) {
            std::uint64_t s = 0;
            read_if(c, "seed", s, "channel.seed");
            cfg.channel_seed = s;
        }
    }
    if (doc.contains("corruption")) {
        const auto& c = doc.at("corruption");
        read_if(c, "noise_probability", cfg.corruption.noise_probability, "corruption.noise_probability");
        read_if(c, "additive_accuracy", cfg.corruption.additive_accuracy, "corruption.additive_accuracy");
        if (c.contains("mode")) {
            try {
                cfg.corruption.mode = corruption_mode_from_string(c.at("mode").get<std::string>());
            } catch (const std::exception& e) {
                throw ConfigError("corruption.mode", e.what());
            }
        }
        if (c.contains("seed")) {
            std::uint64_t s = 0;
            read_if(c, "seed", s, "corruption.seed");
            cfg.corruption_seed = s;
        }
    }
    if (doc.contains("hsvi")) {
        const auto& h = doc.at("hsvi");
        read_if(h, "eps_explore", cfg.hsvi.eps_explore, "hsvi.eps_explore");
        read_if(h, "slack", cfg.hsvi.slack, "hsvi.slack");
        read_if(h, "max_depth", cfg.hsvi.max_depth, "hsvi.max_depth");
        read_if(h, "prune_every", cfg.hsvi.prune_every, "hsvi.prune_every");
        if (h.contains("budget")) {
            const auto& b = h.at("budget");
            std::string mode = "iterations";
            read_if(b, "mode", mode, "hsvi.budget.mode");
            if (mode == "iterations") {
                cfg.hsvi.budget.mode = HsviBudget::Mode::iterations;
            } else if (mode == "seconds") {
                cfg.hsvi.budget.mode = HsviBudget::Mode::seconds;
            } else {
                throw ConfigError("hsvi.budget.mode", "must be 'iterations' or 'seconds'");
            }
            read_if(b, "iterations", cfg.hsvi.budget.iterations, "hsvi.budget.iterations");
            read_if(b, "seconds", cfg.hsvi.budget.seconds, "hsvi.budget.seconds");
        }
    }
    if (doc.contains("pomcp")) {
        const auto& p = doc.at("pomcp");
        read_if(p, "simulations", cfg.pomcp.simulations, "pomcp.simulations");
        read_if(p, "c_ucb", cfg.pomcp.c_ucb, "pomcp.c_ucb");
        read_if(p, "max_depth", cfg.pomcp.max_depth, "pomcp.max_depth");
        read_if(p, "random_rollout_prob", cfg.pomcp.random_rollout_prob, "pomcp.random_rollout_prob");
    }
    if (doc.contains("filter")) {
        const auto& f = doc.at("filter");
        read_if(f, "particles", cfg.filter.particles, "filter.particles");
        read_if(f, "invigoration", cfg.filter.invigoration, "filter.invigoration");
        read_if(f, "max_tries", cfg.filter.max_tries, "filter.max_tries");
    }
    validate(cfg);
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json channel = {{"accuracy", cfg.channel.accuracy},
                    {"sharpness", cfg.channel.sharpness},
                    {"ids_per_class", cfg.channel.ids_per_class},
                    {"uncertainty_noise", cfg.channel.uncertainty_noise},
                    {"overconfident_on_corrupt", cfg.channel.overconfident_on_corrupt}};
    if (cfg.channel_seed) channel["seed"] = *cfg.channel_seed;
    json corruption = {{"mode", to_string(cfg.corruption.mode)},
                       {"noise_probability", cfg.corruption.noise_probability},
                       {"additive_accuracy", cfg.corruption.additive_accuracy}};
    if (cfg.corruption_seed) corruption["seed"] = *cfg.corruption_seed;
    json doc = {
        {"env", cfg.env},
        {"algorithm", to_string(cfg.algorithm)},
        {"eps", cfg.eps},
        {"unc_fn", to_string(cfg.unc_fn)},
        {"episodes", cfg.episode_count()},
        {"horizon", cfg.horizon},
        {"seed", cfg.seed},
        {"channel", channel},
        {"corruption", corruption},
        {"hsvi",
         {{"eps_explore", cfg.hsvi.eps_explore},
          {"slack", cfg.hsvi.slack},
          {"max_depth", cfg.hsvi.max_depth},
          {"prune_every", cfg.hsvi.prune_every},
          {"budget",
           {{"mode", cfg.hsvi.budget.mode == HsviBudget::Mode::iterations ? "iterations" : "seconds"},
            {"iterations", cfg.hsvi.budget.iterations},
            {"seconds", cfg.hsvi.budget.seconds}}}}},
        {"pomcp",
         {{"simulations", cfg.pomcp.simulations},
          {"c_ucb", cfg.pomcp.c_ucb},
          {"max_depth", cfg.pomcp.max_depth},
          {"random_rollout_prob", cfg.pomcp.random_rollout_prob}}},
        {"filter",
         {{"particles", cfg.filter.particles},
          {"invigoration", cfg.filter.invigoration},
          {"max_tries", cfg.filter.max_tries}}},
    };
    return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot read " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
    return config_from_json(doc);
}

void apply_seed_override(ExperimentConfig& cfg) {
    const char* env = std::getenv("PBP_SEED");
    if (!env || !*env) return;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ConfigError("PBP_SEED", "must be a nonnegative integer");
    cfg.seed = v;
}

ReturnStats summarize(const std::vector<double>& returns) {
    ReturnStats s;
    if (returns.empty()) return s;
    double sum = 0.0;
    for (double r : returns) sum += r;
    const double n = static_cast<double>(returns.size());
    s.mean = sum / n;
    if (returns.size() > 1) {
        double ss = 0.0;
        for (double r : returns) ss += (r - s.mean) * (r - s.mean);
        s.ci95 = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return s;
}

void write_csv_header(std::ostream& out) { out << kCsvHeader << '\n'; }

void write_csv_row(const ResultRecord& r, std::ostream& out) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%.17g,%s,%.17g,%llu,%zu,%.17g,%.17g,%.6f,%zu,", r.env.c_str(),
                  r.algo.c_str(), r.unc_fn.c_str(), r.eps, r.noise_mode.c_str(), r.noise_p,
                  static_cast<unsigned long long>(r.seed), r.episodes, r.V, r.ci95, r.t_seconds, r.fallbacks);
    out << buf;
    if (r.belief_l1) {
        std::snprintf(buf, sizeof buf, "%.17g", *r.belief_l1);
        out << buf;
    }
    out << '\n';
}

PlanningSetup make_planning_setup(const ExperimentConfig& cfg) {
    validate(cfg);
    ChannelOptions opts = cfg.channel;
    opts.seed = cfg.channel_seed.value_or(derive_seed(cfg.seed, 11));
    PlanningSetup setup{make_environment(cfg.env, opts), nullptr, {}, {}, UpdateRule::pbp};
    setup.env.horizon = cfg.horizon;
    CorruptionConfig corruption = cfg.corruption;
    corruption.seed = cfg.corruption_seed.value_or(derive_seed(cfg.seed, 12));
    setup.env.channel = apply_corruption(setup.env.channel, corruption);

    const auto& model = setup.env.model;
    auto est = estimate_vision_obs_fn(setup.env.channel.plan_dataset, model->states().num_vision_classes());
    setup.planning_model = std::make_shared<PlanningModel>(model, std::move(est));
    const auto& pm = *setup.planning_model;
    const auto& table = setup.env.channel.table;

    setup.uq.function = cfg.unc_fn;
    setup.uq.eps = cfg.eps;
    switch (cfg.algorithm) {
        case Algorithm::pbp_hsvi: setup.uq.mode = UqMode::none; break;
        case Algorithm::tpbp_hsvi:
        case Algorithm::tpbp_pomcp: setup.uq.mode = UqMode::tuq; break;
        case Algorithm::wpbp_hsvi: setup.uq.mode = UqMode::wuq; break;
        case Algorithm::psrl_hsvi:
            setup.uq.mode = UqMode::none;
            setup.rule = UpdateRule::psrl;
            break;
        case Algorithm::noperc:
        case Algorithm::oracle: setup.uq.mode = UqMode::none; break;
    }
    if (cfg.algorithm == Algorithm::noperc) {
        setup.evidence = uniform_evidence(pm);
    } else if (cfg.algorithm == Algorithm::oracle) {
        setup.evidence = oracle_evidence(pm, table);
    } else {
        setup.evidence = table_evidence(pm, table, setup.uq, setup.rule);
    }
    return setup;
}

std::string plan_key(const ExperimentConfig& cfg) {
    json doc = config_to_json(cfg);
    doc.erase("episodes");
    doc.erase("pomcp");
    doc.erase("filter");
    doc.erase("horizon");
    // Only the plan split enters the planner; the act split is irrelevant here.
    doc["channel"]["resolved_seed"] = cfg.channel_seed.value_or(derive_seed(cfg.seed, 11));
    doc["corruption"]["resolved_seed"] = cfg.corruption_seed.value_or(derive_seed(cfg.seed, 12));
    if (cfg.algorithm != Algorithm::tpbp_hsvi && cfg.algorithm != Algorithm::tpbp_pomcp) doc.erase("eps");
    return doc.dump();
}

std::string config_hash(const ExperimentConfig& cfg) { return hex(fnv1a(config_to_json(cfg).dump())); }

std::shared_ptr<const SolvedPolicy> PolicyCache::get_or_solve(const ExperimentConfig& cfg, const PlanningSetup& setup) {
    const auto key = plan_key(cfg);
    if (auto it = cache_.find(key); it != cache_.end()) {
        ++hits_;
        return it->second;
    }
    HsviConfig hc = cfg.hsvi;
    hc.seed = derive_seed(cfg.seed, 31);
    auto solved = std::make_shared<SolvedPolicy>();
    solved->result = solve_hsvi(*setup.planning_model, setup.evidence, hc);
    solved->policy = solved->result.policy;
    cache_.emplace(key, solved);
    return solved;
}

Distribution acting_distribution(const ExperimentConfig& cfg, const PlanningSetup& setup, ObsId id) {
    const auto& table = setup.env.channel.table;
    const std::size_t k = table.num_classes();
    switch (cfg.algorithm) {
        case Algorithm::noperc: return uniform_distribution(k);
        case Algorithm::oracle: {
            Distribution d(k, 0.0);
            d[table.label(id)] = 1.0;
            return d;
        }
        default: return effective_distribution(table.predict(id), setup.uq);
    }
}

double belief_l1(const Belief& b, const ParticleSet& ps, std::size_t num_states) {
    const auto freq = ps.distribution(num_states);
    double d = 0.0;
    std::size_t j = 0;
    const auto entries = b.entries();
    for (StateIndex s = 0; s < num_states; ++s) {
        double p = 0.0;
        if (j < entries.size() && entries[j].state == s) p = entries[j++].prob;
        d += std::abs(p - freq[s]);
    }
    return d;
}

ResultRecord run_experiment(const ExperimentConfig& cfg, PolicyCache* cache, std::shared_ptr<const SolvedPolicy> policy) {
    const auto setup = make_planning_setup(cfg);
    const auto& env = setup.env;
    const auto& model = *env.model;
    const double gamma = model.discount();

    ResultRecord rec;
    rec.env = cfg.env;
    rec.algo = to_string(cfg.algorithm);
    rec.unc_fn = to_string(cfg.unc_fn);
    rec.eps = cfg.eps;
    rec.noise_mode = to_string(cfg.corruption.mode);
    rec.noise_p = cfg.corruption.noise_probability;
    rec.seed = cfg.seed;
    rec.episodes = cfg.episode_count();
    rec.config_hash = config_hash(cfg);

    auto update = [&](const Belief& b, ActionIndex a, const EnvObservation& obs) {
        const auto dist = acting_distribution(cfg, setup, obs.vision);
        const auto znv = nonvision(model, obs.nonvision);
        return setup.rule == UpdateRule::psrl ? psrl_update(model, b, a, dist, znv) : pbp_update(model, b, a, dist, znv);
    };

    if (!is_pomcp(cfg.algorithm)) {
        if (!policy) {
            PolicyCache local;
            policy = (cache ? cache : &local)->get_or_solve(cfg, setup);
        }
        rec.t_seconds = policy->result.seconds;
        for (std::size_t ep = 0; ep < rec.episodes; ++ep) {
            Rng rng(derive_seed(cfg.seed, 21, ep));
            StateIndex s = sample_state(model.initial_belief(), rng);
            Belief b = model.initial_belief();
            double ret = 0.0, discount = 1.0;
            for (std::size_t t = 0; t < cfg.horizon && !model.is_terminal(s); ++t) {
                const ActionIndex a = policy->policy.action(b);
                const auto step = env_step(env, s, a, t, rng);
                ret += discount * step.reward;
                discount *= gamma;
                auto upd = update(b, a, step.obs);
                rec.fallbacks += upd.fallback ? 1 : 0;
                b = std::move(upd.belief);
                s = step.next;
                if (step.done) break;
            }
            rec.returns.push_back(ret);
        }
    } else {
        const auto q = mdp_value_iteration(model, 1e-9);
        PomcpPlanner planner(*setup.planning_model, setup.evidence, q, cfg.pomcp);
        double l1_sum = 0.0;
        std::size_t l1_count = 0;
        for (std::size_t ep = 0; ep < rec.episodes; ++ep) {
            Rng rng(derive_seed(cfg.seed, 21, ep));
            Rng planner_rng(derive_seed(cfg.seed, 22, ep));
            StateIndex s = sample_state(model.initial_belief(), rng);
            Belief exact = model.initial_belief();
            auto particles = ParticleSet::sample(exact, cfg.filter.particles, planner_rng);
            double ret = 0.0, discount = 1.0;
            for (std::size_t t = 0; t < cfg.horizon && !model.is_terminal(s); ++t) {
                const auto t0 = std::chrono::steady_clock::now();
                const ActionIndex a = planner.plan_action(particles, planner_rng);
                rec.t_seconds += seconds_since(t0);
                const auto step = env_step(env, s, a, t, rng);
                ret += discount * step.reward;
                discount *= gamma;
                const auto dist = acting_distribution(cfg, setup, step.obs.vision);
                const auto znv = nonvision(model, step.obs.nonvision);
                auto fr = particle_filter_update(model, particles, a, dist, znv, cfg.filter, planner_rng);
                rec.fallbacks += fr.fallback ? 1 : 0;
                particles = std::move(fr.particles);
                exact = pbp_update(model, exact, a, dist, znv).belief;
                l1_sum += belief_l1(exact, particles, model.num_states());
                ++l1_count;
                s = step.next;
                if (step.done) break;
            }
            rec.returns.push_back(ret);
        }
        rec.belief_l1 = l1_count ? l1_sum / static_cast<double>(l1_count) : 0.0;
    }
    const auto stats = summarize(rec.returns);
    rec.V = stats.mean;
    rec.ci95 = stats.ci95;
    return rec;
}

std::vector<ResultRecord> sweep_noise(const ExperimentConfig& cfg, const std::vector<double>& probabilities,
                                      PolicyCache* cache) {
    for (double p : probabilities) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("sweep.probabilities", "must lie in [0,1]");
    }
    PolicyCache local;
    std::vector<ResultRecord> out;
    for (double p : probabilities) {
        ExperimentConfig c = cfg;
        c.corruption.noise_probability = p;
        out.push_back(run_experiment(c, cache ? cache : &local));
    }
    return out;
}

ReturnStats evaluate_on_planning_model(const PlanningModel& pm, const PlannerEvidence& evidence,
                                       const AlphaVectorSet& policy, std::size_t episodes, std::size_t horizon,
                                       std::uint64_t seed) {
    const auto& m = pm.model();
    const auto& space = m.states();
    BeliefStepper stepper(pm, evidence);
    std::vector<double> returns;
    std::vector<double> w;
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        Rng rng(derive_seed(seed, 41, ep));
        StateIndex s = sample_state(m.initial_belief(), rng);
        Belief b = m.initial_belief();
        double ret = 0.0, discount = 1.0;
        for (std::size_t t = 0; t < horizon && !m.is_terminal(s); ++t) {
            const ActionIndex a = policy.action(b);
            ret += discount * m.reward(s, a);
            discount *= m.discount();
            const auto succ = m.successors(s, a);
            w.clear();
            for (const auto& sc : succ) w.push_back(sc.prob);
            const StateIndex next = succ[sample_index(w, rng)].next;
            const auto& row = pm.vision().rows[space.vision_class(next)];
            w.clear();
            for (const auto& [v, p] : row) w.push_back(p);
            const std::size_t v = row[sample_index(w, rng)].first;
            w.assign(m.num_nonvision_obs(), 0.0);
            for (std::size_t z = 0; z < w.size(); ++z) w[z] = m.nonvision_obs_prob(next, z);
            const std::size_t znv = sample_index(w, rng);
            const auto predicted = stepper.predict(b, a);
            b = stepper.next(predicted, pm.observation_index(v, znv)).belief;
            s = next;
        }
        returns.push_back(ret);
    }
    return summarize(returns);
}

}  // namespace pbp
