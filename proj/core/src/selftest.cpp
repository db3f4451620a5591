#include "pbp/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pbp/errors.hpp"
#include "pbp/pbp_update.hpp"

namespace pbp {

std::vector<double> random_simplex(std::size_t n, Rng& rng, double zero_fraction) {
    std::vector<double> w(n, 0.0);
    const std::size_t keep = uniform_index(n, rng);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i != keep && uniform01(rng) < zero_fraction) continue;
        w[i] = 0.05 + uniform01(rng);
        total += w[i];
    }
    for (auto& p : w) p /= total;
    return w;
}

Belief random_belief(std::size_t n, Rng& rng, double zero_fraction) {
    return Belief::normalized(random_simplex(n, rng, zero_fraction));
}

std::vector<double> RandomVpomdp::exact_posterior(std::size_t z) const {
    std::vector<double> post(obs_v.size());
    double total = 0.0;
    for (std::size_t c = 0; c < obs_v.size(); ++c) total += obs_v[c][z];
    for (std::size_t c = 0; c < obs_v.size(); ++c) post[c] = obs_v[c][z] / total;
    return post;
}

std::vector<double> RandomVpomdp::likelihood(std::size_t z, std::optional<std::size_t> z_nv) const {
    const auto& space = model->states();
    std::vector<double> out(model->num_states());
    for (StateIndex s = 0; s < out.size(); ++s) {
        out[s] = obs_v[space.vision_class(s)][z] * (z_nv ? model->nonvision_obs_prob(s, *z_nv) : 1.0);
    }
    return out;
}

RandomVpomdp random_vpomdp(Rng& rng, const RandomVpomdpLimits& limits) {
    const std::size_t classes = 2 + uniform_index(std::min<std::size_t>(limits.max_states / 2, 4) - 1, rng);
    const std::size_t rest = 1 + uniform_index(std::max<std::size_t>(limits.max_states / classes, 1), rng);
    const std::size_t n = classes * rest;

    ModelData d;
    // Put the vision variable second half the time so the split is not always the leading index.
    StateVariable vis{"v", {}}, other{"x", {}};
    for (std::size_t i = 0; i < classes; ++i) vis.values.push_back("v" + std::to_string(i));
    for (std::size_t i = 0; i < rest; ++i) other.values.push_back("x" + std::to_string(i));
    if (uniform01(rng) < 0.5) {
        d.state_vars = {vis, other};
        d.vision_state_indices = {0};
    } else {
        d.state_vars = {other, vis};
        d.vision_state_indices = {1};
    }
    const std::size_t na = 1 + uniform_index(limits.max_actions, rng);
    for (std::size_t a = 0; a < na; ++a) d.actions.push_back("a" + std::to_string(a));
    d.transition.assign(na, {});
    for (std::size_t a = 0; a < na; ++a) {
        for (std::size_t s = 0; s < n; ++s) d.transition[a].push_back(random_simplex(n, rng, 0.5));
    }
    d.reward.assign(n, std::vector<double>(na));
    for (auto& row : d.reward) {
        for (auto& r : row) r = 2.0 * uniform01(rng) - 1.0;
    }
    d.discount = 0.9;
    d.initial_belief.assign(n, 1.0 / static_cast<double>(n));
    if (!limits.pure_vision) {
        const std::size_t nz = 1 + uniform_index(limits.max_nonvision_obs, rng);
        for (std::size_t z = 0; z < nz; ++z) d.nonvision_obs.push_back("z" + std::to_string(z));
        for (std::size_t s = 0; s < n; ++s) d.nonvision_obs_fn.push_back(random_simplex(nz, rng, 0.3));
    }

    RandomVpomdp out;
    out.model = std::make_shared<const VPomdpModel>(std::move(d));
    out.num_vision_obs = 1 + uniform_index(limits.max_vision_obs, rng);
    for (std::size_t c = 0; c < classes; ++c) out.obs_v.push_back(random_simplex(out.num_vision_obs, rng, 0.3));
    // Every observation must be emittable by some class for its posterior to exist.
    for (std::size_t z = 0; z < out.num_vision_obs; ++z) {
        double total = 0.0;
        for (const auto& row : out.obs_v) total += row[z];
        if (total > 0.0) continue;
        auto& row = out.obs_v[uniform_index(classes, rng)];
        row[z] = 0.5;
        double sum = 0.0;
        for (double p : row) sum += p;
        for (auto& p : row) p /= sum;
    }
    return out;
}

namespace {

double sup_norm(const Belief& a, const Belief& b, std::size_t n) {
    double d = 0.0;
    for (StateIndex s = 0; s < n; ++s) d = std::max(d, std::abs(a.prob(s) - b.prob(s)));
    return d;
}

}  // namespace

CheckResult check_exact_posterior_equivalence(std::uint64_t seed, std::size_t models, std::size_t beliefs, double tol) {
    CheckResult r{"exact-posterior equivalence", true, 0, 0.0, tol};
    Rng rng(seed);
    for (std::size_t i = 0; i < models; ++i) {
        const auto rv = random_vpomdp(rng);
        const auto& m = *rv.model;
        for (std::size_t k = 0; k < beliefs; ++k) {
            const auto b = random_belief(m.num_states(), rng);
            for (ActionIndex a = 0; a < m.num_actions(); ++a) {
                const auto pred = propagate(m, b, a);
                for (std::size_t z = 0; z < rv.num_vision_obs; ++z) {
                    const auto post = rv.exact_posterior(z);
                    for (std::size_t znv = 0; znv < m.num_nonvision_obs(); ++znv) {
                        const auto lik = rv.likelihood(z, znv);
                        double pz = 0.0;
                        for (StateIndex s = 0; s < pred.size(); ++s) pz += lik[s] * pred[s];
                        // Observations the model cannot emit have no Bayes posterior to compare with.
                        if (!(pz > 0.0)) continue;
                        const auto expect = standard_belief_update(m, b, a, lik);
                        const auto got = pbp_update(m, b, a, post, znv);
                        const double d = got.fallback ? 1.0 : sup_norm(expect, got.belief, m.num_states());
                        r.worst = std::max(r.worst, d);
                        ++r.cases;
                    }
                }
            }
        }
    }
    r.passed = r.worst <= tol;
    return r;
}

CheckResult check_pooling_identity(std::uint64_t seed, std::size_t cases) {
    CheckResult r{"multiplicative pooling identity", true, 0, 0.0, 0.0};
    Rng rng(seed);
    RandomVpomdpLimits lim;
    lim.pure_vision = true;
    for (std::size_t i = 0; i < cases; ++i) {
        const auto rv = random_vpomdp(rng, lim);
        const auto& m = *rv.model;
        const auto b = random_belief(m.num_states(), rng);
        const ActionIndex a = uniform_index(m.num_actions(), rng);
        const auto perc = random_simplex(m.states().num_vision_classes(), rng, 0.2);
        const auto pred = propagate(m, b, a);
        const auto lifted = lift_to_states(m.states(), perc);
        const auto got = pbp_update(m, b, a, perc, std::nullopt);
        ++r.cases;
        std::vector<double> pooled;
        try {
            pooled = multiplicative_pool(pred, lifted);
        } catch (const EmptyBeliefError&) {
            // Both sides must agree that the evidence is inconsistent.
            if (!got.fallback) r.worst = std::max(r.worst, 1.0);
            continue;
        }
        const auto dense = got.belief.dense(m.num_states());
        for (StateIndex s = 0; s < dense.size(); ++s) {
            if (dense[s] != pooled[s]) r.worst = std::max(r.worst, std::abs(dense[s] - pooled[s]));
        }
    }
    r.passed = r.worst == 0.0;
    return r;
}

CheckResult check_scale_invariance(std::uint64_t seed, std::size_t cases, double tol) {
    CheckResult r{"perception scale invariance", true, 0, 0.0, tol};
    Rng rng(seed);
    for (std::size_t i = 0; i < cases; ++i) {
        const auto rv = random_vpomdp(rng);
        const auto& m = *rv.model;
        const auto b = random_belief(m.num_states(), rng);
        const ActionIndex a = uniform_index(m.num_actions(), rng);
        const std::size_t znv = uniform_index(m.num_nonvision_obs(), rng);
        const auto perc = random_simplex(m.states().num_vision_classes(), rng, 0.2);
        const auto base = pbp_update(m, b, a, perc, znv);
        for (double c : {0.1, 3.0, 1e6}) {
            auto scaled = perc;
            for (auto& p : scaled) p *= c;
            const auto got = pbp_update(m, b, a, scaled, znv);
            const double d = got.fallback != base.fallback ? 1.0 : sup_norm(base.belief, got.belief, m.num_states());
            r.worst = std::max(r.worst, d);
            ++r.cases;
        }
    }
    r.passed = r.worst <= tol;
    return r;
}

std::vector<CheckResult> run_selftest(std::uint64_t seed) {
    return {check_exact_posterior_equivalence(derive_seed(seed, 1)), check_pooling_identity(derive_seed(seed, 2)),
            check_scale_invariance(derive_seed(seed, 3))};
}

}  // namespace pbp
