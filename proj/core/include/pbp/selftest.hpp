#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pbp/model.hpp"
#include "pbp/random.hpp"

namespace pbp {

/// A random vision-factorizable POMDP together with its vision observation
/// function, which a real vision POMDP would not have; property checks use it
/// to build the exact posterior.
struct RandomVpomdp {
    std::shared_ptr<const VPomdpModel> model;
    /// obs_v[c][z] = O_v(z | c).
    std::vector<std::vector<double>> obs_v;
    std::size_t num_vision_obs = 0;

    /// Pr(s_v | z_v) under a uniform prior over vision classes.
    std::vector<double> exact_posterior(std::size_t z) const;
    /// O_v(z_v | s_v) * O_nv(z_nv | s) per state.
    std::vector<double> likelihood(std::size_t z, std::optional<std::size_t> z_nv) const;
};

struct RandomVpomdpLimits {
    std::size_t max_states = 12;
    std::size_t max_actions = 4;
    std::size_t max_vision_obs = 8;
    std::size_t max_nonvision_obs = 3;
    bool pure_vision = false;
};

RandomVpomdp random_vpomdp(Rng& rng, const RandomVpomdpLimits& limits = {});

/// Random distribution with roughly `zero_fraction` exact zeros; at least one entry is positive.
std::vector<double> random_simplex(std::size_t n, Rng& rng, double zero_fraction = 0.0);
Belief random_belief(std::size_t n, Rng& rng, double zero_fraction = 0.3);

struct CheckResult {
    std::string name;
    bool passed = false;
    std::size_t cases = 0;
    /// Largest deviation seen (0 for exact checks that passed).
    double worst = 0.0;
    double tolerance = 0.0;
};

/// PBP update with the exact posterior vs the Bayes update, sup-norm.
CheckResult check_exact_posterior_equivalence(std::uint64_t seed, std::size_t models = 100,
                                              std::size_t beliefs = 50, double tol = 1e-10);
/// Pure-vision PBP update vs multiplicative pooling, bit-for-bit.
CheckResult check_pooling_identity(std::uint64_t seed, std::size_t cases = 1000);
/// Rescaled perception distributions give the same posterior.
CheckResult check_scale_invariance(std::uint64_t seed, std::size_t cases = 200, double tol = 1e-12);

std::vector<CheckResult> run_selftest(std::uint64_t seed);

}  // namespace pbp
