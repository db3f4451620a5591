#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pbp/belief.hpp"
#include "pbp/model.hpp"
#include "pbp/perception.hpp"

namespace pbp {

/// Perception probabilities below this are treated as exactly zero.
inline constexpr double kPerceptionFloor = 1e-12;

struct UpdateResult {
    Belief belief;
    /// Set when the normalizer vanished and the uniform fallback belief was returned.
    bool fallback = false;
};

/// Perception-based belief update:
///   b'(s') ∝ f(s'_v | z_v) * O_nv(z_nv | s') * Pr(s' | b, a)
/// with the O_nv factor dropped when `z_nv` is absent (pure vision). A zero
/// normalizer yields the uniform distribution over all states with the flag set.
UpdateResult pbp_update(const VPomdpModel& model, const Belief& b, ActionIndex a,
                        std::span<const double> perc_dist, std::optional<std::size_t> z_nv);

/// Same update starting from the propagated distribution, given as its support
/// in ascending state order. Planners call this to reuse one propagation across
/// many observations.
UpdateResult pbp_update_predicted(const VPomdpModel& model, std::span<const Belief::Entry> predicted,
                                  std::span<const double> perc_dist, std::optional<std::size_t> z_nv);

/// Nonzero entries of a dense distribution, ascending.
std::vector<Belief::Entry> support_of(std::span<const double> dense);

/// Repeats a vision-class distribution across the non-vision components.
std::vector<double> lift_to_states(const StateSpace& space, std::span<const double> dist_v);

/// Pointwise product of two vectors over S, renormalized. Throws EmptyBeliefError
/// when the product has no mass.
std::vector<double> multiplicative_pool(std::span<const double> d1, std::span<const double> d2);

/// pbp_update with the classifier output passed through the configured wrapper.
UpdateResult uncertainty_aware_update(const VPomdpModel& model, const Belief& b, ActionIndex a,
                                      const PerceptionOutput& out, std::optional<std::size_t> z_nv,
                                      const UqConfig& cfg);

/// Baseline update that trusts the current perception output as the vision
/// marginal: b'(s) ∝ f(s_v | z_v) * m(s_nv), where m is the non-vision marginal of
/// Pr(s' | b, a) reweighted by O_nv(z_nv | s').
UpdateResult psrl_update_predicted(const VPomdpModel& model, std::span<const Belief::Entry> predicted,
                                   std::span<const double> perc_dist, std::optional<std::size_t> z_nv);

UpdateResult psrl_update(const VPomdpModel& model, const Belief& b, ActionIndex a,
                         std::span<const double> perc_dist, std::optional<std::size_t> z_nv);

}  // namespace pbp
