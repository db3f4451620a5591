#pragma once

#include <cstdint>
#include <string>

#include "pbp/perception.hpp"
#include "pbp/random.hpp"

namespace pbp {

/// Emulates a trained, calibrated classifier. Each output is softmax(sharpness * l)
/// with l_i ~ N(0,1) and the true class's logit shifted by a bias that is solved
/// so that E[argmax == true class] equals `accuracy`.
struct SyntheticChannelSpec {
    std::size_t classes = 2;
    double accuracy = 0.9;
    double sharpness = 1.0;
    /// Corrupted outputs become confident and wrong instead of near-uniform.
    bool overconfident_on_corrupt = false;
    std::uint64_t seed = 0;
    /// Std-dev of Gaussian noise added to the stored uncertainty score (clamped to [0,1]).
    double uncertainty_noise = 0.0;
};

struct SyntheticChannel {
    PerceptionTable table;
    VisionDataset perc{Split::perc};
    VisionDataset plan{Split::plan};
    VisionDataset act{Split::act};
};

/// Probability that the biased logit is the largest of `classes` standard normals.
double expected_argmax_accuracy(double bias, std::size_t classes);

/// Inverse of expected_argmax_accuracy by bisection; 0 for chance-level accuracy.
double calibrate_bias(double accuracy, std::size_t classes);

PerceptionOutput draw_perception_output(std::size_t true_class, std::size_t classes, double bias,
                                        double sharpness, double uncertainty_noise, Rng& rng);

/// Near point mass (0.99) on a uniformly chosen wrong class.
PerceptionOutput draw_overconfident_output(std::size_t true_class, std::size_t classes, Rng& rng);

/// Observation IDs named "<split>-c<class>-<k>", `ids_per_class` fresh IDs per
/// class in each of the three splits. Deterministic given the channel seed.
SyntheticChannel synthesize_channel(const SyntheticChannelSpec& spec, std::size_t ids_per_class);

std::string observation_name(const std::string& prefix, std::size_t vision_class, std::size_t k);

}  // namespace pbp
