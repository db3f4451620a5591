#include "pbp/synthetic_channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "pbp/errors.hpp"

namespace pbp {

namespace {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

double expected_argmax_accuracy(double bias, std::size_t classes) {
    if (classes < 1) throw InvalidArgument("expected_argmax_accuracy: zero classes");
    if (classes == 1) return 1.0;
    // Simpson's rule on the density of the true logit.
    const double lo = bias - 10.0, hi = bias + 10.0;
    const int n = 4000;
    const double h = (hi - lo) / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + i * h;
        const double f = normal_pdf(x - bias) * std::pow(normal_cdf(x), static_cast<double>(classes - 1));
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += w * f;
    }
    return std::clamp(sum * h / 3.0, 0.0, 1.0);
}

double calibrate_bias(double accuracy, std::size_t classes) {
    const double chance = 1.0 / static_cast<double>(classes);
    if (!(accuracy >= chance - 1e-12 && accuracy <= 1.0)) {
        throw InvalidArgument("accuracy must lie in [1/classes, 1]");
    }
    if (accuracy <= chance) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (expected_argmax_accuracy(hi, classes) < accuracy && hi < 64.0) hi *= 2.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (expected_argmax_accuracy(mid, classes) < accuracy ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

PerceptionOutput draw_perception_output(std::size_t true_class, std::size_t classes, double bias,
                                        double sharpness, double uncertainty_noise, Rng& rng) {
    if (!(sharpness > 0.0)) throw InvalidArgument("sharpness must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> logits(classes);
    for (auto& l : logits) l = normal(rng);
    logits[true_class] += bias;
    const double peak = *std::max_element(logits.begin(), logits.end());
    Distribution dist(classes);
    double total = 0.0;
    for (std::size_t i = 0; i < classes; ++i) {
        dist[i] = std::exp(sharpness * (logits[i] - peak));
        total += dist[i];
    }
    for (auto& p : dist) p /= total;
    double u = classes > 1 ? uncertainty_entropy(dist) : 0.0;
    if (uncertainty_noise > 0.0) {
        u = std::clamp(u + std::normal_distribution<double>(0.0, uncertainty_noise)(rng), 0.0, 1.0);
    }
    return {std::move(dist), u};
}

PerceptionOutput draw_overconfident_output(std::size_t true_class, std::size_t classes, Rng& rng) {
    if (classes < 2) throw InvalidArgument("overconfident output needs two classes");
    std::size_t wrong = uniform_index(classes - 1, rng);
    if (wrong >= true_class) ++wrong;
    const double rest = 0.01 / static_cast<double>(classes - 1);
    Distribution dist(classes, rest);
    dist[wrong] = 0.99;
    const double u = uncertainty_entropy(dist);
    return {std::move(dist), u};
}

std::string observation_name(const std::string& prefix, std::size_t vision_class, std::size_t k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "-c%03zu-%04zu", vision_class, k);
    return prefix + buf;
}

SyntheticChannel synthesize_channel(const SyntheticChannelSpec& spec, std::size_t ids_per_class) {
    if (spec.classes < 1) throw InvalidArgument("synthesize_channel: zero classes");
    if (ids_per_class < 1) throw InvalidArgument("synthesize_channel: ids_per_class must be positive");
    const bool perfect = spec.accuracy >= 1.0;
    const double bias = perfect ? 0.0 : calibrate_bias(spec.accuracy, spec.classes);

    SyntheticChannel channel;
    channel.table = PerceptionTable(spec.classes);
    const Split splits[] = {Split::perc, Split::plan, Split::act};
    VisionDataset* datasets[] = {&channel.perc, &channel.plan, &channel.act};
    for (std::size_t si = 0; si < 3; ++si) {
        for (std::size_t c = 0; c < spec.classes; ++c) {
            for (std::size_t k = 0; k < ids_per_class; ++k) {
                PerceptionOutput out;
                if (perfect) {
                    out.dist.assign(spec.classes, 0.0);
                    out.dist[c] = 1.0;
                    out.uncertainty = 0.0;
                } else {
                    Rng rng(derive_seed(spec.seed, si, c, k));
                    out = draw_perception_output(c, spec.classes, bias, spec.sharpness, spec.uncertainty_noise, rng);
                }
                const auto id = channel.table.add(observation_name(to_string(splits[si]), c, k), std::move(out), c);
                datasets[si]->add(id, c);
            }
        }
    }
    return channel;
}

}  // namespace pbp
