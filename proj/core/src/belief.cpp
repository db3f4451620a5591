#include "pbp/belief.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pbp/errors.hpp"
#include "pbp/random.hpp"

namespace pbp {

std::size_t sample_index(std::span<const double> weights, Rng& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw InvalidArgument("sample_index: weights have no mass");
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        acc += weights[i];
        last_positive = i;
        if (u < acc) return i;
    }
    return last_positive;
}

Belief Belief::point_mass(StateIndex s) {
    Belief b;
    b.entries_.push_back({s, 1.0});
    return b;
}

Belief Belief::uniform(std::size_t num_states) {
    if (num_states == 0) throw InvalidArgument("Belief::uniform: empty state space");
    Belief b;
    b.entries_.reserve(num_states);
    const double p = 1.0 / static_cast<double>(num_states);
    for (StateIndex s = 0; s < num_states; ++s) b.entries_.push_back({s, p});
    return b;
}

std::vector<double> checked_simplex(std::span<const double> dist, double tol, const char* what) {
    double total = 0.0;
    for (double p : dist) {
        if (!std::isfinite(p) || p < 0.0) {
            throw InvalidArgument(std::string(what) + ": negative or non-finite probability");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > tol) {
        throw InvalidArgument(std::string(what) + ": probabilities sum to " + std::to_string(total));
    }
    std::vector<double> out(dist.begin(), dist.end());
    // Leave rows that are already normalized to rounding alone, so that saved
    // tables and models reload bit-for-bit.
    if (std::abs(total - 1.0) > 1e-12) {
        for (double& p : out) p /= total;
    }
    return out;
}

Belief Belief::from_dense(std::span<const double> dense) {
    const auto normalized = checked_simplex(dense, kLoadTolerance, "belief");
    Belief b;
    for (StateIndex s = 0; s < normalized.size(); ++s) {
        if (normalized[s] > 0.0) b.entries_.push_back({s, normalized[s]});
    }
    if (b.entries_.empty()) throw InvalidArgument("belief: empty support");
    return b;
}

Belief Belief::normalized(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw EmptyBeliefError("belief normalizer is zero");
    Belief b;
    for (StateIndex s = 0; s < weights.size(); ++s) {
        if (weights[s] > 0.0) b.entries_.push_back({s, weights[s] / total});
    }
    return b;
}

Belief Belief::from_sorted_entries(std::vector<Entry> entries) {
    Belief b;
    b.entries_ = std::move(entries);
    return b;
}

double Belief::prob(StateIndex s) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), s,
                               [](const Entry& e, StateIndex v) { return e.state < v; });
    return (it != entries_.end() && it->state == s) ? it->prob : 0.0;
}

std::vector<double> Belief::dense(std::size_t num_states) const {
    std::vector<double> out(num_states, 0.0);
    for (const auto& e : entries_) {
        if (e.state >= num_states) throw InvalidArgument("belief state outside state space");
        out[e.state] = e.prob;
    }
    return out;
}

double l1_distance(const Belief& a, const Belief& b) {
    double d = 0.0;
    auto ia = a.entries().begin(), ea = a.entries().end();
    auto ib = b.entries().begin(), eb = b.entries().end();
    while (ia != ea || ib != eb) {
        if (ib == eb || (ia != ea && ia->state < ib->state)) {
            d += ia->prob;
            ++ia;
        } else if (ia == ea || ib->state < ia->state) {
            d += ib->prob;
            ++ib;
        } else {
            d += std::abs(ia->prob - ib->prob);
            ++ia;
            ++ib;
        }
    }
    return d;
}

double l1_distance(const Belief& a, std::span<const double> dense) {
    double d = 0.0;
    auto it = a.entries().begin();
    for (StateIndex s = 0; s < dense.size(); ++s) {
        double p = 0.0;
        if (it != a.entries().end() && it->state == s) {
            p = it->prob;
            ++it;
        }
        d += std::abs(p - dense[s]);
    }
    return d;
}

}  // namespace pbp
