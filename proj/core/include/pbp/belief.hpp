#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pbp {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

inline constexpr double kSimplexTolerance = 1e-9;
inline constexpr double kLoadTolerance = 1e-6;

/// Sparse probability distribution over states, sorted by state index.
/// Entries with zero probability are never stored.
class Belief {
public:
    struct Entry {
        StateIndex state;
        double prob;
        bool operator==(const Entry&) const = default;
    };

    Belief() = default;

    static Belief point_mass(StateIndex s);
    static Belief uniform(std::size_t num_states);

    /// Builds from a dense vector. Rows within kLoadTolerance of the simplex are
    /// renormalized; anything else throws InvalidArgument.
    static Belief from_dense(std::span<const double> dense);

    /// Normalizes nonnegative weights by their sum without tolerance checks.
    /// Throws EmptyBeliefError when every weight is zero.
    static Belief normalized(std::span<const double> weights);

    /// Takes ownership of pre-sorted, strictly positive entries summing to one.
    static Belief from_sorted_entries(std::vector<Entry> entries);

    std::span<const Entry> entries() const noexcept { return entries_; }
    std::size_t support_size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    double prob(StateIndex s) const;
    std::vector<double> dense(std::size_t num_states) const;

    bool operator==(const Belief&) const = default;

private:
    std::vector<Entry> entries_;
};

double l1_distance(const Belief& a, const Belief& b);
double l1_distance(const Belief& a, std::span<const double> dense);

/// Validates a dense distribution against the simplex within `tol`; returns the
/// renormalized copy. Throws InvalidArgument with `what` as context.
std::vector<double> checked_simplex(std::span<const double> dist, double tol, const char* what);

}  // namespace pbp
