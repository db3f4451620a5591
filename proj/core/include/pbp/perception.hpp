#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace pbp {

/// Dense distribution over vision classes.
using Distribution = std::vector<double>;

/// Classifier output for one vision observation: a distribution over vision
/// classes plus an uncertainty score in [0, 1].
struct PerceptionOutput {
    Distribution dist;
    double uncertainty = 0.0;
};

Distribution uniform_distribution(std::size_t classes);
std::size_t argmax(std::span<const double> dist);

/// 1 - max_i dist_i.
double uncertainty_confidence(std::span<const double> dist);

/// Shannon entropy in bits divided by log2(classes), so the score lies in [0,1].
double uncertainty_entropy(std::span<const double> dist);

/// Threshold wrapper: keeps the classifier output when uncertainty <= eps,
/// otherwise returns the uniform distribution.
Distribution apply_tuq(const PerceptionOutput& out, double eps);

/// Weighted wrapper: u*U + (1-u)*dist for u < 0.5, uniform otherwise.
Distribution apply_wuq(const PerceptionOutput& out);

enum class UncertaintyFunction { confidence, entropy, table };
enum class UqMode { none, tuq, wuq };

struct UqConfig {
    UqMode mode = UqMode::none;
    double eps = 0.1;
    UncertaintyFunction function = UncertaintyFunction::table;
};

/// Uncertainty score under the chosen function; `table` keeps the stored score.
double uncertainty_score(const PerceptionOutput& out, UncertaintyFunction fn);

/// The distribution a belief update consumes after the configured wrapper.
Distribution effective_distribution(const PerceptionOutput& out, const UqConfig& cfg);

const char* to_string(UncertaintyFunction fn);
const char* to_string(UqMode mode);
UncertaintyFunction uncertainty_function_from_string(const std::string& name);

using ObsId = std::uint32_t;

/// Precomputed classifier outputs keyed by vision observation ID.
class PerceptionTable {
public:
    struct Record {
        std::string name;
        PerceptionOutput output;
        std::size_t label;
    };

    PerceptionTable() = default;
    explicit PerceptionTable(std::size_t num_classes) : num_classes_(num_classes) {}

    /// Registers a new ID; throws InvalidArgument on duplicates or malformed outputs.
    ObsId add(std::string name, PerceptionOutput output, std::size_t label);

    const PerceptionOutput& predict(ObsId id) const;
    const PerceptionOutput& predict(const std::string& name) const;
    std::optional<ObsId> find(const std::string& name) const;

    const Record& record(ObsId id) const;
    std::size_t label(ObsId id) const { return record(id).label; }
    const std::string& name(ObsId id) const { return record(id).name; }

    std::size_t size() const noexcept { return records_.size(); }
    std::size_t num_classes() const noexcept { return num_classes_; }
    const std::vector<Record>& records() const noexcept { return records_; }

private:
    std::size_t num_classes_ = 0;
    std::vector<Record> records_;
    std::unordered_map<std::string, ObsId> index_;
};

enum class Split { perc, plan, act };
const char* to_string(Split split);
Split split_from_string(const std::string& name);

/// Finite multiset of (observation, vision class) pairs. An ID may repeat but
/// always with the same label.
class VisionDataset {
public:
    VisionDataset() = default;
    explicit VisionDataset(Split split) : split_(split) {}

    void add(ObsId id, std::size_t label);

    Split split() const noexcept { return split_; }
    const std::vector<std::pair<ObsId, std::size_t>>& pairs() const noexcept { return pairs_; }
    std::size_t size() const noexcept { return pairs_.size(); }

private:
    Split split_ = Split::plan;
    std::vector<std::pair<ObsId, std::size_t>> pairs_;
    std::unordered_map<ObsId, std::size_t> labels_;
};

}  // namespace pbp
