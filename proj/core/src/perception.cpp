#include "pbp/perception.hpp"

#include <algorithm>
#include <cmath>

#include "pbp/belief.hpp"
#include "pbp/errors.hpp"

namespace pbp {

Distribution uniform_distribution(std::size_t classes) {
    if (classes == 0) throw InvalidArgument("uniform_distribution: zero classes");
    return Distribution(classes, 1.0 / static_cast<double>(classes));
}

std::size_t argmax(std::span<const double> dist) {
    if (dist.empty()) throw InvalidArgument("argmax of empty distribution");
    return static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
}

double uncertainty_confidence(std::span<const double> dist) {
    return 1.0 - dist[argmax(dist)];
}

double uncertainty_entropy(std::span<const double> dist) {
    if (dist.size() < 2) throw InvalidArgument("uncertainty_entropy: needs at least two classes");
    double h = 0.0;
    for (double p : dist) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return std::clamp(h / std::log2(static_cast<double>(dist.size())), 0.0, 1.0);
}

Distribution apply_tuq(const PerceptionOutput& out, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("apply_tuq: eps must lie in [0,1]");
    if (out.uncertainty <= eps) return out.dist;
    return uniform_distribution(out.dist.size());
}

Distribution apply_wuq(const PerceptionOutput& out) {
    const double u = out.uncertainty;
    if (!(u < 0.5)) return uniform_distribution(out.dist.size());
    const double uniform = 1.0 / static_cast<double>(out.dist.size());
    Distribution blended(out.dist.size());
    for (std::size_t i = 0; i < blended.size(); ++i) blended[i] = u * uniform + (1.0 - u) * out.dist[i];
    return blended;
}

double uncertainty_score(const PerceptionOutput& out, UncertaintyFunction fn) {
    switch (fn) {
        case UncertaintyFunction::confidence: return uncertainty_confidence(out.dist);
        case UncertaintyFunction::entropy: return uncertainty_entropy(out.dist);
        case UncertaintyFunction::table: return out.uncertainty;
    }
    return out.uncertainty;
}

Distribution effective_distribution(const PerceptionOutput& out, const UqConfig& cfg) {
    if (cfg.mode == UqMode::none) return out.dist;
    PerceptionOutput scored{out.dist, uncertainty_score(out, cfg.function)};
    return cfg.mode == UqMode::tuq ? apply_tuq(scored, cfg.eps) : apply_wuq(scored);
}

const char* to_string(UncertaintyFunction fn) {
    switch (fn) {
        case UncertaintyFunction::confidence: return "confidence";
        case UncertaintyFunction::entropy: return "entropy";
        case UncertaintyFunction::table: return "table-supplied";
    }
    return "?";
}

const char* to_string(UqMode mode) {
    switch (mode) {
        case UqMode::none: return "none";
        case UqMode::tuq: return "tuq";
        case UqMode::wuq: return "wuq";
    }
    return "?";
}

UncertaintyFunction uncertainty_function_from_string(const std::string& name) {
    if (name == "confidence") return UncertaintyFunction::confidence;
    if (name == "entropy") return UncertaintyFunction::entropy;
    if (name == "table-supplied" || name == "table") return UncertaintyFunction::table;
    throw InvalidArgument("unknown uncertainty function '" + name + "'");
}

ObsId PerceptionTable::add(std::string name, PerceptionOutput output, std::size_t label) {
    if (num_classes_ == 0) num_classes_ = output.dist.size();
    if (output.dist.size() != num_classes_) throw InvalidArgument("perception output '" + name + "': wrong class count");
    if (label >= num_classes_) throw InvalidArgument("perception output '" + name + "': label out of range");
    if (!(output.uncertainty >= 0.0 && output.uncertainty <= 1.0)) {
        throw InvalidArgument("perception output '" + name + "': uncertainty outside [0,1]");
    }
    output.dist = checked_simplex(output.dist, kLoadTolerance, ("perception output '" + name + "'").c_str());
    if (index_.contains(name)) throw InvalidArgument("duplicate observation id '" + name + "'");
    const auto id = static_cast<ObsId>(records_.size());
    index_.emplace(name, id);
    records_.push_back({std::move(name), std::move(output), label});
    return id;
}

const PerceptionTable::Record& PerceptionTable::record(ObsId id) const {
    if (id >= records_.size()) throw LookupError("unknown observation id #" + std::to_string(id));
    return records_[id];
}

const PerceptionOutput& PerceptionTable::predict(ObsId id) const { return record(id).output; }

const PerceptionOutput& PerceptionTable::predict(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw LookupError("unknown observation id '" + name + "'");
    return records_[it->second].output;
}

std::optional<ObsId> PerceptionTable::find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const char* to_string(Split split) {
    switch (split) {
        case Split::perc: return "perc";
        case Split::plan: return "plan";
        case Split::act: return "act";
    }
    return "?";
}

Split split_from_string(const std::string& name) {
    if (name == "perc") return Split::perc;
    if (name == "plan") return Split::plan;
    if (name == "act") return Split::act;
    throw InvalidArgument("unknown split '" + name + "'");
}

void VisionDataset::add(ObsId id, std::size_t label) {
    auto [it, inserted] = labels_.emplace(id, label);
    if (!inserted && it->second != label) {
        throw InvalidArgument("observation #" + std::to_string(id) + " appears with two labels");
    }
    pairs_.emplace_back(id, label);
}

}  // namespace pbp
