#include "pbp/model_io.hpp"

#include <fstream>

#include "pbp/errors.hpp"

namespace pbp {

using nlohmann::json;

json model_to_json(const VPomdpModel& model) {
    const auto& d = model.data();
    json vars = json::array();
    for (const auto& v : d.state_vars) vars.push_back({{"name", v.name}, {"values", v.values}});
    json doc = {
        {"state_vars", vars},
        {"vision_state_indices", d.vision_state_indices},
        {"actions", d.actions},
        {"transition", d.transition},
        {"reward", d.reward},
        {"discount", d.discount},
        {"initial_belief", d.initial_belief},
        {"nonvision_obs", {{"values", d.nonvision_obs}, {"table", d.nonvision_obs_fn}}},
    };
    if (!d.terminal.empty()) {
        std::vector<std::size_t> terminal;
        for (std::size_t s = 0; s < d.terminal.size(); ++s) {
            if (d.terminal[s]) terminal.push_back(s);
        }
        doc["terminal"] = terminal;
    }
    return doc;
}

VPomdpModel model_from_json(const json& doc) {
    try {
        ModelData d;
        for (const auto& v : doc.at("state_vars")) {
            d.state_vars.push_back({v.at("name").get<std::string>(), v.at("values").get<std::vector<std::string>>()});
        }
        d.vision_state_indices = doc.at("vision_state_indices").get<std::vector<std::size_t>>();
        d.actions = doc.at("actions").get<std::vector<std::string>>();
        d.transition = doc.at("transition").get<std::vector<std::vector<std::vector<double>>>>();
        d.reward = doc.at("reward").get<std::vector<std::vector<double>>>();
        d.discount = doc.at("discount").get<double>();
        d.initial_belief = doc.at("initial_belief").get<std::vector<double>>();
        if (doc.contains("nonvision_obs")) {
            const auto& nv = doc.at("nonvision_obs");
            d.nonvision_obs = nv.at("values").get<std::vector<std::string>>();
            d.nonvision_obs_fn = nv.at("table").get<std::vector<std::vector<double>>>();
        }
        if (doc.contains("terminal")) {
            std::size_t n = 1;
            for (const auto& v : d.state_vars) n *= v.values.size();
            d.terminal.assign(n, false);
            for (auto s : doc.at("terminal").get<std::vector<std::size_t>>()) {
                if (s >= n) throw InvalidArgument("terminal: state index out of range");
                d.terminal[s] = true;
            }
        }
        return VPomdpModel(std::move(d));
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("model file: ") + e.what());
    }
}

VPomdpModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open model file " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InvalidArgument("model file " + path.string() + ": " + e.what());
    }
    return model_from_json(doc);
}

void save_model(const VPomdpModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write model file " + path.string());
    out << model_to_json(model).dump(1) << '\n';
}

}  // namespace pbp
