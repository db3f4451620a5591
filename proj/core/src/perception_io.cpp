#include "pbp/perception_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "pbp/errors.hpp"

namespace pbp {

using nlohmann::json;

void write_perception_table(const PerceptionTable& table, std::ostream& out) {
    for (const auto& r : table.records()) {
        json line = {{"obs_id", r.name}, {"dist", r.output.dist}, {"uncertainty", r.output.uncertainty}, {"label", r.label}};
        out << line.dump() << '\n';
    }
}

PerceptionTable read_perception_table(std::istream& in) {
    PerceptionTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto rec = json::parse(line);
            PerceptionOutput out{rec.at("dist").get<Distribution>(), rec.at("uncertainty").get<double>()};
            table.add(rec.at("obs_id").get<std::string>(), std::move(out), rec.at("label").get<std::size_t>());
        } catch (const json::exception& e) {
            throw InvalidArgument("perception table line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return table;
}

void save_perception_table(const PerceptionTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    write_perception_table(table, out);
}

PerceptionTable load_perception_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    return read_perception_table(in);
}

void save_split_manifest(const PerceptionTable& table, const std::vector<const VisionDataset*>& datasets,
                         const std::filesystem::path& path) {
    json doc = json::object();
    for (const auto* d : datasets) {
        json ids = json::array();
        for (const auto& [id, label] : d->pairs()) ids.push_back(table.name(id));
        doc[to_string(d->split())] = ids;
    }
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << doc.dump(1) << '\n';
}

std::map<Split, VisionDataset> load_split_manifest(const PerceptionTable& table, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw InvalidArgument("split manifest: " + std::string(e.what()));
    }
    std::map<Split, VisionDataset> out;
    for (const auto& [key, ids] : doc.items()) {
        const Split split = split_from_string(key);
        VisionDataset d(split);
        for (const auto& name : ids) {
            const auto id = table.find(name.get<std::string>());
            if (!id) throw LookupError("split manifest references unknown id '" + name.get<std::string>() + "'");
            d.add(*id, table.label(*id));
        }
        out.emplace(split, std::move(d));
    }
    return out;
}

}  // namespace pbp
