#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pbp/perception.hpp"

namespace pbp {

/// JSON lines, one record per observation:
///   {"obs_id": "...", "dist": [...], "uncertainty": u, "label": c}
/// This is also the import format for outputs of an external classifier.
void write_perception_table(const PerceptionTable& table, std::ostream& out);
PerceptionTable read_perception_table(std::istream& in);

void save_perception_table(const PerceptionTable& table, const std::filesystem::path& path);
PerceptionTable load_perception_table(const std::filesystem::path& path);

/// Split manifest: {"perc": [ids...], "plan": [...], "act": [...]}, each ID listed
/// once per dataset pair. Labels come from the table.
void save_split_manifest(const PerceptionTable& table, const std::vector<const VisionDataset*>& datasets,
                         const std::filesystem::path& path);
std::map<Split, VisionDataset> load_split_manifest(const PerceptionTable& table, const std::filesystem::path& path);

}  // namespace pbp
