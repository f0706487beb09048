#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spit/metrics.hpp"
#include "spit/scenegen.hpp"
#include "spit/tracker.hpp"

namespace spit::io {

using json = nlohmann::json;

/// Compact JSON with every floating-point number printed to 17 significant digits, so a
/// read-back reproduces the exact double. Non-finite numbers become null.
std::string dump(const json &j);

/// One line of a scene file.
struct SceneRecord {
    std::uint64_t seed = 0;
    GroundTruthScene scene;
    std::optional<SlotGrid> observations;
    json provenance;  // generator configuration and run seed
};

json grid_to_json(const SlotGrid &grid);
SlotGrid grid_from_json(const json &j, std::size_t expected_slots);

json scene_to_json(const SceneRecord &rec);
SceneRecord scene_from_json(const json &j);

/// Writes one JSON object per line. Throws IoError naming the path on failure.
void write_scenes(const std::filesystem::path &path, const std::vector<SceneRecord> &scenes);
/// Parses and validates every line; throws IoError (with line number) on malformed input.
std::vector<SceneRecord> read_scenes(const std::filesystem::path &path);

json to_json(const SceneConfig &cfg);
json to_json(const ObservationConfig &cfg);
json to_json(const TrainConfig &cfg);
json to_json(const PitStrategy &s);
/// Missing keys keep their defaults; unknown keys are rejected with ConfigError.
SceneConfig scene_config_from_json(const json &j, SceneConfig base = {});
ObservationConfig observation_config_from_json(const json &j, ObservationConfig base = {});
TrainConfig train_config_from_json(const json &j, TrainConfig base = {});
PitStrategy strategy_from_json(const json &j, PitStrategy base = {});

json checkpoint_to_json(const Checkpoint &ckpt);
Checkpoint checkpoint_from_json(const json &j);
void write_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
Checkpoint read_checkpoint(const std::filesystem::path &path);

json metrics_to_json(const MetricsReport &r);

void write_text(const std::filesystem::path &path, const std::string &text);
std::string read_text(const std::filesystem::path &path);
json read_json(const std::filesystem::path &path);

/// threshold,miss_ratio,fp_ratio rows.
std::string det_csv(const DetCurve &curve);

}  // namespace spit::io
