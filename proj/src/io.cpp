#include "spit/io.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "spit/errors.hpp"

namespace spit::io {

namespace {

void dump_to(const json &j, std::string &out) {
    switch (j.type()) {
    case json::value_t::number_float: {
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            out += "null";
        } else {
            out += fmt::format("{:.17g}", v);
        }
        break;
    }
    case json::value_t::array: {
        out += '[';
        bool first = true;
        for (const auto &e : j) {
            if (!first) out += ',';
            first = false;
            dump_to(e, out);
        }
        out += ']';
        break;
    }
    case json::value_t::object: {
        out += '{';
        bool first = true;
        for (const auto &[k, v] : j.items()) {
            if (!first) out += ',';
            first = false;
            out += json(k).dump();
            out += ':';
            dump_to(v, out);
        }
        out += '}';
        break;
    }
    default: out += j.dump();
    }
}

void reject_unknown(const json &j, std::initializer_list<const char *> allowed,
                    const char *section) {
    if (!j.is_object()) throw ConfigError(fmt::format("'{}' must be a JSON object", section));
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto &[k, v] : j.items())
        if (!keys.contains(k)) throw ConfigError(fmt::format("unknown key '{}' in '{}'", k, section));
}

template <typename T>
void take(const json &j, const char *key, T &field) {
    if (!j.contains(key)) return;
    try {
        field = j.at(key).get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(fmt::format("bad value for '{}': {}", key, e.what()));
    }
}

}  // namespace

std::string dump(const json &j) {
    std::string out;
    dump_to(j, out);
    return out;
}

json grid_to_json(const SlotGrid &grid) {
    json frames = json::array();
    for (std::size_t t = 0; t < grid.frames(); ++t) {
        json row = json::array();
        for (const Vec3 &v : grid.frame(t)) row.push_back(json::array({v.x, v.y, v.z}));
        frames.push_back(std::move(row));
    }
    return frames;
}

SlotGrid grid_from_json(const json &j, std::size_t expected_slots) {
    if (!j.is_array()) throw IoError("frame array expected");
    SlotGrid grid(j.size(), expected_slots);
    for (std::size_t t = 0; t < j.size(); ++t) {
        const json &row = j[t];
        if (!row.is_array() || row.size() != expected_slots)
            throw IoError(fmt::format("frame {} does not have {} slots", t, expected_slots));
        for (std::size_t m = 0; m < expected_slots; ++m) {
            const json &v = row[m];
            if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
                !v[2].is_number())
                throw IoError(fmt::format("frame {} slot {} is not an [x,y,z] triple", t, m));
            grid.at(t, m) = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
        }
    }
    return grid;
}

json scene_to_json(const SceneRecord &rec) {
    json j;
    j["seed"] = rec.seed;
    j["frame_period_s"] = rec.scene.frame_period_s;
    j["M"] = rec.scene.slots();
    j["track_count"] = rec.scene.track_count;
    j["frames"] = grid_to_json(rec.scene.frames);
    if (rec.observations) j["observations"] = grid_to_json(*rec.observations);
    if (!rec.provenance.is_null()) j["provenance"] = rec.provenance;
    return j;
}

SceneRecord scene_from_json(const json &j) {
    try {
        SceneRecord rec;
        rec.seed = j.at("seed").get<std::uint64_t>();
        const auto slots = j.at("M").get<std::size_t>();
        rec.scene.frame_period_s = j.at("frame_period_s").get<double>();
        rec.scene.track_count = j.at("track_count").get<int>();
        rec.scene.frames = grid_from_json(j.at("frames"), slots);
        if (j.contains("observations")) {
            rec.observations = grid_from_json(j.at("observations"), slots);
            if (!rec.observations->same_shape(rec.scene.frames))
                throw IoError("observations and frames differ in length");
        }
        if (j.contains("provenance")) rec.provenance = j.at("provenance");
        if (const std::string bad = check_ground_truth(rec.scene); !bad.empty())
            throw IoError("invalid ground truth: " + bad);
        return rec;
    } catch (const json::exception &e) {
        throw IoError(fmt::format("malformed scene record: {}", e.what()));
    }
}

void write_text(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
    out << text;
    out.flush();
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

std::string read_text(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::filesystem::path &path) {
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::exception &e) {
        throw IoError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
    }
}

void write_scenes(const std::filesystem::path &path, const std::vector<SceneRecord> &scenes) {
    std::string text;
    for (const auto &rec : scenes) {
        text += dump(scene_to_json(rec));
        text += '\n';
    }
    write_text(path, text);
}

std::vector<SceneRecord> read_scenes(const std::filesystem::path &path) {
    std::istringstream in(read_text(path));
    std::vector<SceneRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(scene_from_json(json::parse(line)));
        } catch (const json::exception &e) {
            throw IoError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
        } catch (const IoError &e) {
            throw IoError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
        }
    }
    return out;
}

json to_json(const SceneConfig &c) {
    return {{"scene_length_s", c.scene_length_s},   {"step_s", c.step_s},
            {"frame_period_s", c.frame_period_s},   {"birth_rates", c.birth_rates},
            {"death_prob", c.death_prob},           {"min_duration_s", c.min_duration_s},
            {"max_simultaneous", c.max_simultaneous}, {"slots", c.slots},
            {"room_half_extent", c.room_half_extent}, {"exclusion_radius", c.exclusion_radius}};
}

json to_json(const ObservationConfig &c) {
    return {{"noise_deg", c.noise_deg},
            {"shuffle", c.shuffle},
            {"activity_noise", c.activity_noise},
            {"max_norm", c.max_norm}};
}

json to_json(const PitStrategy &s) {
    return {{"strategy", std::string(to_string(s.kind))},
            {"window", s.window},
            {"mode", std::string(to_string(s.mode))},
            {"distance", s.distance == DistanceKind::euclidean ? "euclidean" : "squared"}};
}

json to_json(const TrainConfig &c) {
    json j = to_json(c.strategy);
    j.update({{"epochs", c.epochs},
              {"learning_rate", c.learning_rate},
              {"weight_decay", c.weight_decay},
              {"grad_clip_norm", c.grad_clip_norm},
              {"batch_size", c.batch_size},
              {"hidden", c.hidden},
              {"slots", c.slots},
              {"seed", c.seed},
              {"aux_loss", c.aux_loss},
              {"aux_weight", c.aux_weight}});
    return j;
}

SceneConfig scene_config_from_json(const json &j, SceneConfig c) {
    reject_unknown(j,
                   {"scene_length_s", "step_s", "frame_period_s", "birth_rates", "death_prob",
                    "min_duration_s", "max_simultaneous", "slots", "room_half_extent",
                    "exclusion_radius"},
                   "scene");
    take(j, "scene_length_s", c.scene_length_s);
    take(j, "step_s", c.step_s);
    c.frame_period_s = c.step_s;
    take(j, "frame_period_s", c.frame_period_s);
    take(j, "birth_rates", c.birth_rates);
    take(j, "death_prob", c.death_prob);
    take(j, "min_duration_s", c.min_duration_s);
    take(j, "max_simultaneous", c.max_simultaneous);
    take(j, "slots", c.slots);
    take(j, "room_half_extent", c.room_half_extent);
    take(j, "exclusion_radius", c.exclusion_radius);
    return c;
}

ObservationConfig observation_config_from_json(const json &j, ObservationConfig c) {
    reject_unknown(j, {"noise_deg", "shuffle", "activity_noise", "max_norm"}, "observation");
    take(j, "noise_deg", c.noise_deg);
    take(j, "shuffle", c.shuffle);
    take(j, "activity_noise", c.activity_noise);
    take(j, "max_norm", c.max_norm);
    return c;
}

PitStrategy strategy_from_json(const json &j, PitStrategy s) {
    std::string name;
    try {
        if (j.contains("strategy")) {
            take(j, "strategy", name);
            s.kind = parse_pit_kind(name);
        }
        take(j, "window", s.window);
        if (j.contains("mode")) {
            take(j, "mode", name);
            s.mode = parse_window_mode(name);
        }
    } catch (const ParameterError &e) {
        throw ConfigError(e.what());
    }
    if (j.contains("distance")) {
        take(j, "distance", name);
        if (name == "euclidean") {
            s.distance = DistanceKind::euclidean;
        } else if (name == "squared") {
            s.distance = DistanceKind::squared;
        } else {
            throw ConfigError(fmt::format("unknown distance '{}'", name));
        }
    }
    return s;
}

TrainConfig train_config_from_json(const json &j, TrainConfig c) {
    reject_unknown(j,
                   {"strategy", "window", "mode", "distance", "epochs", "learning_rate",
                    "weight_decay", "grad_clip_norm", "batch_size", "hidden", "slots", "seed",
                    "aux_loss", "aux_weight"},
                   "train");
    c.strategy = strategy_from_json(j, c.strategy);
    take(j, "epochs", c.epochs);
    take(j, "learning_rate", c.learning_rate);
    take(j, "weight_decay", c.weight_decay);
    take(j, "grad_clip_norm", c.grad_clip_norm);
    take(j, "batch_size", c.batch_size);
    take(j, "hidden", c.hidden);
    take(j, "slots", c.slots);
    take(j, "seed", c.seed);
    take(j, "aux_loss", c.aux_loss);
    take(j, "aux_weight", c.aux_weight);
    return c;
}

json checkpoint_to_json(const Checkpoint &ckpt) {
    json params = json::object();
    for (int b = 0; b < TrackerParams::block_count; ++b) {
        const auto block = static_cast<TrackerParams::Block>(b);
        const auto values = ckpt.params.block(block);
        if (values.empty()) continue;
        params[std::string(TrackerParams::name(block))] =
            std::vector<double>(values.begin(), values.end());
    }
    const TrackerShape &shape = ckpt.params.shape();
    return {{"format", "spit-checkpoint/1"},
            {"config", to_json(ckpt.config)},
            {"shape", {{"slots", shape.slots}, {"hidden", shape.hidden}, {"aux_head", shape.aux_head}}},
            {"epoch", ckpt.epoch},
            {"train_loss_history", ckpt.train_loss_history},
            {"val_loss_history", ckpt.val_loss_history},
            {"params", params}};
}

Checkpoint checkpoint_from_json(const json &j) {
    try {
        if (j.at("format").get<std::string>() != "spit-checkpoint/1")
            throw IoError("unsupported checkpoint format");
        Checkpoint ckpt;
        ckpt.config = train_config_from_json(j.at("config"));
        const json &s = j.at("shape");
        const TrackerShape shape{s.at("slots").get<int>(), s.at("hidden").get<int>(),
                                 s.at("aux_head").get<bool>()};
        ckpt.params = TrackerParams(shape);
        const json &params = j.at("params");
        for (int b = 0; b < TrackerParams::block_count; ++b) {
            const auto block = static_cast<TrackerParams::Block>(b);
            auto dst = ckpt.params.block(block);
            if (dst.empty()) continue;
            const auto src = params.at(std::string(TrackerParams::name(block))).get<std::vector<double>>();
            if (src.size() != dst.size())
                throw IoError(fmt::format("parameter '{}' has {} values, expected {}",
                                          TrackerParams::name(block), src.size(), dst.size()));
            std::copy(src.begin(), src.end(), dst.begin());
        }
        ckpt.epoch = j.at("epoch").get<int>();
        ckpt.train_loss_history = j.at("train_loss_history").get<std::vector<double>>();
        ckpt.val_loss_history = j.at("val_loss_history").get<std::vector<double>>();
        return ckpt;
    } catch (const json::exception &e) {
        throw IoError(fmt::format("malformed checkpoint: {}", e.what()));
    }
}

void write_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
    write_text(path, dump(checkpoint_to_json(ckpt)) + "\n");
}

Checkpoint read_checkpoint(const std::filesystem::path &path) {
    try {
        return checkpoint_from_json(read_json(path));
    } catch (const IoError &e) {
        throw IoError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

json metrics_to_json(const MetricsReport &r) {
    return {{"mae_deg", r.mae_deg ? json(*r.mae_deg) : json(nullptr)},
            {"ids_count", r.ids_count},
            {"ids_ratio", r.ids_ratio},
            {"ids_per_gt_instance", r.ids_per_gt_instance},
            {"miss_ratio", r.miss_ratio},
            {"fp_ratio", r.fp_ratio},
            {"counts",
             {{"true_positives", r.counts.true_positives},
              {"misses", r.counts.misses},
              {"false_positives", r.counts.false_positives},
              {"gt_active", r.counts.gt_active},
              {"frames", r.counts.frames},
              {"gt_tracks", r.counts.gt_tracks}}}};
}

std::string det_csv(const DetCurve &curve) {
    std::string out = "threshold,miss_ratio,fp_ratio\n";
    for (const DetSample &s : curve.samples)
        out += fmt::format("{:.17g},{:.17g},{:.17g}\n", s.threshold, s.miss_ratio, s.fp_ratio);
    return out;
}

}  // namespace spit::io
