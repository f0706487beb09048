#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "spit/errors.hpp"
#include "spit/io.hpp"
#include "spit/metrics.hpp"
#include "spit/scenegen.hpp"
#include "spit/tracker.hpp"
#include "svg.hpp"

namespace spit::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

/// Sections of a --config file; every section is optional.
struct FileConfig {
    SceneConfig scene;
    ObservationConfig observation;
    TrainConfig train;
    double det_threshold = kDefaultDetThreshold;
    double cutoff_deg = kDefaultCutoffDeg;
    std::vector<double> thresholds;
};

FileConfig load_config(const std::string &path) {
    FileConfig fc;
    if (path.empty()) return fc;
    const json j = io::read_json(path);
    if (!j.is_object()) throw ConfigError(fmt::format("{}: top level must be an object", path));
    for (const auto &[key, value] : j.items()) {
        if (key == "scene") {
            fc.scene = io::scene_config_from_json(value);
        } else if (key == "observation") {
            fc.observation = io::observation_config_from_json(value);
        } else if (key == "train") {
            fc.train = io::train_config_from_json(value);
        } else if (key == "eval") {
            for (const auto &[k, v] : value.items()) {
                try {
                    if (k == "det_threshold") {
                        fc.det_threshold = v.get<double>();
                    } else if (k == "cutoff_deg") {
                        fc.cutoff_deg = v.get<double>();
                    } else if (k == "thresholds") {
                        fc.thresholds = v.get<std::vector<double>>();
                    } else {
                        throw ConfigError(fmt::format("unknown key '{}' in 'eval'", k));
                    }
                } catch (const json::exception &e) {
                    throw ConfigError(fmt::format("bad value for '{}': {}", k, e.what()));
                }
            }
        } else {
            throw ConfigError(fmt::format("{}: unknown section '{}'", path, key));
        }
    }
    return fc;
}

std::string fnv1a_hex(const std::string &bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

json file_fingerprint(const std::string &path, std::size_t records) {
    return {{"file", fs::path(path).filename().string()},
            {"records", records},
            {"fnv1a64", fnv1a_hex(io::read_text(path))}};
}

std::vector<TrainingScene> training_scenes(const std::vector<io::SceneRecord> &recs,
                                           const std::string &path) {
    std::vector<TrainingScene> out;
    out.reserve(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (!recs[i].observations)
            throw ConfigError(fmt::format("{}: scene {} has no observations (generate with "
                                          "--observations)",
                                          path, i));
        out.push_back({recs[i].scene, *recs[i].observations});
    }
    return out;
}

std::vector<double> default_thresholds() {
    std::vector<double> th;
    for (int i = 0; i <= 20; ++i) th.push_back(i / 20.0);
    return th;
}

void ensure_dir(const std::string &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create directory '{}': {}", dir, ec.message()));
}

/// CSV files carry their provenance in a leading comment line.
std::string csv_with_provenance(const json &provenance, const std::string &body) {
    return "# " + io::dump(provenance) + "\n" + body;
}

// ---------------------------------------------------------------------------------------------

struct GenArgs {
    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::size_t count = 100;
    bool observations = false;
};

int cmd_gen(const GenArgs &a, std::ostream &out) {
    const FileConfig fc = load_config(a.config);
    fc.scene.validate();
    const auto samples = generate_scenes(fc.scene, fc.observation, *a.seed, a.count);
    std::vector<io::SceneRecord> recs;
    recs.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        io::SceneRecord rec{samples[i].seed, samples[i].scene, std::nullopt,
                            json{{"command", "gen"},
                                 {"run_seed", *a.seed},
                                 {"index", i},
                                 {"scene", io::to_json(fc.scene)},
                                 {"observation", io::to_json(fc.observation)}}};
        if (a.observations) rec.observations = samples[i].observations;
        recs.push_back(std::move(rec));
    }
    io::write_scenes(a.out, recs);
    out << fmt::format("wrote {} scenes to {}\n", recs.size(), a.out);
    return ok;
}

// ---------------------------------------------------------------------------------------------

struct StrategyArgs {
    std::optional<std::string> strategy, mode;
    std::optional<int> window;

    void apply(PitStrategy &s) const {
        if (strategy) s.kind = parse_pit_kind(*strategy);
        if (window) s.window = *window;
        if (mode) s.mode = parse_window_mode(*mode);
    }
};

struct TrainArgs {
    std::string config, scenes, val, out;
    std::optional<std::uint64_t> seed;
    StrategyArgs strategy;
    std::optional<int> epochs, hidden, batch;
    std::optional<double> learning_rate;
    bool aux = false;
    bool quiet = false;
};

int cmd_train(const TrainArgs &a, std::ostream &out) {
    const FileConfig fc = load_config(a.config);
    TrainConfig cfg = fc.train;
    cfg.seed = *a.seed;
    a.strategy.apply(cfg.strategy);
    if (a.epochs) cfg.epochs = *a.epochs;
    if (a.hidden) cfg.hidden = *a.hidden;
    if (a.batch) cfg.batch_size = *a.batch;
    if (a.learning_rate) cfg.learning_rate = *a.learning_rate;
    if (a.aux) cfg.aux_loss = true;

    const auto train_recs = io::read_scenes(a.scenes);
    if (train_recs.empty()) throw ParameterError(fmt::format("{} holds no scenes", a.scenes));
    cfg.slots = static_cast<int>(train_recs.front().scene.slots());
    cfg.validate();
    const auto train_set = training_scenes(train_recs, a.scenes);
    std::vector<TrainingScene> val_set;
    json provenance{{"command", "train"},
                    {"seed", cfg.seed},
                    {"train_scenes", file_fingerprint(a.scenes, train_recs.size())}};
    if (!a.val.empty()) {
        const auto val_recs = io::read_scenes(a.val);
        val_set = training_scenes(val_recs, a.val);
        provenance["val_scenes"] = file_fingerprint(a.val, val_recs.size());
    }

    const Checkpoint ckpt = train(train_set, val_set, cfg, [&](const EpochReport &r) {
        if (a.quiet) return;
        std::string line = fmt::format("epoch {}/{} train {:.6f}", r.epoch + 1, cfg.epochs,
                                       r.train_loss);
        if (r.val_loss) line += fmt::format(" val {:.6f}", *r.val_loss);
        out << line << '\n';
    });
    json j = io::checkpoint_to_json(ckpt);
    j["provenance"] = provenance;
    io::write_text(a.out, io::dump(j) + "\n");
    out << fmt::format("wrote checkpoint to {}\n", a.out);
    return ok;
}

// ---------------------------------------------------------------------------------------------

struct EvalSettings {
    double det_threshold = kDefaultDetThreshold;
    double cutoff_deg = kDefaultCutoffDeg;
    std::vector<double> thresholds;
};

struct Evaluation {
    MetricsReport report;
    DetCurve det;
    std::optional<double> fpit_loss;  // absent for the oracle estimate
    std::vector<GroundTruthScene> gt;
    std::vector<EstimateScene> est;
};

Evaluation evaluate_checkpoint(const Checkpoint *ckpt, const std::vector<io::SceneRecord> &recs,
                               const std::string &scenes_path, const EvalSettings &s) {
    if (recs.empty()) throw ParameterError(fmt::format("{} holds no scenes", scenes_path));
    Evaluation ev;
    for (const auto &r : recs) ev.gt.push_back(r.scene);
    if (ckpt == nullptr) {
        for (const auto &r : recs) ev.est.push_back(EstimateScene{r.scene.frames, r.scene.frame_period_s});
    } else {
        const auto m = static_cast<std::size_t>(ckpt->params.shape().slots);
        for (const auto &r : recs)
            if (r.scene.slots() != m)
                throw ConfigError(fmt::format("checkpoint has M={} but {} has M={}", m,
                                              scenes_path, r.scene.slots()));
        const auto scenes = training_scenes(recs, scenes_path);
        for (const auto &sc : scenes)
            ev.est.push_back(forward(ckpt->params, sc.observations, sc.gt.frame_period_s));
        ev.fpit_loss = mean_loss(ckpt->params, scenes, PitStrategy::fpit());
    }
    ev.report = evaluate(ev.gt, ev.est, s.det_threshold, s.cutoff_deg);
    ev.det = det_curve(ev.gt, ev.est, s.thresholds, s.cutoff_deg);
    return ev;
}

double recall(const MetricsReport &r) {
    return r.counts.gt_active > 0
               ? static_cast<double>(r.counts.true_positives) / static_cast<double>(r.counts.gt_active)
               : 0.0;
}

struct EvalArgs {
    std::string config, checkpoint, scenes, out;
    std::optional<std::uint64_t> seed;
    std::vector<double> thresholds;
    std::optional<double> det_threshold, cutoff;
    bool oracle = false;
    bool plots = false;
    std::size_t plot_scenes = 3;
};

EvalSettings settings_from(const FileConfig &fc, const std::vector<double> &thresholds,
                           const std::optional<double> &det, const std::optional<double> &cutoff) {
    EvalSettings s{fc.det_threshold, fc.cutoff_deg, fc.thresholds};
    if (!thresholds.empty()) s.thresholds = thresholds;
    if (s.thresholds.empty()) s.thresholds = default_thresholds();
    std::sort(s.thresholds.begin(), s.thresholds.end());
    if (det) s.det_threshold = *det;
    if (cutoff) s.cutoff_deg = *cutoff;
    return s;
}

int cmd_eval(const EvalArgs &a, std::ostream &out) {
    if (!a.oracle && a.checkpoint.empty())
        throw ConfigError("eval needs --checkpoint (or --oracle)");
    const FileConfig fc = load_config(a.config);
    const EvalSettings s = settings_from(fc, a.thresholds, a.det_threshold, a.cutoff);
    const auto recs = io::read_scenes(a.scenes);
    std::optional<Checkpoint> ckpt;
    if (!a.oracle) ckpt = io::read_checkpoint(a.checkpoint);
    const Evaluation ev = evaluate_checkpoint(ckpt ? &*ckpt : nullptr, recs, a.scenes, s);

    json provenance{{"command", "eval"},
                    {"seed", *a.seed},
                    {"det_threshold", s.det_threshold},
                    {"cutoff_deg", s.cutoff_deg},
                    {"thresholds", s.thresholds},
                    {"scenes", file_fingerprint(a.scenes, recs.size())}};
    if (ckpt) {
        provenance["checkpoint"] = file_fingerprint(a.checkpoint, 1);
        provenance["checkpoint_config"] = io::to_json(ckpt->config);
    } else {
        provenance["oracle"] = true;
    }

    json metrics = io::metrics_to_json(ev.report);
    metrics["recall"] = recall(ev.report);
    metrics["fpit_loss"] = ev.fpit_loss ? json(*ev.fpit_loss) : json(nullptr);
    const json doc{{"provenance", provenance}, {"metrics", metrics}};

    ensure_dir(a.out);
    const fs::path dir(a.out);
    io::write_text(dir / "metrics.json", io::dump(doc) + "\n");
    io::write_text(dir / "det.csv", csv_with_provenance(provenance, io::det_csv(ev.det)));
    if (a.plots) {
        const std::string label = ckpt ? std::string(to_string(ckpt->config.strategy.kind)) : "oracle";
        io::write_text(dir / "det.svg", plots::det_svg(ev.det, "DET curve (" + label + ")"));
        for (std::size_t i = 0; i < std::min(a.plot_scenes, ev.gt.size()); ++i)
            io::write_text(dir / fmt::format("scene_{:03d}.svg", i),
                           plots::timeline_svg(ev.gt[i], ev.est[i], s.det_threshold,
                                               fmt::format("scene {} ({})", i, label)));
    }

    const auto &r = ev.report;
    out << fmt::format("MAE {} deg, IDS {} (ratio {:.4f}), miss {:.4f}, FP {:.4f}, recall {:.4f}\n",
                       r.mae_deg ? fmt::format("{:.3f}", *r.mae_deg) : std::string("n/a"),
                       r.ids_count, r.ids_ratio, r.miss_ratio, r.fp_ratio, recall(r));
    out << fmt::format("wrote {}\n", a.out);
    return ok;
}

// ---------------------------------------------------------------------------------------------

struct CompareArgs {
    std::string config, scenes, out;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> checkpoints;
    std::optional<double> det_threshold, cutoff;
};

double ids_quotient(double num, double den) {
    if (num == den) return 1.0;
    return den == 0.0 ? std::numeric_limits<double>::infinity() : num / den;
}

int cmd_compare(const CompareArgs &a, std::ostream &out) {
    if (a.checkpoints.size() < 2) throw ConfigError("compare needs at least two --checkpoint");
    const FileConfig fc = load_config(a.config);
    const EvalSettings s = settings_from(fc, {}, a.det_threshold, a.cutoff);
    const auto recs = io::read_scenes(a.scenes);
    if (recs.empty()) throw ParameterError(fmt::format("{} holds no scenes", a.scenes));

    struct Row {
        std::string label;
        Checkpoint ckpt;
        Evaluation ev;
    };
    std::vector<Row> rows;
    for (const auto &path : a.checkpoints) {
        std::string label = fs::path(path).stem().string();
        for (const auto &r : rows)
            if (r.label == label) label += fmt::format("#{}", rows.size());
        Row row{label, io::read_checkpoint(path), {}};
        if (!rows.empty() && !(row.ckpt.params.shape().slots == rows.front().ckpt.params.shape().slots))
            throw ConfigError(fmt::format("{} has M={} but {} has M={}", path,
                                          row.ckpt.params.shape().slots, a.checkpoints.front(),
                                          rows.front().ckpt.params.shape().slots));
        row.ev = evaluate_checkpoint(&row.ckpt, recs, a.scenes, s);
        rows.push_back(std::move(row));
    }

    json provenance{{"command", "compare"},
                    {"seed", *a.seed},
                    {"det_threshold", s.det_threshold},
                    {"cutoff_deg", s.cutoff_deg},
                    {"scenes", file_fingerprint(a.scenes, recs.size())}};
    json configs = json::array();
    for (const auto &r : rows) configs.push_back({{"label", r.label}, {"config", io::to_json(r.ckpt.config)}});
    provenance["checkpoints"] = configs;

    const auto num = [](const std::optional<double> &v) {
        return v ? fmt::format("{:.17g}", *v) : std::string();
    };
    std::string csv = "checkpoint,strategy,window,mae_deg,ids_count,ids_ratio,miss_ratio,fp_ratio,recall,fpit_loss\n";
    std::string text = fmt::format("{:<20} {:>8} {:>8} {:>10} {:>6} {:>9} {:>9} {:>9} {:>9}\n",
                                   "checkpoint", "strategy", "window", "MAE(deg)", "IDS",
                                   "IDS ratio", "miss", "FP", "recall");
    for (const auto &r : rows) {
        const auto &m = r.ev.report;
        const auto &st = r.ckpt.config.strategy;
        csv += fmt::format("{},{},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.label,
                           to_string(st.kind), st.window, num(m.mae_deg), m.ids_count, m.ids_ratio,
                           m.miss_ratio, m.fp_ratio, recall(m), num(r.ev.fpit_loss));
        text += fmt::format("{:<20} {:>8} {:>8} {:>10} {:>6} {:>9.4f} {:>9.4f} {:>9.4f} {:>9.4f}\n",
                            r.label, to_string(st.kind), st.window,
                            m.mae_deg ? fmt::format("{:.3f}", *m.mae_deg) : "n/a", m.ids_count,
                            m.ids_ratio, m.miss_ratio, m.fp_ratio, recall(m));
    }
    std::string qcsv = "numerator,denominator,ids_ratio_quotient\n";
    text += "\nIDS ratio quotients (row / column)\n";
    text += fmt::format("{:<20}", "");
    for (const auto &c : rows) text += fmt::format(" {:>12}", c.label);
    text += '\n';
    for (const auto &r : rows) {
        text += fmt::format("{:<20}", r.label);
        for (const auto &c : rows) {
            const double q = ids_quotient(r.ev.report.ids_ratio, c.ev.report.ids_ratio);
            text += fmt::format(" {:>12.4f}", q);
            if (&r != &c) qcsv += fmt::format("{},{},{:.17g}\n", r.label, c.label, q);
        }
        text += '\n';
    }

    ensure_dir(a.out);
    const fs::path dir(a.out);
    io::write_text(dir / "compare.csv", csv_with_provenance(provenance, csv));
    io::write_text(dir / "quotients.csv", csv_with_provenance(provenance, qcsv));
    io::write_text(dir / "compare.txt", "# " + io::dump(provenance) + "\n" + text);
    out << text;
    return ok;
}

// ---------------------------------------------------------------------------------------------

struct GradcheckArgs {
    std::optional<std::uint64_t> seed;
    StrategyArgs strategy;
    int configs = 20, frames = 10, slots = 3, hidden = 8;
    double step = 1e-5, tolerance = 1e-5;
    bool aux = false;
    std::string out;
};

/// Random scene with unit reference vectors in a random subset of slots and noisy shuffled
/// observations of them.
TrainingScene random_check_scene(int frames, int slots, Rng &rng) {
    std::bernoulli_distribution on(0.6);
    std::normal_distribution<double> g(0.0, 1.0);
    GroundTruthScene gt{SlotGrid(frames, slots)};
    gt.track_count = slots;
    for (Vec3 &v : gt.frames.values()) {
        if (!on(rng)) continue;
        Vec3 r{g(rng), g(rng), g(rng)};
        v = r * (1.0 / norm(r));
    }
    ObservationConfig ocfg;
    ocfg.noise_deg = 20.0;
    ocfg.activity_noise = 0.2;
    return {gt, observe(gt, ocfg, rng)};
}

int cmd_gradcheck(const GradcheckArgs &a, std::ostream &out) {
    PitStrategy strategy;
    a.strategy.apply(strategy);
    if (a.configs < 1 || a.frames < 1 || a.slots < 1 || a.hidden < 1)
        throw ParameterError("configs, frames, slots and hidden must be >= 1");
    double worst = 0.0;
    json runs = json::array();
    for (int c = 0; c < a.configs; ++c) {
        const std::uint64_t seed = derive_scene_seed(*a.seed, static_cast<std::uint64_t>(c));
        Rng rng(seed);
        const TrainingScene scene = random_check_scene(a.frames, a.slots, rng);
        const auto params = TrackerParams::initialized({a.slots, a.hidden, a.aux}, seed);
        const auto r = grad_check(params, scene, strategy, a.step, a.tolerance);
        worst = std::max(worst, r.max_rel_error);
        out << fmt::format("config {:2d}: max rel error {:.3e} (abs {:.3e}, worst {}) {}\n", c,
                           r.max_rel_error, r.max_abs_error, r.worst_parameter,
                           r.passed ? "ok" : "FAIL");
        runs.push_back({{"config", c},
                        {"seed", seed},
                        {"max_rel_error", r.max_rel_error},
                        {"max_abs_error", r.max_abs_error},
                        {"worst_parameter", r.worst_parameter},
                        {"checked", r.checked},
                        {"passed", r.passed}});
    }
    const bool passed = worst < a.tolerance;
    out << fmt::format("max relative error over {} configs: {:.3e} (tolerance {:g}) {}\n",
                       a.configs, worst, a.tolerance, passed ? "PASS" : "FAIL");
    if (!a.out.empty()) {
        const json doc{{"provenance",
                        {{"command", "gradcheck"},
                         {"seed", *a.seed},
                         {"strategy", io::to_json(strategy)},
                         {"frames", a.frames},
                         {"slots", a.slots},
                         {"hidden", a.hidden},
                         {"aux_head", a.aux},
                         {"step", a.step},
                         {"tolerance", a.tolerance}}},
                       {"max_rel_error", worst},
                       {"passed", passed},
                       {"runs", runs}};
        io::write_text(a.out, io::dump(doc) + "\n");
    }
    return passed ? ok : check_failed;
}

void add_strategy_flags(CLI::App *cmd, StrategyArgs &s) {
    cmd->add_option("--strategy", s.strategy, "PIT variant")
        ->check(CLI::IsMember({"fpit", "upit", "spit"}));
    cmd->add_option("--window", s.window, "sliding window length in frames")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--mode", s.mode, "sliding window alignment")
        ->check(CLI::IsMember({"causal", "centered"}));
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Sliding-window PIT experiments: scene generation, training and evaluation"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    GenArgs gen;
    auto *g = app.add_subcommand("gen", "generate synthetic scenes (JSON lines)");
    g->add_option("--config", gen.config, "JSON config with 'scene'/'observation' sections");
    g->add_option("--seed", gen.seed, "run seed")->required();
    g->add_option("--count", gen.count, "number of scenes")->check(CLI::PositiveNumber);
    g->add_flag("--observations", gen.observations, "include noisy observation arrays");
    g->add_option("--out", gen.out, "output scene file")->required();

    TrainArgs tr;
    auto *t = app.add_subcommand("train", "train a tracker on a scene file");
    t->add_option("--config", tr.config, "JSON config with a 'train' section");
    t->add_option("--seed", tr.seed, "initialisation and shuffling seed")->required();
    t->add_option("--scenes", tr.scenes, "training scenes (with observations)")->required();
    t->add_option("--val", tr.val, "validation scenes");
    add_strategy_flags(t, tr.strategy);
    t->add_option("--epochs", tr.epochs)->check(CLI::NonNegativeNumber);
    t->add_option("--hidden", tr.hidden)->check(CLI::PositiveNumber);
    t->add_option("--batch", tr.batch)->check(CLI::PositiveNumber);
    t->add_option("--learning-rate", tr.learning_rate)->check(CLI::PositiveNumber);
    t->add_flag("--aux", tr.aux, "auxiliary fPIT head on the first recurrent layer");
    t->add_flag("--quiet", tr.quiet, "suppress per-epoch lines");
    t->add_option("--out", tr.out, "output checkpoint")->required();

    EvalArgs ev;
    auto *e = app.add_subcommand("eval", "evaluate a checkpoint");
    e->add_option("--config", ev.config, "JSON config with an 'eval' section");
    e->add_option("--seed", ev.seed, "run seed recorded in the outputs")->required();
    e->add_option("--checkpoint", ev.checkpoint);
    e->add_option("--scenes", ev.scenes)->required();
    e->add_option("--threshold", ev.thresholds, "DET sweep threshold (repeatable)")
        ->check(CLI::Range(0.0, 1.0));
    e->add_option("--det-threshold", ev.det_threshold, "threshold for the metrics report")
        ->check(CLI::Range(0.0, 1.0));
    e->add_option("--cutoff", ev.cutoff, "angular cutoff in degrees")->check(CLI::PositiveNumber);
    e->add_flag("--oracle", ev.oracle, "use the reference itself as the estimate (debug)");
    e->add_flag("--plots", ev.plots, "write SVG DET curve and scene timelines");
    e->add_option("--plot-scenes", ev.plot_scenes, "number of timeline plots");
    e->add_option("--out", ev.out, "output directory")->required();

    CompareArgs cmp;
    auto *c = app.add_subcommand("compare", "compare checkpoints on one scene file");
    c->add_option("--config", cmp.config);
    c->add_option("--seed", cmp.seed)->required();
    c->add_option("--checkpoint", cmp.checkpoints, "checkpoint (repeat for each)")->required();
    c->add_option("--scenes", cmp.scenes)->required();
    c->add_option("--det-threshold", cmp.det_threshold)->check(CLI::Range(0.0, 1.0));
    c->add_option("--cutoff", cmp.cutoff)->check(CLI::PositiveNumber);
    c->add_option("--out", cmp.out, "output directory")->required();

    GradcheckArgs gc;
    auto *k = app.add_subcommand("gradcheck", "finite-difference check of the BPTT gradients");
    k->add_option("--seed", gc.seed)->required();
    add_strategy_flags(k, gc.strategy);
    k->add_option("--configs", gc.configs);
    k->add_option("--frames", gc.frames);
    k->add_option("--slots", gc.slots);
    k->add_option("--hidden", gc.hidden);
    k->add_option("--step", gc.step)->check(CLI::PositiveNumber);
    k->add_option("--tolerance", gc.tolerance)->check(CLI::PositiveNumber);
    k->add_flag("--aux", gc.aux);
    k->add_option("--out", gc.out, "optional JSON report");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError &pe) {
        std::ostringstream o, x;
        const int code = app.exit(pe, o, x);
        out << o.str();
        err << x.str();
        return code == 0 ? ok : usage;
    }

    try {
        if (*g) return cmd_gen(gen, out);
        if (*t) return cmd_train(tr, out);
        if (*e) return cmd_eval(ev, out);
        if (*c) return cmd_compare(cmp, out);
        if (*k) return cmd_gradcheck(gc, out);
    } catch (const ConfigError &x) {
        err << "configuration error: " << x.what() << '\n';
        return config_error;
    } catch (const IoError &x) {
        err << "I/O error: " << x.what() << '\n';
        return io_error;
    } catch (const NumericError &x) {
        err << "numeric error: " << x.what() << '\n';
        return numeric_error;
    } catch (const std::invalid_argument &x) {
        err << "invalid input: " << x.what() << '\n';
        return invalid_input;
    } catch (const std::exception &x) {
        err << "error: " << x.what() << '\n';
        return failure;
    }
    return failure;
}

}  // namespace spit::cli
