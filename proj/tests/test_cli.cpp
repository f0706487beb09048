#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "spit/io.hpp"
#include "spit/tracker.hpp"

using namespace spit;
using io::json;
namespace fs = std::filesystem;

namespace {

struct Sandbox {
    fs::path dir;

    explicit Sandbox(const std::string &name)
        : dir(fs::temp_directory_path() / "spit_cli_tests" / name) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }

    std::string path(const std::string &name) const { return (dir / name).string(); }
};

struct Result {
    int code;
    std::string out, err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string &path) { return io::read_text(path); }

void write(const std::string &path, const json &j) { io::write_text(path, j.dump()); }

// Small scenes so training in tests stays quick.
json small_scene_config(int slots = 3) {
    return {{"scene", {{"slots", slots}, {"scene_length_s", 4.0}, {"min_duration_s", 1.0},
                       {"birth_rates", {0.3, 0.2, 0.1}}}}};
}

}  // namespace

TEST_CASE("gen: zero birth rates give all-zero frames") {
    Sandbox sb("gen_zero");
    write(sb.path("cfg.json"), {{"scene", {{"birth_rates", {0.0, 0.0, 0.0}}}}});
    const auto r = invoke({"gen", "--config", sb.path("cfg.json"), "--seed", "5", "--count", "1",
                        "--out", sb.path("s.jsonl")});
    REQUIRE(r.code == 0);
    const std::string text = slurp(sb.path("s.jsonl"));
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
    const json j = json::parse(text);
    for (const auto &frame : j["frames"])
        for (const auto &v : frame)
            for (const auto &x : v) CHECK(x.get<double>() == 0.0);
    CHECK(j["track_count"] == 0);
    CHECK(j["provenance"]["run_seed"] == 5);
}

TEST_CASE("gen: default scenes satisfy the file schema") {
    Sandbox sb("gen_schema");
    REQUIRE(invoke({"gen", "--seed", "11", "--count", "100", "--out", sb.path("s.jsonl")}).code == 0);
    std::ifstream in(sb.path("s.jsonl"));
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        const json j = json::parse(line);
        REQUIRE(j["seed"].is_number_unsigned());
        REQUIRE(j["frame_period_s"].get<double>() == 0.2);
        const int m = j["M"].get<int>();
        REQUIRE(j["frames"].size() == 100);
        CHECK_FALSE(j.contains("observations"));
        for (const auto &frame : j["frames"]) {
            REQUIRE(frame.size() == static_cast<std::size_t>(m));
            int active = 0;
            for (const auto &v : frame) {
                REQUIRE(v.size() == 3);
                const double n = std::hypot(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
                const bool on = n > 0.0;
                if (on) CHECK(std::abs(n - 1.0) < 1e-12);
                active += on;
            }
            CHECK(active <= 3);
        }
        CHECK(j["track_count"].get<int>() >= 0);
    }
    CHECK(lines == 100);
    CHECK(io::read_scenes(sb.path("s.jsonl")).size() == 100);
}

TEST_CASE("gen, train and eval are byte-reproducible") {
    Sandbox a("repro_a"), b("repro_b");
    for (const Sandbox *sb : {&a, &b}) {
        write(sb->path("cfg.json"), small_scene_config());
        REQUIRE(invoke({"gen", "--config", sb->path("cfg.json"), "--seed", "3", "--count", "6",
                     "--observations", "--out", sb->path("s.jsonl")}).code == 0);
        REQUIRE(invoke({"train", "--seed", "4", "--scenes", sb->path("s.jsonl"), "--epochs", "2",
                     "--hidden", "4", "--strategy", "spit", "--out", sb->path("c.json")}).code == 0);
        REQUIRE(invoke({"eval", "--seed", "4", "--checkpoint", sb->path("c.json"), "--scenes",
                     sb->path("s.jsonl"), "--plots", "--out", sb->path("ev")}).code == 0);
    }
    for (const char *f : {"s.jsonl", "c.json", "ev/metrics.json", "ev/det.csv", "ev/det.svg"})
        CHECK_MESSAGE(slurp(a.path(f)) == slurp(b.path(f)), f);
}

TEST_CASE("train: zero epochs stores the initialization and strategy verbatim") {
    Sandbox sb("train_zero");
    write(sb.path("cfg.json"), small_scene_config(4));
    REQUIRE(invoke({"gen", "--config", sb.path("cfg.json"), "--seed", "1", "--count", "2",
                 "--observations", "--out", sb.path("s.jsonl")}).code == 0);
    const auto r = invoke({"train", "--seed", "9", "--scenes", sb.path("s.jsonl"), "--epochs", "0",
                        "--hidden", "6", "--strategy", "spit", "--window", "10", "--out",
                        sb.path("c.json")});
    REQUIRE(r.code == 0);
    const Checkpoint ck = io::read_checkpoint(sb.path("c.json"));
    const auto init = TrackerParams::initialized({4, 6, false}, 9);
    REQUIRE(ck.params.size() == init.size());
    for (std::size_t i = 0; i < init.size(); ++i) CHECK(ck.params.values()[i] == init.values()[i]);
    const json j = json::parse(slurp(sb.path("c.json")));
    CHECK(j["config"]["strategy"] == "spit");
    CHECK(j["config"]["window"] == 10);
    CHECK(j["config"]["seed"] == 9);
    CHECK(j["provenance"]["train_scenes"]["records"] == 2);
}

TEST_CASE("train: scenes without observations are a configuration error") {
    Sandbox sb("train_noobs");
    REQUIRE(invoke({"gen", "--seed", "1", "--count", "1", "--out", sb.path("s.jsonl")}).code == 0);
    const auto r = invoke({"train", "--seed", "1", "--scenes", sb.path("s.jsonl"), "--out",
                        sb.path("c.json")});
    CHECK(r.code == cli::config_error);
    CHECK(r.err.find("observations") != std::string::npos);
}

TEST_CASE("eval: oracle estimate, single threshold and monotone sweep") {
    Sandbox sb("eval");
    REQUIRE(invoke({"gen", "--seed", "2", "--count", "5", "--observations", "--out",
                 sb.path("s.jsonl")}).code == 0);
    REQUIRE(invoke({"eval", "--seed", "2", "--oracle", "--scenes", sb.path("s.jsonl"), "--threshold",
                 "0.5", "--out", sb.path("oracle")}).code == 0);
    const json m = json::parse(slurp(sb.path("oracle/metrics.json")))["metrics"];
    CHECK(m["mae_deg"].get<double>() == 0.0);
    CHECK(m["ids_count"] == 0);
    CHECK(m["miss_ratio"].get<double>() == 0.0);
    CHECK(m["fp_ratio"].get<double>() == 0.0);
    CHECK(m["recall"].get<double>() == 1.0);

    std::istringstream det(slurp(sb.path("oracle/det.csv")));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(det, line)) lines.push_back(line);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].rfind("# ", 0) == 0);
    CHECK(lines[1] == "threshold,miss_ratio,fp_ratio");
    CHECK(lines[2] == "0.5,0,0");

    REQUIRE(invoke({"train", "--seed", "2", "--scenes", sb.path("s.jsonl"), "--epochs", "1",
                 "--hidden", "4", "--quiet", "--out", sb.path("c.json")}).code == 0);
    REQUIRE(invoke({"eval", "--seed", "2", "--checkpoint", sb.path("c.json"), "--scenes",
                 sb.path("s.jsonl"), "--out", sb.path("sweep")}).code == 0);
    std::istringstream sweep(slurp(sb.path("sweep/det.csv")));
    std::getline(sweep, line);
    std::getline(sweep, line);
    double last_miss = -1.0, last_fp = 2e9;
    int rows = 0;
    while (std::getline(sweep, line)) {
        double th = 0, miss = 0, fp = 0;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &th, &miss, &fp) == 3);
        CHECK(miss >= last_miss);
        CHECK(fp <= last_fp);
        last_miss = miss;
        last_fp = fp;
        ++rows;
    }
    CHECK(rows == 21);
}

TEST_CASE("eval: slot-count mismatch is a configuration error") {
    Sandbox sb("eval_mismatch");
    write(sb.path("cfg3.json"), small_scene_config(3));
    write(sb.path("cfg4.json"), small_scene_config(4));
    REQUIRE(invoke({"gen", "--config", sb.path("cfg3.json"), "--seed", "1", "--count", "2",
                 "--observations", "--out", sb.path("a.jsonl")}).code == 0);
    REQUIRE(invoke({"gen", "--config", sb.path("cfg4.json"), "--seed", "1", "--count", "2",
                 "--observations", "--out", sb.path("b.jsonl")}).code == 0);
    REQUIRE(invoke({"train", "--seed", "1", "--scenes", sb.path("a.jsonl"), "--epochs", "0",
                 "--hidden", "4", "--out", sb.path("c.json")}).code == 0);
    const auto r = invoke({"eval", "--seed", "1", "--checkpoint", sb.path("c.json"), "--scenes",
                        sb.path("b.jsonl"), "--out", sb.path("ev")});
    CHECK(r.code == cli::config_error);
}

TEST_CASE("compare: identical checkpoints and empty scene sets") {
    Sandbox sb("compare");
    write(sb.path("cfg.json"), small_scene_config());
    REQUIRE(invoke({"gen", "--config", sb.path("cfg.json"), "--seed", "8", "--count", "4",
                 "--observations", "--out", sb.path("s.jsonl")}).code == 0);
    REQUIRE(invoke({"train", "--seed", "8", "--scenes", sb.path("s.jsonl"), "--epochs", "1",
                 "--hidden", "4", "--quiet", "--out", sb.path("c.json")}).code == 0);
    const auto r = invoke({"compare", "--seed", "8", "--checkpoint", sb.path("c.json"),
                        "--checkpoint", sb.path("c.json"), "--scenes", sb.path("s.jsonl"),
                        "--out", sb.path("cmp")});
    REQUIRE(r.code == 0);
    const std::string q = slurp(sb.path("cmp/quotients.csv"));
    CHECK(q.find("c,c#1,1\n") != std::string::npos);
    CHECK(q.find("c#1,c,1\n") != std::string::npos);
    CHECK(fs::exists(sb.path("cmp/compare.csv")));
    CHECK(fs::exists(sb.path("cmp/compare.txt")));

    io::write_text(sb.path("empty.jsonl"), "");
    const auto e = invoke({"compare", "--seed", "8", "--checkpoint", sb.path("c.json"),
                        "--checkpoint", sb.path("c.json"), "--scenes", sb.path("empty.jsonl"),
                        "--out", sb.path("cmp2")});
    CHECK(e.code == cli::invalid_input);

    const auto one = invoke({"compare", "--seed", "8", "--checkpoint", sb.path("c.json"),
                          "--scenes", sb.path("s.jsonl"), "--out", sb.path("cmp3")});
    CHECK(one.code == cli::config_error);
}

TEST_CASE("argument and file errors") {
    Sandbox sb("errors");
    CHECK(invoke({"gen", "--count", "1", "--out", sb.path("s.jsonl")}).code == cli::usage);
    CHECK(invoke({}).code == cli::usage);
    CHECK(invoke({"train", "--seed", "1", "--scenes", sb.path("s.jsonl"), "--strategy", "xpit",
               "--out", sb.path("c.json")}).code == cli::usage);
    CHECK(invoke({"eval", "--seed", "1", "--oracle", "--scenes", sb.path("missing.jsonl"), "--out",
               sb.path("ev")}).code == cli::io_error);
    write(sb.path("bad.json"), {{"scene", {{"slots", 3}}}, {"extra", 1}});
    CHECK(invoke({"gen", "--config", sb.path("bad.json"), "--seed", "1", "--out",
               sb.path("s.jsonl")}).code == cli::config_error);
    CHECK(invoke({"gen", "--seed", "1", "--count", "1", "--out",
               (sb.dir / "no" / "such" / "dir" / "s.jsonl").string()}).code == cli::io_error);
    CHECK(invoke({"gen", "--help"}).code == 0);
}

TEST_CASE("gradcheck command") {
    Sandbox sb("gradcheck");
    const auto r = invoke({"gradcheck", "--seed", "1", "--configs", "2", "--strategy", "spit",
                        "--out", sb.path("g.json")});
    CHECK(r.code == 0);
    const json j = json::parse(slurp(sb.path("g.json")));
    CHECK(j["passed"] == true);
    CHECK(j["runs"].size() == 2);
    CHECK(invoke({"gradcheck", "--seed", "1", "--configs", "1", "--tolerance", "1e-30"}).code ==
          cli::check_failed);
}
