#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spit/errors.hpp"
#include "spit/scenegen.hpp"

using namespace spit;

namespace {

bool same_multiset(std::span<const Vec3> a, std::span<const Vec3> b) {
    const auto key = [](const Vec3 &v) { return std::tuple(v.x, v.y, v.z); };
    std::vector<std::tuple<double, double, double>> ka, kb;
    for (const auto &v : a) ka.push_back(key(v));
    for (const auto &v : b) kb.push_back(key(v));
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    return ka == kb;
}

}  // namespace

TEST_CASE("config derived sizes and validation") {
    SceneConfig cfg;
    CHECK(cfg.frames() == 100);
    CHECK(cfg.min_duration_frames() == 10);
    CHECK_NOTHROW(cfg.validate());

    SceneConfig bad = cfg;
    bad.death_prob = 1.5;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = cfg;
    bad.slots = 2;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = cfg;
    bad.min_duration_s = 0.0;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    bad = cfg;
    bad.birth_rates[1] = -0.1;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("activity edge cases") {
    SceneConfig cfg;
    Rng rng(5);
    cfg.birth_rates = {0.0, 0.0, 0.0};
    CHECK(sample_activity(cfg, rng).empty());

    cfg = SceneConfig{};
    cfg.death_prob = 0.0;
    for (int rep = 0; rep < 50; ++rep)
        for (const auto &life : sample_activity(cfg, rng)) CHECK(life.death == cfg.frames());
}

TEST_CASE("activity respects minimum duration and the concurrency cap") {
    SceneConfig cfg;
    cfg.birth_rates = {0.5, 0.5, 0.5};
    cfg.death_prob = 0.3;
    Rng rng(7);
    for (int rep = 0; rep < 500; ++rep) {
        const auto lives = sample_activity(cfg, rng);
        std::vector<int> count(cfg.frames(), 0);
        for (std::size_t i = 0; i < lives.size(); ++i) {
            const auto &l = lives[i];
            CHECK(l.birth <= l.death);
            if (l.death < cfg.frames()) CHECK(l.length() >= cfg.min_duration_frames());
            if (i > 0) CHECK(lives[i - 1].birth < l.birth);
            for (int f = l.birth; f < l.death; ++f) ++count[f];
        }
        CHECK(*std::max_element(count.begin(), count.end()) <= cfg.max_simultaneous);
    }
}

TEST_CASE("activity statistics match an independent chain simulation") {
    const SceneConfig cfg;
    const int scenes = 10000;
    double births = 0.0, life_sum = 0.0;
    long lives = 0;
    for (int s = 0; s < scenes; ++s) {
        Rng rng(derive_scene_seed(99, s));
        for (const auto &l : sample_activity(cfg, rng)) {
            births += 1.0;
            life_sum += l.length();
            ++lives;
        }
    }
    const auto ref = oracle::simulate_chain(scenes, cfg.frames(), cfg.min_duration_frames(),
                                            cfg.death_prob,
                                            {cfg.birth_rates.begin(), cfg.birth_rates.end()},
                                            cfg.max_simultaneous, 12345);
    CHECK(births / scenes == doctest::Approx(ref.mean_births).epsilon(0.05));
    CHECK(life_sum / lives == doctest::Approx(ref.mean_lifetime).epsilon(0.05));
}

TEST_CASE("ease position") {
    const Vec3 a{1, -2, 0.5}, b{-1, 2, 2.5};
    CHECK(ease_position(a, b, 0.0) == a);
    const Vec3 end = ease_position(a, b, 1.0);
    CHECK(end.x == doctest::Approx(b.x));
    CHECK(end.y == doctest::Approx(b.y));
    CHECK(end.z == doctest::Approx(b.z));
    const Vec3 mid = ease_position(a, b, 0.5);
    CHECK(mid.x == doctest::Approx(0.0));
    CHECK(mid.y == doctest::Approx(0.0));
    CHECK(mid.z == doctest::Approx(1.5));
    CHECK(ease_position(a, a, 0.37) == a);
}

TEST_CASE("trajectories stay in the room with unit DOAs") {
    const SceneConfig cfg;
    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        const Trajectory tr = sample_trajectory({3, 3 + 10 + rep % 50}, cfg, rng);
        REQUIRE(tr.positions.size() == static_cast<std::size_t>(tr.life.length()));
        REQUIRE(tr.doas.size() == tr.positions.size());
        CHECK(tr.positions.front() == tr.start);
        for (std::size_t i = 0; i < tr.positions.size(); ++i) {
            const Vec3 &p = tr.positions[i];
            CHECK(std::abs(p.x) <= cfg.room_half_extent);
            CHECK(std::abs(p.y) <= cfg.room_half_extent);
            CHECK(std::abs(p.z) <= cfg.room_half_extent);
            CHECK(norm(p) >= cfg.exclusion_radius - 1e-12);
            CHECK(std::abs(norm(tr.doas[i]) - 1.0) < 1e-9);
            const Vec3 d = p * (1.0 / norm(p));
            CHECK(norm(d - tr.doas[i]) < 1e-12);
        }
    }
}

TEST_CASE("built scenes are valid references") {
    const SceneConfig cfg;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        Rng rng(seed);
        const SceneDraw draw = draw_scene(cfg, rng);
        const auto &scene = draw.scene;
        CHECK(check_ground_truth(scene).empty());
        CHECK(scene.length() == 100);
        CHECK(scene.slots() == 10);
        for (std::size_t t = 0; t < scene.length(); ++t) {
            int active = 0;
            for (const auto &v : scene.frames.frame(t)) active += norm(v) > 0.0;
            CHECK(active <= 3);
        }
        // Each trajectory occupies one slot for its whole life and nothing else writes there.
        for (std::size_t i = 0; i < draw.trajectories.size(); ++i) {
            const auto &tr = draw.trajectories[i];
            const int slot = draw.slot_of[i];
            CHECK(slot < scene.track_count);
            for (int f = tr.life.birth; f < tr.life.death; ++f)
                CHECK(scene.frames.at(f, slot) == tr.doas[f - tr.life.birth]);
        }
    }

    SceneConfig none;
    none.birth_rates = {0.0, 0.0, 0.0};
    Rng rng(1);
    const auto empty = build_scene(none, rng);
    CHECK(empty.track_count == 0);
    for (const auto &v : empty.frames.values()) CHECK(v == Vec3{});

    SceneConfig one;
    one.birth_rates = {1.0, 0.0, 0.0};
    one.death_prob = 0.0;
    const auto full = build_scene(one, rng);
    CHECK(full.track_count == 1);
    for (std::size_t t = 0; t < full.length(); ++t)
        CHECK(std::abs(norm(full.frames.at(t, 0)) - 1.0) < 1e-9);
}

TEST_CASE("rotation preserves length and moves by the angle") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 200; ++rep) {
        Vec3 v = oracle::random_vec(rng);
        v *= 1.0 / norm(v);
        Vec3 axis = cross(v, oracle::random_vec(rng));
        axis *= 1.0 / norm(axis);
        const double angle = 0.7;
        const Vec3 r = rotate(v, axis, angle);
        CHECK(norm(r) == doctest::Approx(1.0));
        CHECK(angular_error_deg(v, r) == doctest::Approx(angle * 180.0 / std::numbers::pi));
    }
}

TEST_CASE("observation model") {
    SceneConfig cfg;
    Rng rng(17);
    const auto scene = build_scene(cfg, rng);

    ObservationConfig clean{0.0, false, 0.0};
    CHECK(observe(scene, clean, rng) == scene.frames);

    ObservationConfig shuffled{0.0, true, 0.0};
    const SlotGrid obs = observe(scene, shuffled, rng);
    for (std::size_t t = 0; t < scene.length(); ++t)
        CHECK(same_multiset(obs.frame(t), scene.frames.frame(t)));

    ObservationConfig bad;
    bad.noise_deg = -1.0;
    CHECK_THROWS_AS(observe(scene, bad, rng), ParameterError);
}

TEST_CASE("observation noise has the folded-normal mean angle") {
    // One active source in every frame and slot 0, shuffling off, so errors pair up directly.
    GroundTruthScene scene{SlotGrid(100000, 1)};
    std::mt19937_64 dir_rng(19);
    for (auto &v : scene.frames.values()) {
        v = oracle::random_vec(dir_rng);
        v *= 1.0 / norm(v);
    }
    ObservationConfig ocfg{5.0, false, 0.05};
    Rng rng(23);
    const SlotGrid obs = observe(scene, ocfg, rng);
    double sum = 0.0;
    long n = 0;
    for (std::size_t t = 0; t < scene.length(); ++t) {
        const Vec3 &o = obs.at(t, 0);
        if (norm(o) == 0.0) continue;
        sum += angular_error_deg(scene.frames.at(t, 0), o);
        ++n;
        CHECK(norm(o) <= 1.2);
    }
    const double expected = 5.0 * std::sqrt(2.0 / std::numbers::pi);
    CHECK(sum / n == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("generation is deterministic per seed") {
    const SceneConfig cfg;
    const ObservationConfig ocfg;
    const auto a = generate_scenes(cfg, ocfg, 77, 20);
    const auto b = generate_scenes(cfg, ocfg, 77, 20);
    const auto c = generate_scenes(cfg, ocfg, 78, 20);
    REQUIRE(a.size() == 20);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].seed == b[i].seed);
        CHECK(a[i].scene.frames == b[i].scene.frames);
        CHECK(a[i].observations == b[i].observations);
        differs |= !(a[i].scene.frames == c[i].scene.frames);
        const auto single = generate_scene(cfg, ocfg, a[i].seed);
        CHECK(single.scene.frames == a[i].scene.frames);
        CHECK(single.observations == a[i].observations);
    }
    CHECK(differs);
    CHECK(derive_scene_seed(1, 0) != derive_scene_seed(1, 1));
    CHECK(derive_scene_seed(1, 0) != derive_scene_seed(2, 0));
}
