#include "spit/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "spit/errors.hpp"
#include "parallel.hpp"

namespace spit {

int SceneConfig::frames() const {
    return static_cast<int>(std::lround(scene_length_s / frame_period_s));
}

int SceneConfig::min_duration_frames() const {
    // Guard against 2.0 / 0.2 landing just above 10.
    return static_cast<int>(std::ceil(min_duration_s / frame_period_s - 1e-9));
}

void SceneConfig::validate() const {
    auto fail = [](const std::string &what) { throw ParameterError("scene config: " + what); };
    if (!(scene_length_s > 0.0)) fail("scene_length_s must be positive");
    if (!(step_s > 0.0) || !(frame_period_s > 0.0)) fail("step_s and frame_period_s must be positive");
    if (std::abs(step_s - frame_period_s) > 1e-12) fail("frame_period_s must equal step_s");
    for (double r : birth_rates)
        if (!(r >= 0.0 && r <= 1.0)) fail("birth rates must lie in [0, 1]");
    if (!(death_prob >= 0.0 && death_prob <= 1.0)) fail("death_prob must lie in [0, 1]");
    if (!(min_duration_s > 0.0)) fail("min_duration_s must be positive");
    if (max_simultaneous < 1) fail("max_simultaneous must be >= 1");
    if (slots < max_simultaneous) fail("slots must be >= max_simultaneous");
    if (!(room_half_extent > exclusion_radius) || !(exclusion_radius > 0.0))
        fail("need 0 < exclusion_radius < room_half_extent");
}

std::vector<ActivityInterval> sample_activity(const SceneConfig &cfg, Rng &rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int frames = cfg.frames();
    const int min_frames = cfg.min_duration_frames();
    std::vector<ActivityInterval> out;
    std::vector<std::size_t> live;  // indices into out, birth order

    for (int k = 0; k < frames; ++k) {
        // Deaths are decided before births within a step.
        std::erase_if(live, [&](std::size_t idx) {
            if (k - out[idx].birth < min_frames) return false;
            if (unit(rng) >= cfg.death_prob) return false;
            out[idx].death = k;
            return true;
        });
        const auto active = static_cast<int>(live.size());
        if (active >= cfg.max_simultaneous) continue;
        const double rate = cfg.birth_rates[std::min<std::size_t>(active, cfg.birth_rates.size() - 1)];
        if (unit(rng) < rate) {
            out.push_back({k, frames});
            live.push_back(out.size() - 1);
        }
    }
    return out;
}

Vec3 ease_position(const Vec3 &start, const Vec3 &end, double tau) {
    const double s = (1.0 - std::cos(std::numbers::pi * tau)) / 2.0;
    return start + (end - start) * s;
}

namespace {

double segment_distance_to_origin(const Vec3 &a, const Vec3 &b) {
    const Vec3 ab = b - a;
    const double len2 = dot(ab, ab);
    const double s = len2 > 0.0 ? std::clamp(-dot(a, ab) / len2, 0.0, 1.0) : 0.0;
    return norm(a + ab * s);
}

Vec3 uniform_point(const SceneConfig &cfg, Rng &rng) {
    std::uniform_real_distribution<double> coord(-cfg.room_half_extent, cfg.room_half_extent);
    for (;;) {
        const Vec3 p{coord(rng), coord(rng), coord(rng)};
        if (norm(p) >= cfg.exclusion_radius) return p;
    }
}

}  // namespace

Trajectory sample_trajectory(ActivityInterval life, const SceneConfig &cfg, Rng &rng) {
    if (life.birth > life.death)
        throw ParameterError(fmt::format("birth {} after death {}", life.birth, life.death));
    Trajectory tr;
    tr.life = life;
    // The eased path is the straight segment start -> end, so checking the segment suffices.
    do {
        tr.start = uniform_point(cfg, rng);
        tr.end = uniform_point(cfg, rng);
    } while (segment_distance_to_origin(tr.start, tr.end) < cfg.exclusion_radius);

    const int len = life.length();
    tr.positions.reserve(len);
    tr.doas.reserve(len);
    for (int f = 0; f < len; ++f) {
        const double tau = len > 1 ? static_cast<double>(f) / (len - 1) : 0.0;
        const Vec3 p = ease_position(tr.start, tr.end, tau);
        tr.positions.push_back(p);
        tr.doas.push_back(p * (1.0 / norm(p)));
    }
    return tr;
}

SceneDraw draw_scene(const SceneConfig &cfg, Rng &rng) {
    cfg.validate();
    const int frames = cfg.frames();
    SceneDraw draw;
    draw.scene.frames = SlotGrid(frames, cfg.slots);
    draw.scene.frame_period_s = cfg.frame_period_s;

    constexpr int never = std::numeric_limits<int>::min();
    std::vector<int> busy_until(cfg.slots, never);  // death frame of the slot's last occupant
    for (const ActivityInterval &life : sample_activity(cfg, rng)) {
        Trajectory tr = sample_trajectory(life, cfg, rng);
        int slot = -1;
        for (int m = 0; m < cfg.slots && slot < 0; ++m)
            if (busy_until[m] < life.birth) slot = m;
        for (int m = 0; m < cfg.slots && slot < 0; ++m)
            if (busy_until[m] == life.birth) slot = m;
        if (slot < 0)
            throw CapacityError(fmt::format("no free slot at frame {}", life.birth));
        busy_until[slot] = life.death;
        for (int f = life.birth; f < life.death; ++f)
            draw.scene.frames.at(f, slot) = tr.doas[f - life.birth];
        draw.scene.track_count = std::max(draw.scene.track_count, slot + 1);
        draw.slot_of.push_back(slot);
        draw.trajectories.push_back(std::move(tr));
    }
    return draw;
}

GroundTruthScene build_scene(const SceneConfig &cfg, Rng &rng) {
    return draw_scene(cfg, rng).scene;
}

Vec3 rotate(const Vec3 &v, const Vec3 &axis, double angle_rad) {
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    return v * c + cross(axis, v) * s + axis * (dot(axis, v) * (1.0 - c));
}

SlotGrid observe(const GroundTruthScene &scene, const ObservationConfig &ocfg, Rng &rng) {
    if (!(ocfg.noise_deg >= 0.0)) throw ParameterError("noise_deg must be >= 0");
    if (!(ocfg.activity_noise >= 0.0)) throw ParameterError("activity_noise must be >= 0");
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sigma = ocfg.noise_deg * std::numbers::pi / 180.0;
    SlotGrid obs = scene.frames;
    for (std::size_t t = 0; t < obs.frames(); ++t) {
        for (Vec3 &v : obs.frame(t)) {
            const double n = norm(v);
            if (n == 0.0) continue;
            if (sigma > 0.0) {
                const Vec3 dir = v * (1.0 / n);
                Vec3 axis;
                double axis_norm = 0.0;
                while (axis_norm < 1e-9) {
                    const Vec3 r{gauss(rng), gauss(rng), gauss(rng)};
                    axis = r - dir * dot(r, dir);
                    axis_norm = norm(axis);
                }
                axis *= 1.0 / axis_norm;
                v = rotate(dir, axis, std::abs(gauss(rng)) * sigma) * n;
            }
            if (ocfg.activity_noise > 0.0) {
                const double jittered =
                    std::clamp(n + ocfg.activity_noise * gauss(rng), 0.0, ocfg.max_norm);
                v *= jittered / n;
            }
        }
        if (ocfg.shuffle) {
            auto f = obs.frame(t);
            std::shuffle(f.begin(), f.end(), rng);
        }
    }
    return obs;
}

std::uint64_t derive_scene_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

SceneSample generate_scene(const SceneConfig &cfg, const ObservationConfig &ocfg,
                           std::uint64_t scene_seed) {
    Rng rng(scene_seed);
    SceneSample s;
    s.seed = scene_seed;
    s.scene = build_scene(cfg, rng);
    s.observations = observe(s.scene, ocfg, rng);
    return s;
}

std::vector<SceneSample> generate_scenes(const SceneConfig &cfg, const ObservationConfig &ocfg,
                                         std::uint64_t seed, std::size_t count) {
    cfg.validate();
    std::vector<SceneSample> out(count);
    const auto n = static_cast<std::ptrdiff_t>(count);
detail::parallel_for(n, [&](std::ptrdiff_t i) {
        out[i] = generate_scene(cfg, ocfg, derive_scene_seed(seed, static_cast<std::uint64_t>(i)));
    });
    return out;
}

namespace serial {

std::vector<SceneSample> generate_scenes(const SceneConfig &cfg, const ObservationConfig &ocfg,
                                         std::uint64_t seed, std::size_t count) {
    cfg.validate();
    std::vector<SceneSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(generate_scene(cfg, ocfg, derive_scene_seed(seed, i)));
    return out;
}

}  // namespace serial

}  // namespace spit
