#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "spit/accdoa.hpp"

namespace spit {

using Rng = std::mt19937_64;

/// Birth/death statistics and layout of a synthetic scene.
struct SceneConfig {
    double scene_length_s = 20.0;
    double step_s = 0.2;          // birth/death decision interval
    double frame_period_s = 0.2;  // kept equal to step_s
    std::array<double, 3> birth_rates{0.06, 0.04, 0.02};  // indexed by active count 0/1/2
    double death_prob = 0.02;
    double min_duration_s = 2.0;
    int max_simultaneous = 3;
    int slots = 10;  // M
    double room_half_extent = 3.0;
    double exclusion_radius = 0.3;

    int frames() const;
    int min_duration_frames() const;
    /// Throws ParameterError on an invalid configuration.
    void validate() const;
};

/// Active frame range [birth, death): death is the first inactive frame.
struct ActivityInterval {
    int birth = 0;
    int death = 0;
    int length() const { return death - birth; }
    friend bool operator==(const ActivityInterval &, const ActivityInterval &) = default;
};

struct Trajectory {
    ActivityInterval life;
    Vec3 start;
    Vec3 end;
    std::vector<Vec3> positions;  // one per live frame
    std::vector<Vec3> doas;       // unit vectors, one per live frame
};

/// Synthetic detections standing in for an acoustic front end.
struct ObservationConfig {
    double noise_deg = 5.0;
    bool shuffle = true;
    double activity_noise = 0.05;
    double max_norm = 1.2;
};

/// Lifetimes of all sources born during one scene, in birth order.
std::vector<ActivityInterval> sample_activity(const SceneConfig &cfg, Rng &rng);

/// Half-cosine ease between two random points; resamples endpoints whose path nears the origin.
Trajectory sample_trajectory(ActivityInterval life, const SceneConfig &cfg, Rng &rng);

/// Position at normalized time tau in [0, 1].
Vec3 ease_position(const Vec3 &start, const Vec3 &end, double tau);

struct SceneDraw {
    GroundTruthScene scene;
    std::vector<Trajectory> trajectories;
    std::vector<int> slot_of;  // slot used by each trajectory
};

/// Places trajectories in the lowest free slot, never reusing a slot in the frame right
/// after it was vacated unless no other slot is free.
SceneDraw draw_scene(const SceneConfig &cfg, Rng &rng);
GroundTruthScene build_scene(const SceneConfig &cfg, Rng &rng);

/// Rotates each active vector by a folded-normal angle about a random perpendicular axis,
/// jitters its norm and optionally shuffles the slots of every frame.
SlotGrid observe(const GroundTruthScene &scene, const ObservationConfig &ocfg, Rng &rng);

/// Rotation of `v` by `angle_rad` about the unit `axis`.
Vec3 rotate(const Vec3 &v, const Vec3 &axis, double angle_rad);

struct SceneSample {
    std::uint64_t seed = 0;  // per-scene seed that reproduces this sample
    GroundTruthScene scene;
    SlotGrid observations;
};

/// `count` scenes with observations; scenes are generated in parallel.
std::vector<SceneSample> generate_scenes(const SceneConfig &cfg, const ObservationConfig &ocfg,
                                         std::uint64_t seed, std::size_t count);
SceneSample generate_scene(const SceneConfig &cfg, const ObservationConfig &ocfg,
                           std::uint64_t scene_seed);
/// Seed of scene `index` in a run seeded with `seed` (splitmix64 mixing).
std::uint64_t derive_scene_seed(std::uint64_t seed, std::uint64_t index);

namespace serial {
std::vector<SceneSample> generate_scenes(const SceneConfig &cfg, const ObservationConfig &ocfg,
                                         std::uint64_t seed, std::size_t count);
}

}  // namespace spit
