// Parallel kernels against their serial references. Thread count follows OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include <numeric>

#include "spit/assignment.hpp"
#include "spit/metrics.hpp"
#include "spit/pit.hpp"
#include "spit/scenegen.hpp"
#include "spit/tracker.hpp"

using namespace spit;

namespace {

SlotGrid random_grid(std::size_t frames, std::size_t slots, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    SlotGrid grid(frames, slots);
    for (Vec3 &v : grid.values()) v = {g(rng), g(rng), g(rng)};
    return grid;
}

const DistanceMatrixSequence &long_sequence() {
    static const DistanceMatrixSequence seq =
        distance_sequence(random_grid(2000, 10, 1), random_grid(2000, 10, 2));
    return seq;
}

const std::vector<TrainingScene> &training_scenes() {
    static const std::vector<TrainingScene> scenes = [] {
        SceneConfig cfg;
        cfg.slots = 5;
        std::vector<TrainingScene> out;
        for (auto &s : generate_scenes(cfg, {}, 3, 32)) out.push_back({s.scene, s.observations});
        return out;
    }();
    return scenes;
}

template <bool Serial>
void BM_distance_sequence(benchmark::State &state) {
    const SlotGrid a = random_grid(2000, 10, 1), b = random_grid(2000, 10, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(Serial ? serial::distance_sequence(a, b) : distance_sequence(a, b));
}

template <bool Serial>
void BM_moving_average(benchmark::State &state) {
    const auto &seq = long_sequence();
    for (auto _ : state)
        benchmark::DoNotOptimize(Serial ? serial::moving_average(seq, 10, WindowMode::centered)
                                        : moving_average(seq, 10, WindowMode::centered));
}

template <bool Serial>
void BM_fpit(benchmark::State &state) {
    const auto &seq = long_sequence();
    for (auto _ : state)
        benchmark::DoNotOptimize(Serial ? serial::fpit_assign(seq) : fpit_assign(seq));
}

template <bool Serial>
void BM_spit(benchmark::State &state) {
    const auto &seq = long_sequence();
    for (auto _ : state)
        benchmark::DoNotOptimize(Serial ? serial::spit_assign(seq, 10) : spit_assign(seq, 10));
}

template <bool Serial>
void BM_generate_scenes(benchmark::State &state) {
    const SceneConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(Serial ? serial::generate_scenes(cfg, {}, 5, 64)
                                        : generate_scenes(cfg, {}, 5, 64));
}

template <bool Serial>
void BM_batch_gradient(benchmark::State &state) {
    const auto &scenes = training_scenes();
    const auto params = TrackerParams::initialized({5, 32, false}, 7);
    std::vector<std::size_t> batch(scenes.size());
    std::iota(batch.begin(), batch.end(), std::size_t{0});
    const PitStrategy strategy = PitStrategy::spit(10);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            Serial ? serial::batch_gradient(params, scenes, batch, strategy, 0.5)
                   : batch_gradient(params, scenes, batch, strategy, 0.5));
}

template <bool Serial>
void BM_evaluate(benchmark::State &state) {
    std::vector<GroundTruthScene> gt;
    std::vector<EstimateScene> est;
    for (const auto &s : generate_scenes(SceneConfig{}, {}, 9, 64)) {
        gt.push_back(s.scene);
        est.push_back({s.observations, s.scene.frame_period_s});
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(Serial ? serial::evaluate(gt, est, 0.5, 30.0)
                                        : evaluate(gt, est, 0.5, 30.0));
}

}  // namespace

BENCHMARK(BM_distance_sequence<true>)->Name("distance_sequence/serial");
BENCHMARK(BM_distance_sequence<false>)->Name("distance_sequence/parallel");
BENCHMARK(BM_moving_average<true>)->Name("moving_average/serial");
BENCHMARK(BM_moving_average<false>)->Name("moving_average/parallel");
BENCHMARK(BM_fpit<true>)->Name("fpit_assign/serial");
BENCHMARK(BM_fpit<false>)->Name("fpit_assign/parallel");
BENCHMARK(BM_spit<true>)->Name("spit_assign/serial");
BENCHMARK(BM_spit<false>)->Name("spit_assign/parallel");
BENCHMARK(BM_generate_scenes<true>)->Name("generate_scenes/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_generate_scenes<false>)->Name("generate_scenes/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_batch_gradient<true>)->Name("batch_gradient/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_batch_gradient<false>)->Name("batch_gradient/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_evaluate<true>)->Name("evaluate/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_evaluate<false>)->Name("evaluate/parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
