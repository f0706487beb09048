#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spit/accdoa.hpp"
#include "spit/pit.hpp"

namespace spit {

struct TrackerShape {
    int slots = 10;  // M; input and output are both M ACCDOA vectors per frame
    int hidden = 32;
    bool aux_head = false;  // linear side head on the first recurrent layer

    int io_width() const { return 3 * slots; }
    friend bool operator==(const TrackerShape &, const TrackerShape &) = default;
};

/// Flat parameter vector of the recurrent tracker:
///
///   a_t   = tanh(W_in x_t + b_in)
///   h1_t  = GRU1(a_t, h1_{t-1}),  h2_t = GRU2(h1_t, h2_{t-1})
///   y_t   = W_out h2_t + b_out           (aux: W_aux h1_t + b_aux)
///
/// with each GRU computing
///   z = sig(Wz x + Uz h + bz),  r = sig(Wr x + Ur h + br)
///   n = tanh(Wn x + r * (Un h) + bn),  h' = (1 - z) * n + z * h
class TrackerParams {
public:
    enum Block : int {
        in_w, in_b,
        g1_wz, g1_wr, g1_wn, g1_uz, g1_ur, g1_un, g1_bz, g1_br, g1_bn,
        g2_wz, g2_wr, g2_wn, g2_uz, g2_ur, g2_un, g2_bz, g2_br, g2_bn,
        out_w, out_b, aux_w, aux_b,
        block_count
    };

    TrackerParams() = default;
    /// All-zero parameters.
    explicit TrackerParams(TrackerShape shape);
    /// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per block, biases included.
    static TrackerParams initialized(TrackerShape shape, std::uint64_t seed);

    const TrackerShape &shape() const { return shape_; }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

    std::span<double> block(Block b);
    std::span<const double> block(Block b) const;
    int rows(Block b) const { return layout_[b].rows; }
    int cols(Block b) const { return layout_[b].cols; }
    static std::string_view name(Block b);
    /// Name of the block containing flat index `i` plus the offset within it.
    std::string locate(std::size_t i) const;

    friend bool operator==(const TrackerParams &a, const TrackerParams &b) {
        return a.shape_ == b.shape_ && a.values_ == b.values_;
    }

private:
    struct Entry {
        std::size_t offset = 0;
        int rows = 0;
        int cols = 0;
    };
    TrackerShape shape_;
    std::array<Entry, block_count> layout_{};
    std::vector<double> values_;
};

/// Activations kept from a forward pass for backpropagation through time.
struct ForwardTrace {
    struct Layer {
        std::vector<double> z, r, n, q, h;  // T x H each; q = Un h_prev
    };
    std::size_t frames = 0;
    std::vector<double> input;  // T x 3M
    std::vector<double> a;      // T x H
    std::array<Layer, 2> layers;
    SlotGrid output;
    SlotGrid aux_output;  // empty without aux head
};

ForwardTrace forward_trace(const TrackerParams &params, const SlotGrid &observations);
EstimateScene forward(const TrackerParams &params, const SlotGrid &observations,
                      double frame_period_s = 0.2);

/// Gradient of sum_t,m <upstream, output> (+ the same for the aux head) w.r.t. every parameter.
TrackerParams backward(const TrackerParams &params, const ForwardTrace &trace,
                       const SlotGrid &upstream, const SlotGrid *aux_upstream = nullptr);
TrackerParams backward(const TrackerParams &params, const SlotGrid &observations,
                       const SlotGrid &upstream);

struct TrainConfig {
    PitStrategy strategy;
    int epochs = 100;
    double learning_rate = 1e-3;
    double weight_decay = 1e-2;
    double grad_clip_norm = 1.0;
    int batch_size = 16;
    int hidden = 32;
    int slots = 10;
    std::uint64_t seed = 0;
    bool aux_loss = false;
    double aux_weight = 0.5;

    TrackerShape shape() const { return {slots, hidden, aux_loss}; }
    void validate() const;
};

struct TrainingScene {
    GroundTruthScene gt;
    SlotGrid observations;
};

struct Checkpoint {
    TrackerParams params;
    TrainConfig config;
    int epoch = 0;
    std::vector<double> train_loss_history;
    std::vector<double> val_loss_history;
};

/// Scene objective under a fixed schedule: pit_loss of the main head plus the weighted
/// frame-level loss of the aux head when present.
struct SceneObjective {
    double loss = 0.0;
    PermutationSchedule schedule;
    PermutationSchedule aux_schedule;
};

/// Selects the schedule(s) from the current outputs and returns the objective.
SceneObjective scene_objective(const TrackerParams &params, const TrainingScene &scene,
                               const PitStrategy &strategy, double aux_weight);
double scene_loss_fixed(const TrackerParams &params, const TrainingScene &scene,
                        const PermutationSchedule &schedule,
                        const PermutationSchedule &aux_schedule, double aux_weight);

struct SceneGradient {
    double loss = 0.0;
    TrackerParams grad;
};
SceneGradient scene_gradient(const TrackerParams &params, const TrainingScene &scene,
                             const PitStrategy &strategy, double aux_weight);

/// Mean loss and mean gradient over a batch. Scenes are processed in parallel and reduced in
/// index order, so the result does not depend on the thread count.
SceneGradient batch_gradient(const TrackerParams &params, std::span<const TrainingScene> scenes,
                             std::span<const std::size_t> batch, const PitStrategy &strategy,
                             double aux_weight);

/// Adam with decoupled weight decay.
class AdamW {
public:
    AdamW(std::size_t size, double lr, double weight_decay, double beta1 = 0.9,
          double beta2 = 0.999, double eps = 1e-8);
    void step(std::span<double> params, std::span<const double> grad);
    long steps() const { return t_; }

private:
    double lr_, wd_, b1_, b2_, eps_;
    long t_ = 0;
    std::vector<double> m_, v_;
};

/// Rescales `grad` so its Euclidean norm is at most max_norm; returns the norm before clipping.
double clip_global_norm(std::span<double> grad, double max_norm);

struct EpochReport {
    int epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_loss;
};
using EpochCallback = std::function<void(const EpochReport &)>;

/// Minibatch training. Throws NumericError (with epoch, batch and loss) on a non-finite loss.
Checkpoint train(std::span<const TrainingScene> train_set, std::span<const TrainingScene> val_set,
                 const TrainConfig &cfg, const EpochCallback &on_epoch = {});

double mean_loss(const TrackerParams &params, std::span<const TrainingScene> scenes,
                 const PitStrategy &strategy);

struct GradCheckReport {
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::size_t worst_index = 0;
    std::string worst_parameter;
    std::size_t checked = 0;
    bool passed = false;
};

/// Compares the analytic gradient against central differences of the scalar loss, with the
/// schedules chosen at the unperturbed point and frozen. Relative error of one component is
/// |a - n| / max(|a|, |n|, abs_floor). The floor sits above the roundoff of the loss
/// difference (about eps * loss / step), which would otherwise dominate near-zero components.
GradCheckReport grad_check(const TrackerParams &params, const TrainingScene &scene,
                           const PitStrategy &strategy, double step, double tolerance,
                           double aux_weight = 0.5, double abs_floor = 1e-5);

namespace serial {
SceneGradient batch_gradient(const TrackerParams &params, std::span<const TrainingScene> scenes,
                             std::span<const std::size_t> batch, const PitStrategy &strategy,
                             double aux_weight);
}

}  // namespace spit
