#include "spit/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "spit/errors.hpp"
#include "parallel.hpp"

namespace spit {

namespace {

constexpr std::array<std::string_view, TrackerParams::block_count> kBlockNames{
    "input.weight", "input.bias",
    "gru1.w_z", "gru1.w_r", "gru1.w_n", "gru1.u_z", "gru1.u_r", "gru1.u_n",
    "gru1.b_z", "gru1.b_r", "gru1.b_n",
    "gru2.w_z", "gru2.w_r", "gru2.w_n", "gru2.u_z", "gru2.u_r", "gru2.u_n",
    "gru2.b_z", "gru2.b_r", "gru2.b_n",
    "output.weight", "output.bias", "aux.weight", "aux.bias"};

// Offsets of the gate blocks relative to g1_wz / g2_wz.
enum GateOffset : int { wz, wr, wn, uz, ur, un, bz, br, bn, gate_blocks };

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// out = b + W x, W row-major rows x cols.
void affine(std::span<const double> w, std::span<const double> b, const double *x, int rows,
            int cols, double *out) {
    for (int i = 0; i < rows; ++i) {
        double acc = b.empty() ? 0.0 : b[i];
        const double *wi = w.data() + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) acc += wi[j] * x[j];
        out[i] = acc;
    }
}

// out += W^T g
void add_transpose_product(std::span<const double> w, const double *g, int rows, int cols,
                           double *out) {
    for (int i = 0; i < rows; ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        const double *wi = w.data() + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) out[j] += wi[j] * gi;
    }
}

// dW += g x^T
void add_outer(std::span<double> dw, const double *g, const double *x, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        const double gi = g[i];
        if (gi == 0.0) continue;
        double *di = dw.data() + static_cast<std::size_t>(i) * cols;
        for (int j = 0; j < cols; ++j) di[j] += gi * x[j];
    }
}

void add_to(std::span<double> dst, const double *src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

TrackerParams::Block gate(int layer, GateOffset g) {
    const int base = layer == 0 ? TrackerParams::g1_wz : TrackerParams::g2_wz;
    return static_cast<TrackerParams::Block>(base + static_cast<int>(g));
}

}  // namespace

TrackerParams::TrackerParams(TrackerShape shape) : shape_(shape) {
    if (shape.slots < 1 || shape.hidden < 1)
        throw ParameterError(fmt::format("invalid tracker shape M={} H={}", shape.slots,
                                         shape.hidden));
    const int h = shape.hidden;
    const int io = shape.io_width();
    std::array<std::pair<int, int>, block_count> dims{};
    dims[in_w] = {h, io};
    dims[in_b] = {h, 1};
    for (int layer = 0; layer < 2; ++layer) {
        for (GateOffset g : {wz, wr, wn, uz, ur, un}) dims[gate(layer, g)] = {h, h};
        for (GateOffset g : {bz, br, bn}) dims[gate(layer, g)] = {h, 1};
    }
    dims[out_w] = {io, h};
    dims[out_b] = {io, 1};
    dims[aux_w] = shape.aux_head ? std::pair{io, h} : std::pair{0, 0};
    dims[aux_b] = shape.aux_head ? std::pair{io, 1} : std::pair{0, 0};

    std::size_t offset = 0;
    for (int b = 0; b < block_count; ++b) {
        layout_[b] = {offset, dims[b].first, dims[b].second};
        offset += static_cast<std::size_t>(dims[b].first) * dims[b].second;
    }
    values_.assign(offset, 0.0);
}

TrackerParams TrackerParams::initialized(TrackerShape shape, std::uint64_t seed) {
    TrackerParams p(shape);
    std::mt19937_64 rng(seed);
    const int h = shape.hidden;
    for (int b = 0; b < block_count; ++b) {
        const auto block = static_cast<Block>(b);
        // Biases share the fan-in of the weight feeding the same units.
        int fan_in = p.cols(block) == 1 ? h : p.cols(block);
        if (block == in_b) fan_in = shape.io_width();
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double &v : p.block(block)) v = dist(rng);
    }
    return p;
}

std::span<double> TrackerParams::block(Block b) {
    return std::span<double>(values_).subspan(layout_[b].offset,
                                              static_cast<std::size_t>(layout_[b].rows) *
                                                  layout_[b].cols);
}

std::span<const double> TrackerParams::block(Block b) const {
    return std::span<const double>(values_).subspan(layout_[b].offset,
                                                    static_cast<std::size_t>(layout_[b].rows) *
                                                        layout_[b].cols);
}

std::string_view TrackerParams::name(Block b) { return kBlockNames[b]; }

std::string TrackerParams::locate(std::size_t i) const {
    for (int b = block_count - 1; b >= 0; --b) {
        const auto &e = layout_[b];
        const std::size_t len = static_cast<std::size_t>(e.rows) * e.cols;
        if (len > 0 && i >= e.offset && i < e.offset + len)
            return fmt::format("{}[{}]", kBlockNames[b], i - e.offset);
    }
    return fmt::format("#{}", i);
}

ForwardTrace forward_trace(const TrackerParams &params, const SlotGrid &observations) {
    const TrackerShape &shape = params.shape();
    if (observations.slots() != static_cast<std::size_t>(shape.slots))
        throw ShapeError(fmt::format("observations have {} slots, tracker expects {}",
                                     observations.slots(), shape.slots));
    const std::size_t frames = observations.frames();
    const int h = shape.hidden;
    const int io = shape.io_width();

    ForwardTrace tr;
    tr.frames = frames;
    tr.input.resize(frames * io);
    for (std::size_t t = 0; t < frames; ++t)
        for (int m = 0; m < shape.slots; ++m) {
            const Vec3 &v = observations.at(t, m);
            tr.input[t * io + 3 * m] = v.x;
            tr.input[t * io + 3 * m + 1] = v.y;
            tr.input[t * io + 3 * m + 2] = v.z;
        }
    tr.a.resize(frames * h);
    for (auto &layer : tr.layers)
        for (auto *v : {&layer.z, &layer.r, &layer.n, &layer.q, &layer.h}) v->resize(frames * h);
    tr.output = SlotGrid(frames, shape.slots);
    if (shape.aux_head) tr.aux_output = SlotGrid(frames, shape.slots);

    const std::vector<double> zeros(h, 0.0);
    std::vector<double> pre(h), y(io);
    for (std::size_t t = 0; t < frames; ++t) {
        double *a = tr.a.data() + t * h;
        affine(params.block(TrackerParams::in_w), params.block(TrackerParams::in_b),
               tr.input.data() + t * io, h, io, a);
        for (int i = 0; i < h; ++i) a[i] = std::tanh(a[i]);

        const double *x = a;
        for (int l = 0; l < 2; ++l) {
            auto &L = tr.layers[l];
            const double *hp = t == 0 ? zeros.data() : L.h.data() + (t - 1) * h;
            double *z = L.z.data() + t * h;
            double *r = L.r.data() + t * h;
            double *n = L.n.data() + t * h;
            double *q = L.q.data() + t * h;
            double *hn = L.h.data() + t * h;

            affine(params.block(gate(l, wz)), params.block(gate(l, bz)), x, h, h, z);
            affine(params.block(gate(l, uz)), {}, hp, h, h, pre.data());
            for (int i = 0; i < h; ++i) z[i] = sigmoid(z[i] + pre[i]);

            affine(params.block(gate(l, wr)), params.block(gate(l, br)), x, h, h, r);
            affine(params.block(gate(l, ur)), {}, hp, h, h, pre.data());
            for (int i = 0; i < h; ++i) r[i] = sigmoid(r[i] + pre[i]);

            affine(params.block(gate(l, un)), {}, hp, h, h, q);
            affine(params.block(gate(l, wn)), params.block(gate(l, bn)), x, h, h, n);
            for (int i = 0; i < h; ++i) n[i] = std::tanh(n[i] + r[i] * q[i]);

            for (int i = 0; i < h; ++i) hn[i] = (1.0 - z[i]) * n[i] + z[i] * hp[i];
            x = hn;
        }

        affine(params.block(TrackerParams::out_w), params.block(TrackerParams::out_b), x, io, h,
               y.data());
        for (int m = 0; m < shape.slots; ++m) tr.output.at(t, m) = {y[3 * m], y[3 * m + 1], y[3 * m + 2]};
        if (shape.aux_head) {
            affine(params.block(TrackerParams::aux_w), params.block(TrackerParams::aux_b),
                   tr.layers[0].h.data() + t * h, io, h, y.data());
            for (int m = 0; m < shape.slots; ++m)
                tr.aux_output.at(t, m) = {y[3 * m], y[3 * m + 1], y[3 * m + 2]};
        }
    }
    return tr;
}

EstimateScene forward(const TrackerParams &params, const SlotGrid &observations,
                      double frame_period_s) {
    return {forward_trace(params, observations).output, frame_period_s};
}

TrackerParams backward(const TrackerParams &params, const ForwardTrace &trace,
                       const SlotGrid &upstream, const SlotGrid *aux_upstream) {
    const TrackerShape &shape = params.shape();
    if (upstream.frames() != trace.frames ||
        upstream.slots() != static_cast<std::size_t>(shape.slots))
        throw ShapeError("upstream gradient does not match the forward output");
    if (aux_upstream != nullptr && !aux_upstream->same_shape(upstream))
        throw ShapeError("aux upstream gradient does not match the forward output");
    if (aux_upstream != nullptr && !shape.aux_head)
        throw ShapeError("aux upstream gradient given for a tracker without aux head");

    const int h = shape.hidden;
    const int io = shape.io_width();
    TrackerParams grad(shape);
    const std::vector<double> zeros(h, 0.0);
    std::vector<double> dy(io), dh(h), dx(h), dz(h), dr(h), dn(h), dq(h), da(h);
    std::array<std::vector<double>, 2> dh_next{std::vector<double>(h, 0.0),
                                               std::vector<double>(h, 0.0)};

    auto flatten = [&](const SlotGrid &g, std::size_t t) {
        for (int m = 0; m < shape.slots; ++m) {
            const Vec3 &v = g.at(t, m);
            dy[3 * m] = v.x;
            dy[3 * m + 1] = v.y;
            dy[3 * m + 2] = v.z;
        }
    };

    for (std::size_t tt = trace.frames; tt-- > 0;) {
        const double *h1 = trace.layers[0].h.data() + tt * h;
        const double *h2 = trace.layers[1].h.data() + tt * h;

        flatten(upstream, tt);
        add_outer(grad.block(TrackerParams::out_w), dy.data(), h2, io, h);
        add_to(grad.block(TrackerParams::out_b), dy.data());
        std::copy(dh_next[1].begin(), dh_next[1].end(), dh.begin());
        add_transpose_product(params.block(TrackerParams::out_w), dy.data(), io, h, dh.data());

        for (int l = 1; l >= 0; --l) {
            const auto &L = trace.layers[l];
            const double *x = l == 0 ? trace.a.data() + tt * h : h1;
            const double *hp = tt == 0 ? zeros.data() : L.h.data() + (tt - 1) * h;
            const double *z = L.z.data() + tt * h;
            const double *r = L.r.data() + tt * h;
            const double *n = L.n.data() + tt * h;
            const double *q = L.q.data() + tt * h;

            if (l == 0) {
                std::copy(dh_next[0].begin(), dh_next[0].end(), dh.begin());
                for (int i = 0; i < h; ++i) dh[i] += dx[i];
                if (aux_upstream != nullptr) {
                    flatten(*aux_upstream, tt);
                    add_outer(grad.block(TrackerParams::aux_w), dy.data(), h1, io, h);
                    add_to(grad.block(TrackerParams::aux_b), dy.data());
                    add_transpose_product(params.block(TrackerParams::aux_w), dy.data(), io, h,
                                          dh.data());
                }
            }

            std::vector<double> &dprev = dh_next[l];
            for (int i = 0; i < h; ++i) {
                const double dni = dh[i] * (1.0 - z[i]);
                const double dzi = dh[i] * (hp[i] - n[i]);
                dprev[i] = dh[i] * z[i];
                dn[i] = dni * (1.0 - n[i] * n[i]);
                dz[i] = dzi * z[i] * (1.0 - z[i]);
                dr[i] = dn[i] * q[i] * r[i] * (1.0 - r[i]);
                dq[i] = dn[i] * r[i];
            }
            add_outer(grad.block(gate(l, wz)), dz.data(), x, h, h);
            add_outer(grad.block(gate(l, wr)), dr.data(), x, h, h);
            add_outer(grad.block(gate(l, wn)), dn.data(), x, h, h);
            add_outer(grad.block(gate(l, uz)), dz.data(), hp, h, h);
            add_outer(grad.block(gate(l, ur)), dr.data(), hp, h, h);
            add_outer(grad.block(gate(l, un)), dq.data(), hp, h, h);
            add_to(grad.block(gate(l, bz)), dz.data());
            add_to(grad.block(gate(l, br)), dr.data());
            add_to(grad.block(gate(l, bn)), dn.data());

            add_transpose_product(params.block(gate(l, uz)), dz.data(), h, h, dprev.data());
            add_transpose_product(params.block(gate(l, ur)), dr.data(), h, h, dprev.data());
            add_transpose_product(params.block(gate(l, un)), dq.data(), h, h, dprev.data());

            std::fill(dx.begin(), dx.end(), 0.0);
            add_transpose_product(params.block(gate(l, wz)), dz.data(), h, h, dx.data());
            add_transpose_product(params.block(gate(l, wr)), dr.data(), h, h, dx.data());
            add_transpose_product(params.block(gate(l, wn)), dn.data(), h, h, dx.data());
        }

        const double *a = trace.a.data() + tt * h;
        for (int i = 0; i < h; ++i) da[i] = dx[i] * (1.0 - a[i] * a[i]);
        add_outer(grad.block(TrackerParams::in_w), da.data(), trace.input.data() + tt * io, h, io);
        add_to(grad.block(TrackerParams::in_b), da.data());
    }
    return grad;
}

TrackerParams backward(const TrackerParams &params, const SlotGrid &observations,
                       const SlotGrid &upstream) {
    return backward(params, forward_trace(params, observations), upstream);
}

void TrainConfig::validate() const {
    auto fail = [](const std::string &what) { throw ParameterError("train config: " + what); };
    if (epochs < 0) fail("epochs must be >= 0");
    if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
    if (!(weight_decay >= 0.0)) fail("weight_decay must be >= 0");
    if (!(grad_clip_norm > 0.0)) fail("grad_clip_norm must be positive");
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (hidden < 1 || slots < 1) fail("hidden and slots must be >= 1");
    if (strategy.kind == PitKind::sliding && strategy.window < 1) fail("window must be >= 1");
    if (aux_loss && !(aux_weight >= 0.0)) fail("aux_weight must be >= 0");
}

namespace {

double objective_from_trace(const ForwardTrace &trace, const TrainingScene &scene,
                            const PermutationSchedule &schedule,
                            const PermutationSchedule &aux_schedule, double aux_weight) {
    double loss = pit_loss(scene.gt.frames, trace.output, schedule);
    if (!trace.aux_output.values().empty())
        loss += aux_weight * pit_loss(scene.gt.frames, trace.aux_output, aux_schedule);
    return loss;
}

bool outputs_finite(const ForwardTrace &trace) {
    const auto finite = [](const SlotGrid &g) {
        return std::all_of(g.values().begin(), g.values().end(),
                           [](const Vec3 &v) { return is_finite(v); });
    };
    return finite(trace.output) && finite(trace.aux_output);
}

void check_scene(const TrainingScene &scene) {
    if (!scene.gt.frames.same_shape(scene.observations))
        throw ShapeError("scene observations and ground truth differ in shape");
}

}  // namespace

SceneObjective scene_objective(const TrackerParams &params, const TrainingScene &scene,
                               const PitStrategy &strategy, double aux_weight) {
    check_scene(scene);
    const ForwardTrace trace = forward_trace(params, scene.observations);
    SceneObjective obj;
    obj.schedule = select_schedule(scene.gt.frames, trace.output, strategy);
    if (params.shape().aux_head)
        obj.aux_schedule = select_schedule(scene.gt.frames, trace.aux_output, PitStrategy::fpit());
    obj.loss = objective_from_trace(trace, scene, obj.schedule, obj.aux_schedule, aux_weight);
    return obj;
}

double scene_loss_fixed(const TrackerParams &params, const TrainingScene &scene,
                        const PermutationSchedule &schedule,
                        const PermutationSchedule &aux_schedule, double aux_weight) {
    check_scene(scene);
    return objective_from_trace(forward_trace(params, scene.observations), scene, schedule,
                                aux_schedule, aux_weight);
}

SceneGradient scene_gradient(const TrackerParams &params, const TrainingScene &scene,
                             const PitStrategy &strategy, double aux_weight) {
    check_scene(scene);
    const ForwardTrace trace = forward_trace(params, scene.observations);
    SceneGradient out;
    if (!outputs_finite(trace)) {
        // No schedule exists for non-finite outputs; the caller sees the loss and aborts.
        out.loss = std::numeric_limits<double>::quiet_NaN();
        out.grad = TrackerParams(params.shape());
        return out;
    }
    const PermutationSchedule sched = select_schedule(scene.gt.frames, trace.output, strategy);
    out.loss = pit_loss(scene.gt.frames, trace.output, sched);
    const SlotGrid upstream = pit_loss_grad(scene.gt.frames, trace.output, sched);
    if (params.shape().aux_head) {
        const PermutationSchedule aux_sched =
            select_schedule(scene.gt.frames, trace.aux_output, PitStrategy::fpit());
        out.loss += aux_weight * pit_loss(scene.gt.frames, trace.aux_output, aux_sched);
        SlotGrid aux_up = pit_loss_grad(scene.gt.frames, trace.aux_output, aux_sched);
        for (Vec3 &v : aux_up.values()) v *= aux_weight;
        out.grad = backward(params, trace, upstream, &aux_up);
    } else {
        out.grad = backward(params, trace, upstream);
    }
    return out;
}

namespace {

void check_batch(std::size_t scene_count, std::span<const std::size_t> batch) {
    if (batch.empty()) throw ParameterError("empty batch");
    for (std::size_t idx : batch)
        if (idx >= scene_count)
            throw ParameterError(fmt::format("batch index {} out of range", idx));
}

SceneGradient reduce_in_order(const TrackerParams &params, std::vector<SceneGradient> &parts) {
    SceneGradient total{0.0, TrackerParams(params.shape())};
    for (const auto &p : parts) {
        total.loss += p.loss;
        add_to(total.grad.values(), p.grad.values().data());
    }
    const double inv = 1.0 / static_cast<double>(parts.size());
    total.loss *= inv;
    for (double &g : total.grad.values()) g *= inv;
    return total;
}

}  // namespace

SceneGradient batch_gradient(const TrackerParams &params, std::span<const TrainingScene> scenes,
                             std::span<const std::size_t> batch, const PitStrategy &strategy,
                             double aux_weight) {
    check_batch(scenes.size(), batch);
    std::vector<SceneGradient> parts(batch.size());
    const auto n = static_cast<std::ptrdiff_t>(batch.size());
detail::parallel_for(n, [&](std::ptrdiff_t i) {
        parts[i] = scene_gradient(params, scenes[batch[i]], strategy, aux_weight);
    });
    return reduce_in_order(params, parts);
}

namespace serial {

SceneGradient batch_gradient(const TrackerParams &params, std::span<const TrainingScene> scenes,
                             std::span<const std::size_t> batch, const PitStrategy &strategy,
                             double aux_weight) {
    check_batch(scenes.size(), batch);
    std::vector<SceneGradient> parts;
    parts.reserve(batch.size());
    for (std::size_t idx : batch)
        parts.push_back(scene_gradient(params, scenes[idx], strategy, aux_weight));
    return reduce_in_order(params, parts);
}

}  // namespace serial

AdamW::AdamW(std::size_t size, double lr, double weight_decay, double beta1, double beta2,
             double eps)
    : lr_(lr), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps), m_(size, 0.0),
      v_(size, 0.0) {}

void AdamW::step(std::span<double> params, std::span<const double> grad) {
    if (params.size() != m_.size() || grad.size() != m_.size())
        throw ShapeError("optimizer state does not match the parameter vector");
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = b1_ * m_[i] + (1.0 - b1_) * grad[i];
        v_[i] = b2_ * v_[i] + (1.0 - b2_) * grad[i] * grad[i];
        const double mhat = m_[i] / c1;
        const double vhat = v_[i] / c2;
        params[i] -= lr_ * wd_ * params[i];
        params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
}

double clip_global_norm(std::span<double> grad, double max_norm) {
    const double total = std::sqrt(std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0));
    if (total > max_norm && total > 0.0) {
        const double s = max_norm / total;
        for (double &g : grad) g *= s;
    }
    return total;
}

double mean_loss(const TrackerParams &params, std::span<const TrainingScene> scenes,
                 const PitStrategy &strategy) {
    if (scenes.empty()) return 0.0;
    std::vector<double> losses(scenes.size());
    const auto n = static_cast<std::ptrdiff_t>(scenes.size());
detail::parallel_for(n, [&](std::ptrdiff_t i) {
        const ForwardTrace trace = forward_trace(params, scenes[i].observations);
        if (!outputs_finite(trace)) {
            losses[i] = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        losses[i] = pit_loss(scenes[i].gt.frames, trace.output,
                             select_schedule(scenes[i].gt.frames, trace.output, strategy));
    });
    return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

Checkpoint train(std::span<const TrainingScene> train_set, std::span<const TrainingScene> val_set,
                 const TrainConfig &cfg, const EpochCallback &on_epoch) {
    cfg.validate();
    if (train_set.empty()) throw ParameterError("training set is empty");
    for (const auto &s : train_set)
        if (s.gt.slots() != static_cast<std::size_t>(cfg.slots))
            throw ConfigError(fmt::format("training scene has {} slots, config expects {}",
                                          s.gt.slots(), cfg.slots));

    Checkpoint ckpt;
    ckpt.config = cfg;
    ckpt.params = TrackerParams::initialized(cfg.shape(), cfg.seed);
    AdamW opt(ckpt.params.size(), cfg.learning_rate, cfg.weight_decay);
    std::mt19937_64 order_rng(cfg.seed ^ 0x5DEECE66DULL);
    std::vector<std::size_t> order(train_set.size());

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), order_rng);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            const std::span<const std::size_t> batch(order.data() + start, stop - start);
            SceneGradient g = batch_gradient(ckpt.params, train_set, batch, cfg.strategy,
                                             cfg.aux_weight);
            if (!std::isfinite(g.loss))
                throw NumericError(fmt::format("non-finite loss {} at epoch {}, batch {}", g.loss,
                                               epoch, batches));
            clip_global_norm(g.grad.values(), cfg.grad_clip_norm);
            opt.step(ckpt.params.values(), g.grad.values());
            loss_sum += g.loss;
            ++batches;
        }
        EpochReport report{epoch, loss_sum / static_cast<double>(batches), std::nullopt};
        ckpt.train_loss_history.push_back(report.train_loss);
        if (!val_set.empty()) {
            report.val_loss = mean_loss(ckpt.params, val_set, cfg.strategy);
            if (!std::isfinite(*report.val_loss))
                throw NumericError(fmt::format("non-finite validation loss {} at epoch {}",
                                               *report.val_loss, epoch));
            ckpt.val_loss_history.push_back(*report.val_loss);
        }
        ckpt.epoch = epoch + 1;
        if (on_epoch) on_epoch(report);
    }
    return ckpt;
}

GradCheckReport grad_check(const TrackerParams &params, const TrainingScene &scene,
                           const PitStrategy &strategy, double step, double tolerance,
                           double aux_weight, double abs_floor) {
    if (!(step > 0.0)) throw ParameterError("finite-difference step must be positive");
    check_scene(scene);
    const ForwardTrace trace = forward_trace(params, scene.observations);
    const PermutationSchedule sched = select_schedule(scene.gt.frames, trace.output, strategy);
    PermutationSchedule aux_sched;
    TrackerParams analytic;
    const SlotGrid upstream = pit_loss_grad(scene.gt.frames, trace.output, sched);
    if (params.shape().aux_head) {
        aux_sched = select_schedule(scene.gt.frames, trace.aux_output, PitStrategy::fpit());
        SlotGrid aux_up = pit_loss_grad(scene.gt.frames, trace.aux_output, aux_sched);
        for (Vec3 &v : aux_up.values()) v *= aux_weight;
        analytic = backward(params, trace, upstream, &aux_up);
    } else {
        analytic = backward(params, trace, upstream);
    }

    GradCheckReport report;
    TrackerParams probe = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double base = probe.values()[i];
        probe.values()[i] = base + step;
        const double up = scene_loss_fixed(probe, scene, sched, aux_sched, aux_weight);
        probe.values()[i] = base - step;
        const double down = scene_loss_fixed(probe, scene, sched, aux_sched, aux_weight);
        probe.values()[i] = base;

        const double numeric = (up - down) / (2.0 * step);
        const double a = analytic.values()[i];
        const double abs_err = std::abs(a - numeric);
        const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), abs_floor});
        report.max_abs_error = std::max(report.max_abs_error, abs_err);
        if (rel > report.max_rel_error || report.checked == 0) {
            report.max_rel_error = rel;
            report.worst_index = i;
        }
        ++report.checked;
    }
    report.worst_parameter = params.locate(report.worst_index);
    report.passed = report.max_rel_error < tolerance;
    return report;
}

}  // namespace spit
