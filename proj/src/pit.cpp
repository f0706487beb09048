#include "spit/pit.hpp"

#include <fmt/format.h>

#include "spit/errors.hpp"
#include "parallel.hpp"

namespace spit {

std::string_view to_string(PitKind kind) {
    switch (kind) {
    case PitKind::frame: return "fpit";
    case PitKind::utterance: return "upit";
    case PitKind::sliding: return "spit";
    }
    return "?";
}

std::string_view to_string(WindowMode mode) {
    return mode == WindowMode::causal ? "causal" : "centered";
}

PitKind parse_pit_kind(std::string_view name) {
    if (name == "fpit") return PitKind::frame;
    if (name == "upit") return PitKind::utterance;
    if (name == "spit") return PitKind::sliding;
    throw ParameterError(fmt::format("unknown PIT strategy '{}'", name));
}

WindowMode parse_window_mode(std::string_view name) {
    if (name == "causal") return WindowMode::causal;
    if (name == "centered") return WindowMode::centered;
    throw ParameterError(fmt::format("unknown window mode '{}'", name));
}

namespace {

PermutationSchedule hungarian_each(const DistanceMatrixSequence &seq) {
    const auto frames = static_cast<std::ptrdiff_t>(seq.size());
    PermutationSchedule sched(seq.size());
detail::parallel_for(frames, [&](std::ptrdiff_t t) { sched[t] = hungarian(seq[t]); });
    return sched;
}

void check_schedule(const SlotGrid &gt, const SlotGrid &est, const PermutationSchedule &sched) {
    if (!gt.same_shape(est))
        throw ShapeError(fmt::format("reference is {}x{}, estimate is {}x{}", gt.frames(),
                                     gt.slots(), est.frames(), est.slots()));
    if (sched.size() != gt.frames())
        throw ShapeError(fmt::format("schedule has {} frames, scene {}", sched.size(),
                                     gt.frames()));
    for (const auto &p : sched)
        if (p.size() != gt.slots() || !is_permutation(p))
            throw ShapeError("schedule entry is not a permutation of the scene slots");
}

}  // namespace

PermutationSchedule fpit_assign(const DistanceMatrixSequence &seq) { return hungarian_each(seq); }

PermutationSchedule upit_assign(const DistanceMatrixSequence &seq) {
    if (seq.empty()) return {};
    return PermutationSchedule(seq.size(), hungarian(time_average(seq)));
}

PermutationSchedule spit_assign(const DistanceMatrixSequence &seq, int window, WindowMode mode) {
    return hungarian_each(moving_average(seq, window, mode));
}

PermutationSchedule assign(const DistanceMatrixSequence &seq, const PitStrategy &strategy) {
    switch (strategy.kind) {
    case PitKind::frame: return fpit_assign(seq);
    case PitKind::utterance: return upit_assign(seq);
    case PitKind::sliding: return spit_assign(seq, strategy.window, strategy.mode);
    }
    return {};
}

PermutationSchedule select_schedule(const SlotGrid &gt, const SlotGrid &est,
                                    const PitStrategy &strategy) {
    return assign(distance_sequence(gt, est, strategy.distance), strategy);
}

double pit_loss(const SlotGrid &gt, const SlotGrid &est, const PermutationSchedule &sched) {
    check_schedule(gt, est, sched);
    double total = 0.0;
    for (std::size_t t = 0; t < gt.frames(); ++t) {
        for (std::size_t m = 0; m < gt.slots(); ++m) {
            const Vec3 diff = gt.at(t, m) - est.at(t, sched[t][m]);
            total += dot(diff, diff);
        }
    }
    const double count = static_cast<double>(gt.frames() * gt.slots());
    return count > 0.0 ? total / count : 0.0;
}

double pit_loss(const GroundTruthScene &gt, const EstimateScene &est,
                const PermutationSchedule &sched) {
    return pit_loss(gt.frames, est.frames, sched);
}

SlotGrid pit_loss_grad(const SlotGrid &gt, const SlotGrid &est, const PermutationSchedule &sched) {
    check_schedule(gt, est, sched);
    SlotGrid grad(gt.frames(), gt.slots());
    const double count = static_cast<double>(gt.frames() * gt.slots());
    if (count == 0.0) return grad;
    const double scale = 2.0 / count;
    for (std::size_t t = 0; t < gt.frames(); ++t)
        for (std::size_t m = 0; m < gt.slots(); ++m) {
            const auto j = static_cast<std::size_t>(sched[t][m]);
            grad.at(t, j) = (est.at(t, j) - gt.at(t, m)) * scale;
        }
    return grad;
}

SlotGrid pit_loss_grad(const GroundTruthScene &gt, const EstimateScene &est,
                       const PermutationSchedule &sched) {
    return pit_loss_grad(gt.frames, est.frames, sched);
}

namespace serial {

PermutationSchedule fpit_assign(const DistanceMatrixSequence &seq) {
    PermutationSchedule sched;
    sched.reserve(seq.size());
    for (const auto &d : seq) sched.push_back(hungarian(d));
    return sched;
}

PermutationSchedule spit_assign(const DistanceMatrixSequence &seq, int window, WindowMode mode) {
    return serial::fpit_assign(serial::moving_average(seq, window, mode));
}

}  // namespace serial

}  // namespace spit
