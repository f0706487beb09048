#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "spit/accdoa.hpp"
#include "spit/assignment.hpp"

namespace spit {

/// One permutation per frame.
using PermutationSchedule = std::vector<Permutation>;

enum class PitKind { frame, utterance, sliding };

/// How the output-to-reference permutation is chosen before the MSE is taken.
struct PitStrategy {
    PitKind kind = PitKind::frame;
    int window = 10;  // frames, sliding only
    WindowMode mode = WindowMode::causal;
    DistanceKind distance = DistanceKind::euclidean;

    static PitStrategy fpit() { return {}; }
    static PitStrategy upit() { return {PitKind::utterance}; }
    static PitStrategy spit(int window = 10, WindowMode mode = WindowMode::causal) {
        return {PitKind::sliding, window, mode};
    }
};

std::string_view to_string(PitKind kind);
std::string_view to_string(WindowMode mode);
PitKind parse_pit_kind(std::string_view name);  // "fpit" | "upit" | "spit"
WindowMode parse_window_mode(std::string_view name);

/// Per-frame optimal permutation.
PermutationSchedule fpit_assign(const DistanceMatrixSequence &seq);

/// Single permutation for the time-averaged matrix, repeated at every frame.
PermutationSchedule upit_assign(const DistanceMatrixSequence &seq);

/// Per-frame permutation of the windowed average; window 1 reproduces fpit_assign.
PermutationSchedule spit_assign(const DistanceMatrixSequence &seq, int window,
                                WindowMode mode = WindowMode::causal);

PermutationSchedule assign(const DistanceMatrixSequence &seq, const PitStrategy &strategy);

/// Builds D(t) from the current estimates and selects the schedule in one go.
PermutationSchedule select_schedule(const SlotGrid &gt, const SlotGrid &est,
                                    const PitStrategy &strategy);

/// Mean over frames and slots of ||y_m(t) - est_{sched[t][m]}(t)||^2.
double pit_loss(const SlotGrid &gt, const SlotGrid &est, const PermutationSchedule &sched);
double pit_loss(const GroundTruthScene &gt, const EstimateScene &est,
                const PermutationSchedule &sched);

/// Gradient of pit_loss with respect to every estimate vector, schedule held fixed.
SlotGrid pit_loss_grad(const SlotGrid &gt, const SlotGrid &est, const PermutationSchedule &sched);
SlotGrid pit_loss_grad(const GroundTruthScene &gt, const EstimateScene &est,
                       const PermutationSchedule &sched);

namespace serial {
PermutationSchedule fpit_assign(const DistanceMatrixSequence &seq);
PermutationSchedule spit_assign(const DistanceMatrixSequence &seq, int window,
                                WindowMode mode = WindowMode::causal);
}  // namespace serial

}  // namespace spit
