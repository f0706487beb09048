#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spit/accdoa.hpp"

namespace spit {

/// Square cost matrix; entry (i, j) is the cost of pairing reference i with estimate j.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t side, double fill = 0.0)
        : side_(side), entries_(side * side, fill) {}
    DistanceMatrix(std::size_t side, std::vector<double> row_major);

    std::size_t size() const { return side_; }
    double &operator()(std::size_t i, std::size_t j) { return entries_[i * side_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * side_ + j]; }
    std::span<const double> entries() const { return entries_; }

    friend bool operator==(const DistanceMatrix &, const DistanceMatrix &) = default;

private:
    std::size_t side_ = 0;
    std::vector<double> entries_;
};

/// mapping[m] is the estimate slot paired with reference m.
using Permutation = std::vector<int>;
using DistanceMatrixSequence = std::vector<DistanceMatrix>;

enum class DistanceKind { euclidean, squared };
enum class WindowMode { causal, centered };

DistanceMatrix distance_matrix(std::span<const AccdoaVec> gt_frame,
                               std::span<const AccdoaVec> est_frame,
                               DistanceKind kind = DistanceKind::euclidean);

/// One matrix per frame. Frames are processed in parallel.
DistanceMatrixSequence distance_sequence(const SlotGrid &gt, const SlotGrid &est,
                                         DistanceKind kind = DistanceKind::euclidean);

/// Minimum-cost perfect assignment, O(M^3) shortest augmenting paths.
/// Among optimal assignments the lexicographically smallest mapping is returned.
Permutation hungarian(const DistanceMatrix &d);

double assignment_cost(const DistanceMatrix &d, const Permutation &p);
bool is_permutation(std::span<const int> mapping);
Permutation inverse(const Permutation &p);

/// Elementwise moving average over time. Windows are clipped at the sequence ends and
/// averaged over the frames they actually cover. Centered windows of even length reach one
/// frame further into the past than into the future.
DistanceMatrixSequence moving_average(const DistanceMatrixSequence &seq, int window,
                                      WindowMode mode);

/// Mean over all frames; equals the last causal moving average whose window spans the sequence.
DistanceMatrix time_average(const DistanceMatrixSequence &seq);

/// Frame range [first, last] covered by the averaging window at frame t.
std::pair<std::size_t, std::size_t> window_bounds(std::size_t t, std::size_t frames, int window,
                                                  WindowMode mode);

/// Single-threaded references for the parallel kernels above; results are bit-identical.
namespace serial {
DistanceMatrixSequence distance_sequence(const SlotGrid &gt, const SlotGrid &est,
                                         DistanceKind kind = DistanceKind::euclidean);
DistanceMatrixSequence moving_average(const DistanceMatrixSequence &seq, int window,
                                      WindowMode mode);
}  // namespace serial

}  // namespace spit
