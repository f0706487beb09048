#pragma once

#include <optional>
#include <span>
#include <vector>

#include "spit/accdoa.hpp"

namespace spit {

struct MatchedPair {
    int gt = 0;
    int est = 0;
    double angle_deg = 0.0;
};

/// Frame-level association between reference tracks and detected estimate slots.
struct FrameMatch {
    std::vector<MatchedPair> pairs;
    std::vector<int> misses;           // reference slots
    std::vector<int> false_positives;  // estimate slots
};

struct MetricCounts {
    long true_positives = 0;
    long misses = 0;
    long false_positives = 0;
    long gt_active = 0;  // active (track, frame) pairs
    long frames = 0;
    long gt_tracks = 0;  // contiguous activity runs over all reference slots
};

struct MetricsReport {
    std::optional<double> mae_deg;  // absent when there is no true positive
    long ids_count = 0;
    double ids_ratio = 0.0;             // IDS / reference tracks
    double ids_per_gt_instance = 0.0;   // IDS / active (track, frame) pairs
    double miss_ratio = 0.0;
    double fp_ratio = 0.0;
    MetricCounts counts;
};

struct DetSample {
    double threshold = 0.0;
    double miss_ratio = 0.0;
    double fp_ratio = 0.0;
};

struct DetCurve {
    std::vector<DetSample> samples;
};

inline constexpr double kDefaultDetThreshold = 0.5;
inline constexpr double kDefaultCutoffDeg = 30.0;

/// Associates active reference vectors with estimates whose norm reaches det_threshold.
/// The assignment maximises the number of pairs within cutoff_deg and, among those, minimises
/// the summed angle; pairs beyond the cutoff count as one miss plus one false positive.
FrameMatch match_frame(std::span<const AccdoaVec> gt_frame, std::span<const AccdoaVec> est_frame,
                       double det_threshold = kDefaultDetThreshold,
                       double cutoff_deg = kDefaultCutoffDeg);

/// Identity switches, treating each gt index of FrameMatch as one object. A switch is a match
/// to a slot different from the object's most recent earlier match; unmatched frames keep the
/// remembered slot.
long count_ids(std::span<const FrameMatch> matches);

/// Same rule with explicit object labels: object_of[t][gt] names the object occupying
/// reference slot gt at frame t (-1 when inactive).
long count_ids(std::span<const FrameMatch> matches,
               const std::vector<std::vector<int>> &object_of);

/// Labels each contiguous run of activity in a reference slot as a separate object.
std::vector<std::vector<int>> label_tracks(const GroundTruthScene &scene, int &track_count);

MetricsReport evaluate(std::span<const GroundTruthScene> gt_scenes,
                       std::span<const EstimateScene> est_scenes,
                       double det_threshold = kDefaultDetThreshold,
                       double cutoff_deg = kDefaultCutoffDeg);

/// One evaluate() per threshold; thresholds must be strictly increasing in [0, 1].
DetCurve det_curve(std::span<const GroundTruthScene> gt_scenes,
                   std::span<const EstimateScene> est_scenes, std::span<const double> thresholds,
                   double cutoff_deg = kDefaultCutoffDeg);

namespace serial {
MetricsReport evaluate(std::span<const GroundTruthScene> gt_scenes,
                       std::span<const EstimateScene> est_scenes,
                       double det_threshold = kDefaultDetThreshold,
                       double cutoff_deg = kDefaultCutoffDeg);
}

}  // namespace spit
