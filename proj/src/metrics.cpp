#include "spit/metrics.hpp"

#include <map>

#include <fmt/format.h>

#include "spit/assignment.hpp"
#include "spit/errors.hpp"
#include "parallel.hpp"

namespace spit {

namespace {

// Larger than any achievable sum of in-cutoff angles, so the assignment first maximises
// the number of pairs inside the cutoff.
constexpr double kBlocked = 1e6;

}  // namespace

FrameMatch match_frame(std::span<const AccdoaVec> gt_frame, std::span<const AccdoaVec> est_frame,
                       double det_threshold, double cutoff_deg) {
    if (!(det_threshold >= 0.0 && det_threshold <= 1.0))
        throw ParameterError(fmt::format("detection threshold {} outside [0, 1]", det_threshold));
    if (!(cutoff_deg > 0.0)) throw ParameterError("cutoff_deg must be positive");

    std::vector<int> active, detected;
    for (std::size_t m = 0; m < gt_frame.size(); ++m)
        if (norm(gt_frame[m]) > 0.0) active.push_back(static_cast<int>(m));
    for (std::size_t j = 0; j < est_frame.size(); ++j)
        if (is_active(est_frame[j], det_threshold)) detected.push_back(static_cast<int>(j));

    FrameMatch match;
    const std::size_t side = std::max(active.size(), detected.size());
    DistanceMatrix cost(side, kBlocked);
    std::vector<double> angle(active.size() * detected.size(), 0.0);
    for (std::size_t i = 0; i < active.size(); ++i) {
        for (std::size_t j = 0; j < detected.size(); ++j) {
            const AccdoaVec &e = est_frame[detected[j]];
            if (norm(e) == 0.0) continue;
            const double a = angular_error_deg(gt_frame[active[i]], e);
            angle[i * detected.size() + j] = a;
            if (a <= cutoff_deg) cost(i, j) = a;
        }
    }

    std::vector<char> est_used(detected.size(), 0);
    const Permutation p = hungarian(cost);
    for (std::size_t i = 0; i < active.size(); ++i) {
        const auto j = static_cast<std::size_t>(p[i]);
        if (j < detected.size() && cost(i, j) < kBlocked) {
            match.pairs.push_back({active[i], detected[j], angle[i * detected.size() + j]});
            est_used[j] = 1;
        } else {
            match.misses.push_back(active[i]);
        }
    }
    for (std::size_t j = 0; j < detected.size(); ++j)
        if (!est_used[j]) match.false_positives.push_back(detected[j]);
    return match;
}

long count_ids(std::span<const FrameMatch> matches,
               const std::vector<std::vector<int>> &object_of) {
    if (object_of.size() != matches.size())
        throw ShapeError("object labels and matches differ in frame count");
    std::map<int, int> last_slot;
    long ids = 0;
    for (std::size_t t = 0; t < matches.size(); ++t) {
        for (const MatchedPair &p : matches[t].pairs) {
            const int obj = object_of[t].at(p.gt);
            if (obj < 0) continue;
            const auto it = last_slot.find(obj);
            if (it != last_slot.end() && it->second != p.est) ++ids;
            last_slot[obj] = p.est;
        }
    }
    return ids;
}

long count_ids(std::span<const FrameMatch> matches) {
    std::map<int, int> last_slot;
    long ids = 0;
    for (const FrameMatch &f : matches) {
        for (const MatchedPair &p : f.pairs) {
            const auto it = last_slot.find(p.gt);
            if (it != last_slot.end() && it->second != p.est) ++ids;
            last_slot[p.gt] = p.est;
        }
    }
    return ids;
}

std::vector<std::vector<int>> label_tracks(const GroundTruthScene &scene, int &track_count) {
    std::vector<std::vector<int>> labels(scene.length(), std::vector<int>(scene.slots(), -1));
    track_count = 0;
    for (std::size_t m = 0; m < scene.slots(); ++m) {
        bool in_run = false;
        for (std::size_t t = 0; t < scene.length(); ++t) {
            const bool active = norm(scene.frames.at(t, m)) > 0.0;
            if (active && !in_run) ++track_count;
            if (active) labels[t][m] = track_count - 1;
            in_run = active;
        }
    }
    return labels;
}

namespace {

struct ScenePartial {
    MetricCounts counts;
    long ids = 0;
    double angle_sum = 0.0;
};

void check_scene_lists(std::span<const GroundTruthScene> gt, std::span<const EstimateScene> est) {
    if (gt.size() != est.size())
        throw ShapeError(fmt::format("{} reference scenes but {} estimate scenes", gt.size(),
                                     est.size()));
    for (std::size_t i = 0; i < gt.size(); ++i)
        if (!gt[i].frames.same_shape(est[i].frames))
            throw ShapeError(fmt::format("scene {} differs in shape from its estimate", i));
}

ScenePartial evaluate_scene(const GroundTruthScene &gt, const EstimateScene &est,
                            double det_threshold, double cutoff_deg) {
    ScenePartial part;
    int tracks = 0;
    const auto labels = label_tracks(gt, tracks);
    part.counts.gt_tracks = tracks;
    part.counts.frames = static_cast<long>(gt.length());
    std::vector<FrameMatch> matches;
    matches.reserve(gt.length());
    for (std::size_t t = 0; t < gt.length(); ++t) {
        matches.push_back(match_frame(gt.frames.frame(t), est.frames.frame(t), det_threshold,
                                      cutoff_deg));
        const FrameMatch &f = matches.back();
        part.counts.true_positives += static_cast<long>(f.pairs.size());
        part.counts.misses += static_cast<long>(f.misses.size());
        part.counts.false_positives += static_cast<long>(f.false_positives.size());
        part.counts.gt_active += static_cast<long>(f.pairs.size() + f.misses.size());
        for (const MatchedPair &p : f.pairs) part.angle_sum += p.angle_deg;
    }
    part.ids = count_ids(matches, labels);
    return part;
}

MetricsReport combine(std::span<const ScenePartial> parts) {
    MetricsReport r;
    double angle_sum = 0.0;
    for (const ScenePartial &p : parts) {
        r.counts.true_positives += p.counts.true_positives;
        r.counts.misses += p.counts.misses;
        r.counts.false_positives += p.counts.false_positives;
        r.counts.gt_active += p.counts.gt_active;
        r.counts.frames += p.counts.frames;
        r.counts.gt_tracks += p.counts.gt_tracks;
        r.ids_count += p.ids;
        angle_sum += p.angle_sum;
    }
    if (r.counts.true_positives > 0)
        r.mae_deg = angle_sum / static_cast<double>(r.counts.true_positives);
    const auto ratio = [](long num, long den) {
        return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
    };
    r.ids_ratio = ratio(r.ids_count, r.counts.gt_tracks);
    r.ids_per_gt_instance = ratio(r.ids_count, r.counts.gt_active);
    r.miss_ratio = ratio(r.counts.misses, r.counts.gt_active);
    r.fp_ratio = ratio(r.counts.false_positives, r.counts.gt_active);
    return r;
}

}  // namespace

MetricsReport evaluate(std::span<const GroundTruthScene> gt_scenes,
                       std::span<const EstimateScene> est_scenes, double det_threshold,
                       double cutoff_deg) {
    check_scene_lists(gt_scenes, est_scenes);
    std::vector<ScenePartial> parts(gt_scenes.size());
    const auto n = static_cast<std::ptrdiff_t>(gt_scenes.size());
    detail::parallel_for(n, [&](std::ptrdiff_t i) {
        parts[i] = evaluate_scene(gt_scenes[i], est_scenes[i], det_threshold, cutoff_deg);
    });
    return combine(parts);
}

DetCurve det_curve(std::span<const GroundTruthScene> gt_scenes,
                   std::span<const EstimateScene> est_scenes, std::span<const double> thresholds,
                   double cutoff_deg) {
    if (thresholds.empty()) throw ParameterError("threshold list is empty");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] >= 0.0 && thresholds[i] <= 1.0))
            throw ParameterError(fmt::format("threshold {} outside [0, 1]", thresholds[i]));
        if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
            throw ParameterError("thresholds must be strictly increasing");
    }
    DetCurve curve;
    for (double th : thresholds) {
        const MetricsReport r = evaluate(gt_scenes, est_scenes, th, cutoff_deg);
        curve.samples.push_back({th, r.miss_ratio, r.fp_ratio});
    }
    return curve;
}

namespace serial {

MetricsReport evaluate(std::span<const GroundTruthScene> gt_scenes,
                       std::span<const EstimateScene> est_scenes, double det_threshold,
                       double cutoff_deg) {
    check_scene_lists(gt_scenes, est_scenes);
    std::vector<ScenePartial> parts;
    parts.reserve(gt_scenes.size());
    for (std::size_t i = 0; i < gt_scenes.size(); ++i)
        parts.push_back(evaluate_scene(gt_scenes[i], est_scenes[i], det_threshold, cutoff_deg));
    return combine(parts);
}

}  // namespace serial

}  // namespace spit
