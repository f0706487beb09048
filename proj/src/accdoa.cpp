#include "spit/accdoa.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "spit/errors.hpp"

namespace spit {

double norm(const AccdoaVec &a) { return std::sqrt(dot(a, a)); }

double angular_error_deg(const AccdoaVec &a, const AccdoaVec &b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0)
        throw DomainError("angular error undefined for a zero-norm vector");
    const double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
    return std::acos(c) * 180.0 / std::numbers::pi;
}

bool is_active(const AccdoaVec &a, double threshold) { return norm(a) >= threshold; }

GroundTruthScene pad_to_m(std::span<const std::vector<AccdoaVec>> tracks, std::size_t slots,
                          double frame_period_s) {
    if (tracks.size() > slots)
        throw CapacityError(fmt::format("{} tracks do not fit in {} slots", tracks.size(), slots));
    const std::size_t frames = tracks.empty() ? 0 : tracks.front().size();
    for (const auto &tr : tracks)
        if (tr.size() != frames)
            throw ShapeError(fmt::format("track length {} differs from {}", tr.size(), frames));

    GroundTruthScene scene;
    scene.frames = SlotGrid(frames, slots);
    scene.frame_period_s = frame_period_s;
    scene.track_count = static_cast<int>(tracks.size());
    for (std::size_t m = 0; m < tracks.size(); ++m)
        for (std::size_t t = 0; t < frames; ++t) scene.frames.at(t, m) = tracks[m][t];
    return scene;
}

std::string check_ground_truth(const GroundTruthScene &scene, double tolerance) {
    if (scene.track_count < 0 || static_cast<std::size_t>(scene.track_count) > scene.slots())
        return fmt::format("track_count {} outside [0, {}]", scene.track_count, scene.slots());
    if (!(scene.frame_period_s > 0.0)) return "frame_period_s must be positive";
    for (std::size_t t = 0; t < scene.length(); ++t) {
        for (std::size_t m = 0; m < scene.slots(); ++m) {
            const Vec3 &v = scene.frames.at(t, m);
            if (!is_finite(v)) return fmt::format("non-finite vector at frame {} slot {}", t, m);
            const double n = norm(v);
            if (n > tolerance && std::abs(n - 1.0) > tolerance)
                return fmt::format("norm {} at frame {} slot {} is neither 0 nor 1", n, t, m);
            if (m >= static_cast<std::size_t>(scene.track_count) && n != 0.0)
                return fmt::format("padding slot {} is nonzero at frame {}", m, t);
        }
    }
    return {};
}

}  // namespace spit
