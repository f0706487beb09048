#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace spit {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3 &operator+=(const Vec3 &o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr Vec3 &operator-=(const Vec3 &o) {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    constexpr Vec3 &operator*=(double s) {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3 &b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3 &b) { return a -= b; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr bool operator==(const Vec3 &, const Vec3 &) = default;
};

constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3 &a, const Vec3 &b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline bool is_finite(const Vec3 &a) {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

/// Activity-coupled DOA: direction is the DOA, norm is the activity probability.
using AccdoaVec = Vec3;

double norm(const AccdoaVec &a);

/// Angle between the directions of two nonzero vectors, in degrees [0, 180].
/// Throws DomainError when either vector has zero norm.
double angular_error_deg(const AccdoaVec &a, const AccdoaVec &b);

bool is_active(const AccdoaVec &a, double threshold);

/// Dense frames x slots array of vectors, row-major by frame.
class SlotGrid {
public:
    SlotGrid() = default;
    SlotGrid(std::size_t frames, std::size_t slots)
        : frames_(frames), slots_(slots), data_(frames * slots) {}

    std::size_t frames() const { return frames_; }
    std::size_t slots() const { return slots_; }
    bool same_shape(const SlotGrid &o) const { return frames_ == o.frames_ && slots_ == o.slots_; }

    Vec3 &at(std::size_t t, std::size_t m) { return data_[t * slots_ + m]; }
    const Vec3 &at(std::size_t t, std::size_t m) const { return data_[t * slots_ + m]; }

    std::span<Vec3> frame(std::size_t t) { return {data_.data() + t * slots_, slots_}; }
    std::span<const Vec3> frame(std::size_t t) const { return {data_.data() + t * slots_, slots_}; }

    std::span<Vec3> values() { return data_; }
    std::span<const Vec3> values() const { return data_; }

    friend bool operator==(const SlotGrid &, const SlotGrid &) = default;

private:
    std::size_t frames_ = 0;
    std::size_t slots_ = 0;
    std::vector<Vec3> data_;
};

/// Reference trajectories, zero-padded to M slots.
struct GroundTruthScene {
    SlotGrid frames;
    double frame_period_s = 0.2;
    int track_count = 0;

    std::size_t length() const { return frames.frames(); }
    std::size_t slots() const { return frames.slots(); }
};

struct EstimateScene {
    SlotGrid frames;
    double frame_period_s = 0.2;

    std::size_t length() const { return frames.frames(); }
    std::size_t slots() const { return frames.slots(); }
};

/// Stacks `tracks` (each one vector per frame) into the first slots of an M-slot scene.
/// Throws CapacityError when tracks.size() > slots, ShapeError on ragged lengths.
GroundTruthScene pad_to_m(std::span<const std::vector<AccdoaVec>> tracks, std::size_t slots,
                          double frame_period_s = 0.2);

/// Empty string when every ground-truth invariant holds, otherwise the first violation.
std::string check_ground_truth(const GroundTruthScene &scene, double tolerance = 1e-9);

}  // namespace spit
