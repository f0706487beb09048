#include "spit/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "spit/errors.hpp"
#include "parallel.hpp"

namespace spit {

DistanceMatrix::DistanceMatrix(std::size_t side, std::vector<double> row_major)
    : side_(side), entries_(std::move(row_major)) {
    if (entries_.size() != side_ * side_)
        throw ShapeError(fmt::format("{} entries do not form a {}x{} matrix", entries_.size(),
                                     side_, side_));
}

DistanceMatrix distance_matrix(std::span<const AccdoaVec> gt_frame,
                               std::span<const AccdoaVec> est_frame, DistanceKind kind) {
    if (gt_frame.size() != est_frame.size())
        throw ShapeError(fmt::format("reference frame has {} slots, estimate frame {}",
                                     gt_frame.size(), est_frame.size()));
    const std::size_t m = gt_frame.size();
    DistanceMatrix d(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const Vec3 diff = gt_frame[i] - est_frame[j];
            const double sq = dot(diff, diff);
            d(i, j) = kind == DistanceKind::squared ? sq : std::sqrt(sq);
        }
    }
    return d;
}

namespace {

void check_pair(const SlotGrid &gt, const SlotGrid &est) {
    if (!gt.same_shape(est))
        throw ShapeError(fmt::format("reference is {}x{}, estimate is {}x{}", gt.frames(),
                                     gt.slots(), est.frames(), est.slots()));
}

// Mean of seq[first..last], accumulated in ascending frame order.
DistanceMatrix window_mean(const DistanceMatrixSequence &seq, std::size_t first,
                           std::size_t last) {
    const std::size_t side = seq[first].size();
    DistanceMatrix out(side);
    for (std::size_t k = first; k <= last; ++k) {
        if (seq[k].size() != side) throw ShapeError("matrices in a sequence differ in size");
        for (std::size_t i = 0; i < side; ++i)
            for (std::size_t j = 0; j < side; ++j) out(i, j) += seq[k](i, j);
    }
    const double count = static_cast<double>(last - first + 1);
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j) out(i, j) /= count;
    return out;
}

void check_window(int window) {
    if (window < 1) throw ParameterError(fmt::format("window must be >= 1, got {}", window));
}

}  // namespace

DistanceMatrixSequence distance_sequence(const SlotGrid &gt, const SlotGrid &est,
                                         DistanceKind kind) {
    check_pair(gt, est);
    const auto frames = static_cast<std::ptrdiff_t>(gt.frames());
    DistanceMatrixSequence seq(gt.frames());
detail::parallel_for(frames, [&](std::ptrdiff_t t) {
        seq[t] = distance_matrix(gt.frame(t), est.frame(t), kind);
    });
    return seq;
}

std::pair<std::size_t, std::size_t> window_bounds(std::size_t t, std::size_t frames, int window,
                                                  WindowMode mode) {
    check_window(window);
    const auto w = static_cast<std::size_t>(window);
    if (mode == WindowMode::causal) return {t + 1 >= w ? t + 1 - w : 0, t};
    const std::size_t back = w / 2;
    const std::size_t ahead = w - 1 - back;
    return {t >= back ? t - back : 0, std::min(frames - 1, t + ahead)};
}

DistanceMatrixSequence moving_average(const DistanceMatrixSequence &seq, int window,
                                      WindowMode mode) {
    check_window(window);
    const auto frames = static_cast<std::ptrdiff_t>(seq.size());
    DistanceMatrixSequence out(seq.size());
detail::parallel_for(frames, [&](std::ptrdiff_t t) {
        const auto [first, last] = window_bounds(t, seq.size(), window, mode);
        out[t] = window_mean(seq, first, last);
    });
    return out;
}

DistanceMatrix time_average(const DistanceMatrixSequence &seq) {
    if (seq.empty()) throw ShapeError("time average of an empty sequence");
    return window_mean(seq, 0, seq.size() - 1);
}

double assignment_cost(const DistanceMatrix &d, const Permutation &p) {
    double cost = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) cost += d(i, p[i]);
    return cost;
}

bool is_permutation(std::span<const int> mapping) {
    std::vector<char> seen(mapping.size(), 0);
    for (int j : mapping) {
        if (j < 0 || static_cast<std::size_t>(j) >= mapping.size() || seen[j]) return false;
        seen[j] = 1;
    }
    return true;
}

Permutation inverse(const Permutation &p) {
    Permutation inv(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = static_cast<int>(i);
    return inv;
}

namespace {

// Re-routes the matching inside the zero-reduced-cost subgraph so that rows pick the smallest
// admissible column in order. Every perfect matching of that subgraph is optimal.
class TightGraphRefiner {
public:
    TightGraphRefiner(const DistanceMatrix &d, const std::vector<double> &u,
                      const std::vector<double> &v, Permutation match)
        : n_(d.size()), tight_(n_ * n_), match_(std::move(match)), owner_(n_), locked_(n_, 0) {
        double scale = 1.0;
        for (double c : d.entries()) scale = std::max(scale, std::abs(c));
        const double tol = 1e-12 * scale * static_cast<double>(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                tight_[i * n_ + j] = d(i, j) - u[i + 1] - v[j + 1] <= tol;
        for (std::size_t i = 0; i < n_; ++i) {
            owner_[match_[i]] = static_cast<int>(i);
            tight_[i * n_ + match_[i]] = true;
        }
    }

    Permutation run() {
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                if (locked_[j] || !tight_[i * n_ + j]) continue;
                if (static_cast<std::size_t>(match_[i]) == j || reroute(i, j)) {
                    locked_[j] = 1;
                    break;
                }
            }
        }
        return match_;
    }

private:
    bool reroute(std::size_t row, std::size_t col) {
        seen_.assign(n_, 0);
        seen_[col] = 1;
        const int freed = match_[row];
        if (!augment(owner_[col], freed)) return false;
        match_[row] = static_cast<int>(col);
        owner_[col] = static_cast<int>(row);
        return true;
    }

    bool augment(int row, int target) {
        for (std::size_t c = 0; c < n_; ++c) {
            if (locked_[c] || seen_[c] || !tight_[row * n_ + c]) continue;
            seen_[c] = 1;
            if (static_cast<int>(c) == target || augment(owner_[c], target)) {
                match_[row] = static_cast<int>(c);
                owner_[c] = row;
                return true;
            }
        }
        return false;
    }

    std::size_t n_;
    std::vector<char> tight_;
    Permutation match_;
    std::vector<int> owner_;
    std::vector<char> locked_;
    std::vector<char> seen_;
};

}  // namespace

Permutation hungarian(const DistanceMatrix &d) {
    const std::size_t n = d.size();
    if (n == 0) return {};
    for (double c : d.entries())
        if (!std::isfinite(c)) throw DomainError("assignment cost matrix has a non-finite entry");
    constexpr double inf = std::numeric_limits<double>::infinity();

    // Potentials u (rows) and v (columns), 1-based; p[j] is the row matched to column j.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = d(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    Permutation raw(n);
    for (std::size_t j = 1; j <= n; ++j) raw[p[j] - 1] = static_cast<int>(j - 1);

    Permutation refined = TightGraphRefiner(d, u, v, raw).run();
    // Near-ties inside the tolerance must not cost anything measurable.
    if (assignment_cost(d, refined) > assignment_cost(d, raw)) return raw;
    return refined;
}

namespace serial {

DistanceMatrixSequence distance_sequence(const SlotGrid &gt, const SlotGrid &est,
                                         DistanceKind kind) {
    check_pair(gt, est);
    DistanceMatrixSequence seq;
    seq.reserve(gt.frames());
    for (std::size_t t = 0; t < gt.frames(); ++t)
        seq.push_back(distance_matrix(gt.frame(t), est.frame(t), kind));
    return seq;
}

DistanceMatrixSequence moving_average(const DistanceMatrixSequence &seq, int window,
                                      WindowMode mode) {
    check_window(window);
    DistanceMatrixSequence out;
    out.reserve(seq.size());
    for (std::size_t t = 0; t < seq.size(); ++t) {
        const auto [first, last] = window_bounds(t, seq.size(), window, mode);
        out.push_back(window_mean(seq, first, last));
    }
    return out;
}

}  // namespace serial

}  // namespace spit
