#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <fmt/format.h>

namespace spit::plots {

namespace {

constexpr const char *kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

/// Axis box mapping data coordinates to pixels.
struct Panel {
    double left, top, width, height;
    double x0, x1, y0, y1;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
    double py(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

void frame_panel(std::string &svg, const Panel &p, const std::string &xlabel,
                 const std::string &ylabel, int xticks, int yticks) {
    svg += fmt::format(R"(<rect x="{:.1f}" y="{:.1f}" width="{:.1f}" height="{:.1f}" fill="none" stroke="#000"/>)"
                       "\n",
                       p.left, p.top, p.width, p.height);
    for (int i = 0; i <= xticks; ++i) {
        const double x = p.x0 + (p.x1 - p.x0) * i / xticks;
        svg += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="10" text-anchor="middle">{:g}</text>)"
                           "\n",
                           p.px(x), p.top + p.height + 13, x);
    }
    for (int i = 0; i <= yticks; ++i) {
        const double y = p.y0 + (p.y1 - p.y0) * i / yticks;
        svg += fmt::format(R"(<line x1="{:.1f}" x2="{:.1f}" y1="{:.1f}" y2="{:.1f}" stroke="#ddd"/>)"
                           "\n",
                           p.left, p.left + p.width, p.py(y), p.py(y));
        svg += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="10" text-anchor="end">{:g}</text>)"
                           "\n",
                           p.left - 4, p.py(y) + 3, y);
    }
    svg += fmt::format(R"(<text x="{:.1f}" y="{:.1f}" font-size="11" text-anchor="middle">{}</text>)"
                       "\n",
                       p.left + p.width / 2, p.top + p.height + 28, escape(xlabel));
    svg += fmt::format(
        R"svg(<text x="{:.1f}" y="{:.1f}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.1f} {:.1f})">{}</text>)svg"
        "\n",
        p.left - 34, p.top + p.height / 2, p.left - 34, p.top + p.height / 2, escape(ylabel));
}

std::string polyline(const std::vector<std::pair<double, double>> &pts, const char *color,
                     bool dashed) {
    if (pts.size() < 2) return {};
    std::string s = R"(<polyline fill="none" stroke-width="1.5" stroke=")";
    s += color;
    s += '"';
    if (dashed) s += R"( stroke-dasharray="4 3")";
    s += R"( points=")";
    for (const auto &[x, y] : pts) s += fmt::format("{:.1f},{:.1f} ", x, y);
    s += "\"/>\n";
    return s;
}

double azimuth_deg(const Vec3 &v) { return std::atan2(v.y, v.x) * 180.0 / std::numbers::pi; }
double elevation_deg(const Vec3 &v) {
    return std::asin(std::clamp(v.z / norm(v), -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

}  // namespace

std::string det_svg(const DetCurve &curve, const std::string &title) {
    double xmax = 0.1;
    for (const auto &s : curve.samples) xmax = std::max(xmax, s.fp_ratio);
    const Panel p{60, 30, 400, 300, 0.0, std::ceil(xmax * 10.0) / 10.0, 0.0, 1.0};
    std::string svg = R"(<svg xmlns="http://www.w3.org/2000/svg" width="500" height="380">)" "\n";
    svg += fmt::format(R"(<text x="260" y="18" font-size="13" text-anchor="middle">{}</text>)" "\n",
                       escape(title));
    frame_panel(svg, p, "false-positive ratio", "miss ratio", 5, 5);
    std::vector<std::pair<double, double>> pts;
    for (const auto &s : curve.samples) {
        pts.emplace_back(p.px(s.fp_ratio), p.py(s.miss_ratio));
        svg += fmt::format(R"(<circle cx="{:.1f}" cy="{:.1f}" r="2.5" fill="{}"><title>threshold {:g}</title></circle>)"
                           "\n",
                           pts.back().first, pts.back().second, kPalette[0], s.threshold);
    }
    svg += polyline(pts, kPalette[0], false);
    svg += "</svg>\n";
    return svg;
}

std::string timeline_svg(const GroundTruthScene &gt, const EstimateScene &est,
                         double det_threshold, const std::string &title) {
    const double t_end = std::max(1.0, gt.length() * gt.frame_period_s);
    const Panel az{60, 30, 640, 200, 0.0, t_end, -180.0, 180.0};
    const Panel el{60, 290, 640, 160, 0.0, t_end, -90.0, 90.0};
    std::string svg = R"(<svg xmlns="http://www.w3.org/2000/svg" width="740" height="500">)" "\n";
    svg += fmt::format(R"(<text x="380" y="18" font-size="13" text-anchor="middle">{}</text>)" "\n",
                       escape(title));
    frame_panel(svg, az, "time (s)", "azimuth (deg)", 10, 4);
    frame_panel(svg, el, "time (s)", "elevation (deg)", 10, 4);

    // Each grid is drawn as runs of consecutive visible frames; azimuth runs also break where
    // the angle wraps around.
    auto draw = [&](const SlotGrid &grid, double threshold, bool dashed) {
        for (std::size_t m = 0; m < grid.slots(); ++m) {
            const char *color = kPalette[m % std::size(kPalette)];
            std::vector<std::pair<double, double>> a_run, e_run;
            double prev_az = 0.0;
            auto flush = [&] {
                svg += polyline(a_run, color, dashed);
                svg += polyline(e_run, color, dashed);
                a_run.clear();
                e_run.clear();
            };
            for (std::size_t t = 0; t < grid.frames(); ++t) {
                const Vec3 &v = grid.at(t, m);
                const double n = norm(v);
                if (n == 0.0 || n < threshold) {
                    flush();
                    continue;
                }
                const double time = t * gt.frame_period_s;
                const double a = azimuth_deg(v);
                if (!a_run.empty() && std::abs(a - prev_az) > 180.0) flush();
                prev_az = a;
                a_run.emplace_back(az.px(time), az.py(a));
                e_run.emplace_back(el.px(time), el.py(elevation_deg(v)));
            }
            flush();
        }
    };
    draw(gt.frames, 0.0, false);
    draw(est.frames, det_threshold, true);
    svg += "</svg>\n";
    return svg;
}

}  // namespace spit::plots
