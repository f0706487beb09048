#pragma once

#include <string>

#include "spit/accdoa.hpp"
#include "spit/metrics.hpp"

namespace spit::plots {

/// Miss ratio against false-positive ratio, one marker per threshold.
std::string det_svg(const DetCurve &curve, const std::string &title);

/// Azimuth and elevation of every slot over time: reference solid, estimates dashed where
/// their norm reaches det_threshold.
std::string timeline_svg(const GroundTruthScene &gt, const EstimateScene &est,
                         double det_threshold, const std::string &title);

}  // namespace spit::plots
