#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "magfp/types.hpp"

namespace magfp {

/// |a| at or below this (m/s^2) cannot resolve a vertical direction.
inline constexpr double gravity_epsilon = 1e-6;

/// Markers may fall this far (us) outside the log's time range before they
/// are rejected.
inline constexpr std::int64_t marker_slack_us = 1'000'000;

enum class FeatureMode { aligned, projected };

/// Device mounted screen-up: the vertical component is mz and the horizontal
/// magnitude is the norm of (mx, my).
FeatureVec extract_features_aligned(const SensorSample& s);

/// Free device orientation: mv is the signed scalar projection of m onto the
/// measured gravity direction, mh the remaining magnitude. Throws
/// DegenerateGravity when |a| <= gravity_epsilon.
FeatureVec extract_features_projected(const SensorSample& s);

/// A ground-truth position tagged with the time it was passed.
struct Marker {
    std::int64_t timestamp_us = 0;
    Vec2 pos;
};

struct PathFeature {
    Vec2 pos;
    FeatureVec feat;
};

/// For each marker, the index of the log sample with the nearest timestamp
/// (ties favor the earlier sample). Throws EmptyLog, MarkerOutOfRange.
std::vector<std::size_t> select_marker_samples(std::span<const SensorSample> log,
                                               std::span<const Marker> markers);

/// Pairs every marker position with the features of its nearest sample.
std::vector<PathFeature> extract_path_features(std::span<const SensorSample> log,
                                               std::span<const Marker> markers,
                                               FeatureMode mode = FeatureMode::aligned);

}  // namespace magfp
