#include "magfp/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "magfp/errors.hpp"

namespace magfp {

namespace {

double dot3(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

double norm3(const Vec3& v) { return std::sqrt(dot3(v, v)); }

}  // namespace

FeatureVec extract_features_aligned(const SensorSample& s) {
    return {s.m.z, std::sqrt(s.m.x * s.m.x + s.m.y * s.m.y)};
}

FeatureVec extract_features_projected(const SensorSample& s) {
    // Axis-aligned gravity reduces the projection to the screen-up form.
    // Taking that branch verbatim keeps the two extractors bit-identical on
    // cart-mounted logs.
    if (s.a.x == 0.0 && s.a.y == 0.0 && s.a.z > gravity_epsilon) {
        return extract_features_aligned(s);
    }
    const double an = norm3(s.a);
    if (an <= gravity_epsilon) {
        throw DegenerateGravity("acceleration magnitude " + std::to_string(an) +
                                " cannot define a vertical direction");
    }
    // Signed scalar projection of m onto gravity; the device tilt angle never
    // materializes as a separate quantity.
    const double mv = dot3(s.m, s.a) / an;
    const double radicand = dot3(s.m, s.m) - mv * mv;
    // Analytically non-negative; rounding can push it a hair below zero.
    const double mh = radicand > 0.0 ? std::sqrt(radicand) : 0.0;
    return {mv, mh};
}

std::vector<std::size_t> select_marker_samples(std::span<const SensorSample> log,
                                               std::span<const Marker> markers) {
    if (log.empty()) throw EmptyLog("sensor log has no samples");
    const std::int64_t first = log.front().timestamp_us;
    const std::int64_t last = log.back().timestamp_us;

    std::vector<std::size_t> out;
    out.reserve(markers.size());
    for (const Marker& mk : markers) {
        if (mk.timestamp_us < first - marker_slack_us ||
            mk.timestamp_us > last + marker_slack_us) {
            throw MarkerOutOfRange("marker at " + std::to_string(mk.timestamp_us) +
                                   "us is outside the log range [" + std::to_string(first) +
                                   ", " + std::to_string(last) + "]us (+/- 1s)");
        }
        const auto it = std::lower_bound(
            log.begin(), log.end(), mk.timestamp_us,
            [](const SensorSample& s, std::int64_t t) { return s.timestamp_us < t; });
        std::size_t idx;
        if (it == log.begin()) {
            idx = 0;
        } else if (it == log.end()) {
            idx = log.size() - 1;
        } else {
            const std::size_t hi = static_cast<std::size_t>(it - log.begin());
            const std::size_t lo = hi - 1;
            const std::int64_t d_lo = mk.timestamp_us - log[lo].timestamp_us;
            const std::int64_t d_hi = log[hi].timestamp_us - mk.timestamp_us;
            idx = d_hi < d_lo ? hi : lo;  // ties keep the earlier sample
        }
        out.push_back(idx);
    }
    return out;
}

std::vector<PathFeature> extract_path_features(std::span<const SensorSample> log,
                                               std::span<const Marker> markers,
                                               FeatureMode mode) {
    const std::vector<std::size_t> picks = select_marker_samples(log, markers);
    std::vector<PathFeature> out;
    out.reserve(markers.size());
    for (std::size_t i = 0; i < markers.size(); ++i) {
        const SensorSample& s = log[picks[i]];
        const FeatureVec f = mode == FeatureMode::aligned ? extract_features_aligned(s)
                                                          : extract_features_projected(s);
        out.push_back({markers[i].pos, f});
    }
    return out;
}

}  // namespace magfp
