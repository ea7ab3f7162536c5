#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace magfp {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// One timestamped magnetometer + accelerometer reading in the device frame.
/// Gyroscope values are carried through from the log format but take no part
/// in feature extraction.
struct SensorSample {
    std::int64_t timestamp_us = 0;  ///< microseconds
    Vec3 m;                         ///< magnetic field, uT
    Vec3 a;                         ///< acceleration, m/s^2
    Vec3 g;                         ///< angular rate, rad/s (unused)
};

/// Orientation-independent magnetic feature pair in uT: the component along
/// gravity (signed) and the horizontal magnitude. mh is a norm, never negative.
struct FeatureVec {
    double mv = 0.0;
    double mh = 0.0;
    friend bool operator==(const FeatureVec&, const FeatureVec&) = default;
};

/// A surveyed reference position with its feature vector.
struct RefPoint {
    int point_id = 0;  ///< unique across the map, dense in ingestion order
    int path_id = 0;
    int seq = 0;       ///< 0-based position within the owning path
    Vec2 pos;          ///< meters
    FeatureVec feat;
    friend bool operator==(const RefPoint&, const RefPoint&) = default;
};

struct RefPath {
    int path_id = 0;
    std::vector<RefPoint> points;
    friend bool operator==(const RefPath&, const RefPath&) = default;
};

enum class Direction { forward, reversed };

constexpr std::string_view to_string(Direction d) {
    return d == Direction::forward ? "forward" : "reversed";
}

constexpr std::optional<Direction> direction_from_string(std::string_view s) {
    if (s == "forward") return Direction::forward;
    if (s == "reversed") return Direction::reversed;
    return std::nullopt;
}

/// Identity of one enumerated window. The ordering is the canonical
/// tie-break order used everywhere: (path_id, start, forward-before-reversed).
struct WindowKey {
    int path_id = 0;
    int start = 0;
    Direction direction = Direction::forward;
    friend auto operator<=>(const WindowKey&, const WindowKey&) = default;
};

/// A run of consecutive path points, the unit of path-based matching.
/// A reversed window holds the forward window's lists reversed element-wise;
/// `start` always refers to the forward slice.
struct Window {
    int path_id = 0;
    int start = 0;
    Direction direction = Direction::forward;
    std::vector<FeatureVec> feats;
    std::vector<Vec2> coords;

    WindowKey key() const { return {path_id, start, direction}; }
    int length() const { return static_cast<int>(feats.size()); }
    friend bool operator==(const Window&, const Window&) = default;
};

Window reversed_window(const Window& w);

enum class Algorithm { point, path, dtw };

constexpr std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::point: return "point";
        case Algorithm::path: return "path";
        default: return "dtw";
    }
}

constexpr std::optional<Algorithm> algorithm_from_string(std::string_view s) {
    if (s == "point") return Algorithm::point;
    if (s == "path") return Algorithm::path;
    if (s == "dtw") return Algorithm::dtw;
    return std::nullopt;
}

/// Outcome of one matching query: which reference was selected and how far it
/// was. point_id is set by point matching, window by path/DTW matching.
/// candidate_index points into the candidate list the matcher was given (or
/// the map's flat point order for point matching).
struct MatchResult {
    Algorithm algorithm = Algorithm::point;
    double score = 0.0;
    int candidate_index = -1;
    std::optional<int> point_id;
    std::optional<WindowKey> window;
};

}  // namespace magfp
