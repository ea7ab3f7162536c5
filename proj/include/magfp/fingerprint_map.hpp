#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "magfp/types.hpp"

namespace magfp {

/// Offline-phase database: every surveyed path with its reference points.
/// meta is free-form provenance (not part of the CSV format; the JSON mirror
/// carries it).
struct FingerprintMap {
    std::vector<RefPath> paths;
    double spacing_m = 0.30;  ///< nominal distance between consecutive points
    std::map<std::string, std::string> meta;

    std::size_t total_points() const;
    const RefPoint* find_point(int point_id) const;
};

/// Ingestion shape for build_map: one path worth of positions + features.
struct SurveyPath {
    int path_id = 0;
    std::vector<std::pair<Vec2, FeatureVec>> points;
};

/// Assigns seq per path and dense point ids in input order.
/// Throws DuplicatePathId, EmptyPath.
FingerprintMap build_map(std::span<const SurveyPath> survey, double spacing_m = 0.30,
                         std::map<std::string, std::string> meta = {});

struct Violation {
    std::string message;
    int path_id = -1;
    int point_id = -1;
    int seq = -1;
};

/// Structural checks: unique ids, in-order seq, non-negative mh, consecutive
/// spacing within 1e-6 m of the declared spacing. With window_len set, paths
/// shorter than it are also flagged. Empty result means the map is clean.
std::vector<Violation> validate_map(const FingerprintMap& map,
                                    std::optional<int> window_len = std::nullopt);

struct WindowSet {
    std::vector<Window> windows;
    int skipped_paths = 0;  ///< paths shorter than the window length
};

/// All length-window_len slices of every path, in canonical
/// (path_id, start, direction) order with forward before reversed.
/// A path of length L yields L - window_len + 1 starts. Throws WindowTooShort
/// when window_len < 2; too-short paths are skipped and counted.
WindowSet enumerate_windows(const FingerprintMap& map, int window_len, bool include_reversed);

/// Field-wise equality of paths and points; spacing compared to 1e-9, meta
/// ignored (it does not survive the CSV format).
bool structurally_equal(const FingerprintMap& a, const FingerprintMap& b);

}  // namespace magfp
