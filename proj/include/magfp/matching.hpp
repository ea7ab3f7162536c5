#pragma once

#include <optional>
#include <span>

#include "magfp/fingerprint_map.hpp"
#include "magfp/types.hpp"

namespace magfp {

struct DtwParams {
    /// Sakoe-Chiba half-width: cells with |i - j| beyond it are unreachable.
    /// Absent means unconstrained.
    std::optional<int> band;
};

/// Euclidean distance in (mv, mh) space.
double feature_distance(const FeatureVec& a, const FeatureVec& b);

/// Exhaustive nearest reference point. Ties keep the earliest point in map
/// order. Throws EmptyMap.
MatchResult point_match(const FeatureVec& target, const FingerprintMap& map);

/// Exhaustive nearest window by mean index-wise feature distance. Every
/// candidate must have the target's length. Ties keep the smallest canonical
/// window key. Throws EmptyCandidates, LengthMismatch.
MatchResult path_match(const Window& target, std::span<const Window> candidates);

/// Accumulated cost of the cheapest monotone alignment between the two
/// feature sequences (symmetric three-way steps, unit weights, not
/// normalized). Lengths may differ. Throws EmptySequence.
double dtw_distance(std::span<const FeatureVec> a, std::span<const FeatureVec> b,
                    const DtwParams& params = {});

/// Exhaustive nearest window by dtw_distance; same tie rule as path_match.
/// Throws EmptyCandidates.
MatchResult dtw_match(const Window& target, std::span<const Window> candidates,
                      const DtwParams& params = {});

}  // namespace magfp
