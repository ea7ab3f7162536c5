#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "magfp/fingerprint_map.hpp"

namespace magfp {

/// A localized magnetic disturbance. strength is in uT*m^2;
/// vertical_fraction in [0, 1] splits it between mv and mh.
struct FieldSource {
    Vec2 pos;
    double strength = 0.0;
    double vertical_fraction = 0.5;
};

/// Deterministic synthetic field over a rectangular floor [0,w] x [0,h].
struct FieldModel {
    std::vector<FieldSource> sources;
    FeatureVec background{46.0, 30.0};
    double floor_w = 60.0;
    double floor_h = 79.0;
    std::uint64_t seed = 0;  ///< seed the sources were drawn from
};

/// Queries closer than this to a source are rejected.
inline constexpr double source_clearance_m = 0.05;
/// Softening term (m^2) keeping source contributions finite.
inline constexpr double softening_m2 = 0.25;

/// Sources scattered uniformly over the floor with strengths in [100, 400]
/// and vertical fractions in [0.2, 0.8].
FieldModel make_default_field(double floor_w, double floor_h, int n_sources,
                              std::uint64_t seed);

/// Field value at a position: background plus strength / (d^2 + softening)
/// per source, split by vertical fraction; mh clamped non-negative.
/// Throws SourceCollision within source_clearance_m of a source.
FeatureVec field_at(const FieldModel& model, const Vec2& pos);

struct SurveySpec {
    int n_paths = 24;
    int min_len = 20;
    int max_len = 50;
    double spacing_m = 0.30;
    std::optional<int> total_points;  ///< exact point total when set
};

/// Lays out n_paths straight or L-shaped axis-aligned polylines on the floor,
/// samples the field at every point, and returns the finished map. Fully
/// deterministic for a given (model, spec, seed); regenerates internally
/// until all point features are pairwise distinct. Throws FloorOverflow when
/// a path cannot be placed.
FingerprintMap generate_survey(const FieldModel& model, const SurveySpec& spec,
                               std::uint64_t seed);

enum class WarpKind { duplicate, drop };

struct WarpOp {
    int index = 0;  ///< position in the original window
    WarpKind kind = WarpKind::duplicate;
};

/// Replays a window with local time distortion: duplicates/drops the flagged
/// elements (coordinates move with their features), then adds seeded Gaussian
/// noise of the given stddev to every feature component (mh clamped at 0).
/// At most one op per index; later ops override earlier ones. Endpoints
/// cannot be dropped. Throws DegenerateWindow.
Window warp_replay(const Window& window, std::span<const WarpOp> ops, double noise_ut,
                   std::uint64_t seed);

/// The survey shape used by the docs and the evaluation suite:
/// 24 paths of 20..50 points totalling exactly 1024 at 0.30 m spacing.
SurveySpec canonical_survey_spec();

/// Matching floor: 60 x 79 m with 200 seeded sources.
FieldModel canonical_field(std::uint64_t seed);

inline constexpr int canonical_window_len = 20;

}  // namespace magfp
