#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "magfp/matching.hpp"

namespace magfp {

/// Euclidean positioning error in meters.
double point_error(const Vec2& truth, const Vec2& estimate);

/// Mean index-wise Euclidean error between two coordinate sequences of equal
/// length. Throws LengthMismatch (an empty pair counts as mismatched).
double path_error(std::span<const Vec2> truth, std::span<const Vec2> estimate);

struct CaseError {
    int case_id = 0;
    Vec2 truth;  ///< the target's true first coordinate (used for binning)
    double error_m = 0.0;
};

struct Quartiles {
    double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};

struct ErrorReport {
    std::vector<CaseError> per_case;
    Quartiles quartiles;
    double mean = 0.0;
};

/// Quartiles use linear interpolation between closest ranks.
ErrorReport aggregate_errors(std::vector<CaseError> per_case);

struct EvalParams {
    int window_len = 20;
    bool include_reversed = true;  ///< enumerate candidate windows from both ends
    DtwParams dtw;
    int threads = 1;  ///< >1 fans targets out across threads; results identical
};

/// Matches every target against the map and reports positioning errors.
/// Point matching queries with the target's first point and scores against
/// its first coordinate; path/DTW compare the matched window's coordinates
/// index-wise, reversed estimates as returned. Case ids are target indices.
ErrorReport evaluate_workload(const FingerprintMap& map, std::span<const Window> targets,
                              Algorithm algorithm, const EvalParams& params = {});

struct HeatCell {
    double x_m = 0, y_m = 0, error_m = 0;
};

/// Mean per-case error binned over square cells keyed by each case's true
/// first coordinate. Cells are addressed by their lower-left corner; only
/// non-empty cells appear, sorted by (x_m, y_m).
std::vector<HeatCell> error_heatmap(const ErrorReport& report, double cell_m);

/// Heatmap CSV: x_m,y_m,error_m.
std::string serialize_heatmap_csv(std::span<const HeatCell> cells);

struct WorkloadDesc {
    std::size_t n_points = 0;
    std::size_t n_paths = 0;
    std::size_t n_candidate_windows = 0;
    std::size_t n_targets = 0;
    int window_len = 0;
};

struct TimingEntry {
    Algorithm algorithm = Algorithm::point;
    double seconds = 0.0;
};

struct TimingReport {
    WorkloadDesc workload;
    int repetitions = 1;
    bool parallel = false;
    std::vector<TimingEntry> timings;
};

/// Median wall-clock seconds per algorithm for a full matching pass over the
/// targets. Runs each algorithm on one thread unless params.threads > 1, in
/// which case the parallel mode is what gets timed (and flagged as such).
TimingReport benchmark(const FingerprintMap& map, std::span<const Window> targets,
                       std::span<const Algorithm> algorithms, const EvalParams& params,
                       int repetitions);

}  // namespace magfp
