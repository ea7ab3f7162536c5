#include "magfp/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "magfp/errors.hpp"

namespace magfp {

double feature_distance(const FeatureVec& a, const FeatureVec& b) {
    const double dv = a.mv - b.mv;
    const double dh = a.mh - b.mh;
    return std::sqrt(dv * dv + dh * dh);
}

MatchResult point_match(const FeatureVec& target, const FingerprintMap& map) {
    double best = std::numeric_limits<double>::infinity();
    const RefPoint* best_point = nullptr;
    int best_index = -1;

    int index = 0;
    for (const RefPath& path : map.paths) {
        for (const RefPoint& pt : path.points) {
            const double score = feature_distance(target, pt.feat);
            // Strict < keeps the earliest point on ties.
            if (score < best) {
                best = score;
                best_point = &pt;
                best_index = index;
            }
            ++index;
        }
    }
    if (best_point == nullptr) throw EmptyMap("point_match: map has no points");

    MatchResult r;
    r.algorithm = Algorithm::point;
    r.score = best;
    r.candidate_index = best_index;
    r.point_id = best_point->point_id;
    return r;
}

MatchResult path_match(const Window& target, std::span<const Window> candidates) {
    if (candidates.empty()) throw EmptyCandidates("path_match: no candidate windows");
    const int len = target.length();
    if (len == 0) throw LengthMismatch("path_match: target window is empty");

    double best = std::numeric_limits<double>::infinity();
    int best_index = -1;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Window& c = candidates[i];
        if (c.length() != len) {
            throw LengthMismatch("path_match: candidate length " + std::to_string(c.length()) +
                                 " differs from target length " + std::to_string(len));
        }
        double sum = 0.0;
        for (int k = 0; k < len; ++k) {
            sum += feature_distance(target.feats[k], c.feats[k]);
        }
        const double score = sum / len;
        if (best_index < 0 || score < best ||
            (score == best && c.key() < candidates[best_index].key())) {
            best = score;
            best_index = static_cast<int>(i);
        }
    }

    MatchResult r;
    r.algorithm = Algorithm::path;
    r.score = best;
    r.candidate_index = best_index;
    r.window = candidates[best_index].key();
    return r;
}

double dtw_distance(std::span<const FeatureVec> a, std::span<const FeatureVec> b,
                    const DtwParams& params) {
    if (a.empty() || b.empty()) throw EmptySequence("dtw_distance: empty sequence");
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const double inf = std::numeric_limits<double>::infinity();

    // Two-row DP over the (n+1) x (m+1) accumulated-cost matrix. Row 0 and
    // column 0 are infinite walls except the (0,0) corner, so every alignment
    // starts at (1,1) and ends at (n,m).
    std::vector<double> prev(m + 1, inf);
    std::vector<double> cur(m + 1, inf);
    prev[0] = 0.0;

    const bool banded = params.band.has_value();
    const std::ptrdiff_t band = banded ? *params.band : 0;

    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = inf;
        std::size_t j_lo = 1;
        std::size_t j_hi = m;
        if (banded) {
            const std::ptrdiff_t lo = static_cast<std::ptrdiff_t>(i) - band;
            const std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(i) + band;
            j_lo = lo > 1 ? static_cast<std::size_t>(lo) : 1;
            j_hi = hi < static_cast<std::ptrdiff_t>(m) ? static_cast<std::size_t>(hi) : m;
            std::fill(cur.begin() + 1, cur.end(), inf);
            if (j_lo > j_hi) {
                std::swap(prev, cur);
                continue;
            }
        }
        for (std::size_t j = j_lo; j <= j_hi; ++j) {
            const double d = feature_distance(a[i - 1], b[j - 1]);
            const double through = std::min(prev[j - 1], std::min(prev[j], cur[j - 1]));
            cur[j] = d + through;
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

MatchResult dtw_match(const Window& target, std::span<const Window> candidates,
                      const DtwParams& params) {
    if (candidates.empty()) throw EmptyCandidates("dtw_match: no candidate windows");

    double best = std::numeric_limits<double>::infinity();
    int best_index = -1;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double score = dtw_distance(target.feats, candidates[i].feats, params);
        if (best_index < 0 || score < best ||
            (score == best && candidates[i].key() < candidates[best_index].key())) {
            best = score;
            best_index = static_cast<int>(i);
        }
    }

    MatchResult r;
    r.algorithm = Algorithm::dtw;
    r.score = best;
    r.candidate_index = best_index;
    r.window = candidates[best_index].key();
    return r;
}

}  // namespace magfp
