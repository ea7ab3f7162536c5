#include "magfp/fingerprint_map.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "magfp/errors.hpp"

namespace magfp {

std::size_t FingerprintMap::total_points() const {
    std::size_t n = 0;
    for (const RefPath& p : paths) n += p.points.size();
    return n;
}

const RefPoint* FingerprintMap::find_point(int point_id) const {
    for (const RefPath& path : paths) {
        for (const RefPoint& pt : path.points) {
            if (pt.point_id == point_id) return &pt;
        }
    }
    return nullptr;
}

FingerprintMap build_map(std::span<const SurveyPath> survey, double spacing_m,
                         std::map<std::string, std::string> meta) {
    FingerprintMap map;
    map.spacing_m = spacing_m;
    map.meta = std::move(meta);
    map.paths.reserve(survey.size());

    std::unordered_set<int> seen_ids;
    int next_point_id = 0;
    for (const SurveyPath& sp : survey) {
        if (!seen_ids.insert(sp.path_id).second) {
            throw DuplicatePathId("path_id " + std::to_string(sp.path_id) +
                                  " appears more than once");
        }
        if (sp.points.empty()) {
            throw EmptyPath("path " + std::to_string(sp.path_id) + " has no points");
        }
        RefPath path;
        path.path_id = sp.path_id;
        path.points.reserve(sp.points.size());
        int seq = 0;
        for (const auto& [pos, feat] : sp.points) {
            path.points.push_back({next_point_id++, sp.path_id, seq++, pos, feat});
        }
        map.paths.push_back(std::move(path));
    }
    return map;
}

std::vector<Violation> validate_map(const FingerprintMap& map,
                                    std::optional<int> window_len) {
    std::vector<Violation> out;
    std::unordered_set<int> path_ids;
    std::unordered_set<int> point_ids;

    for (const RefPath& path : map.paths) {
        if (!path_ids.insert(path.path_id).second) {
            out.push_back({"duplicate path_id", path.path_id, -1, -1});
        }
        if (path.points.empty()) {
            out.push_back({"path has no points", path.path_id, -1, -1});
            continue;
        }
        if (window_len && static_cast<int>(path.points.size()) < *window_len) {
            out.push_back({"path shorter than window length " + std::to_string(*window_len),
                           path.path_id, -1, -1});
        }
        for (std::size_t i = 0; i < path.points.size(); ++i) {
            const RefPoint& pt = path.points[i];
            if (!point_ids.insert(pt.point_id).second) {
                out.push_back({"duplicate point_id", path.path_id, pt.point_id, pt.seq});
            }
            if (pt.path_id != path.path_id) {
                out.push_back({"point carries wrong path_id", path.path_id, pt.point_id, pt.seq});
            }
            if (pt.seq != static_cast<int>(i)) {
                out.push_back({"seq out of order (duplicate or gap)", path.path_id,
                               pt.point_id, pt.seq});
            }
            if (pt.feat.mh < 0.0) {
                out.push_back({"negative mh", path.path_id, pt.point_id, pt.seq});
            }
            if (i > 0) {
                const Vec2& a = path.points[i - 1].pos;
                const Vec2& b = pt.pos;
                const double d = std::sqrt((b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y));
                if (std::abs(d - map.spacing_m) > 1e-6) {
                    out.push_back({"spacing deviates from declared " +
                                       std::to_string(map.spacing_m) + " m",
                                   path.path_id, pt.point_id, pt.seq});
                }
            }
        }
    }
    return out;
}

Window reversed_window(const Window& w) {
    Window out;
    out.path_id = w.path_id;
    out.start = w.start;
    out.direction = w.direction == Direction::forward ? Direction::reversed : Direction::forward;
    out.feats.assign(w.feats.rbegin(), w.feats.rend());
    out.coords.assign(w.coords.rbegin(), w.coords.rend());
    return out;
}

WindowSet enumerate_windows(const FingerprintMap& map, int window_len, bool include_reversed) {
    if (window_len < 2) {
        throw WindowTooShort("window length " + std::to_string(window_len) +
                             " is below the minimum of 2");
    }
    WindowSet out;
    for (const RefPath& path : map.paths) {
        const int len = static_cast<int>(path.points.size());
        if (len < window_len) {
            ++out.skipped_paths;
            continue;
        }
        for (int start = 0; start + window_len <= len; ++start) {
            Window w;
            w.path_id = path.path_id;
            w.start = start;
            w.direction = Direction::forward;
            w.feats.reserve(window_len);
            w.coords.reserve(window_len);
            for (int k = 0; k < window_len; ++k) {
                const RefPoint& pt = path.points[start + k];
                w.feats.push_back(pt.feat);
                w.coords.push_back(pt.pos);
            }
            if (include_reversed) {
                Window r = reversed_window(w);
                out.windows.push_back(std::move(w));
                out.windows.push_back(std::move(r));
            } else {
                out.windows.push_back(std::move(w));
            }
        }
    }
    std::stable_sort(out.windows.begin(), out.windows.end(),
                     [](const Window& a, const Window& b) { return a.key() < b.key(); });
    return out;
}

bool structurally_equal(const FingerprintMap& a, const FingerprintMap& b) {
    if (std::abs(a.spacing_m - b.spacing_m) > 1e-9) return false;
    return a.paths == b.paths;
}

}  // namespace magfp
