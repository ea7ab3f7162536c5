#include "magfp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "magfp/errors.hpp"
#include "magfp/rng.hpp"

namespace magfp {

FieldModel make_default_field(double floor_w, double floor_h, int n_sources,
                              std::uint64_t seed) {
    if (floor_w <= 0.0 || floor_h <= 0.0) throw std::invalid_argument("floor must be positive");
    if (n_sources < 0) throw std::invalid_argument("source count must be non-negative");
    Rng rng(seed);
    FieldModel model;
    model.floor_w = floor_w;
    model.floor_h = floor_h;
    model.seed = seed;
    model.sources.reserve(n_sources);
    for (int i = 0; i < n_sources; ++i) {
        FieldSource src;
        src.pos = {rng.uniform_real(0.0, floor_w), rng.uniform_real(0.0, floor_h)};
        src.strength = rng.uniform_real(100.0, 400.0);
        src.vertical_fraction = rng.uniform_real(0.2, 0.8);
        model.sources.push_back(src);
    }
    return model;
}

FeatureVec field_at(const FieldModel& model, const Vec2& pos) {
    double mv = model.background.mv;
    double mh = model.background.mh;
    for (const FieldSource& src : model.sources) {
        const double dx = pos.x - src.pos.x;
        const double dy = pos.y - src.pos.y;
        const double d2 = dx * dx + dy * dy;
        if (d2 < source_clearance_m * source_clearance_m) {
            throw SourceCollision("query within " + std::to_string(source_clearance_m) +
                                  " m of a field source");
        }
        const double c = src.strength / (d2 + softening_m2);
        mv += src.vertical_fraction * c;
        mh += (1.0 - src.vertical_fraction) * c;
    }
    return {mv, std::abs(mh)};
}

namespace {

// Axis-aligned unit directions: +x, +y, -x, -y.
constexpr double dir_dx[4] = {1.0, 0.0, -1.0, 0.0};
constexpr double dir_dy[4] = {0.0, 1.0, 0.0, -1.0};

std::vector<int> draw_lengths(Rng& rng, const SurveySpec& spec) {
    std::vector<int> lens(spec.n_paths);
    for (int& l : lens) {
        l = static_cast<int>(rng.uniform_int(spec.min_len, spec.max_len));
    }
    if (spec.total_points) {
        const long total = *spec.total_points;
        const long lo = static_cast<long>(spec.n_paths) * spec.min_len;
        const long hi = static_cast<long>(spec.n_paths) * spec.max_len;
        if (total < lo || total > hi) {
            throw std::invalid_argument("total_points " + std::to_string(total) +
                                        " is not reachable with " + std::to_string(spec.n_paths) +
                                        " paths of " + std::to_string(spec.min_len) + ".." +
                                        std::to_string(spec.max_len));
        }
        long diff = total - std::accumulate(lens.begin(), lens.end(), 0L);
        while (diff != 0) {
            const std::size_t i =
                static_cast<std::size_t>(rng.uniform_int(0, spec.n_paths - 1));
            if (diff > 0 && lens[i] < spec.max_len) {
                ++lens[i];
                --diff;
            } else if (diff < 0 && lens[i] > spec.min_len) {
                --lens[i];
                ++diff;
            }
        }
    }
    return lens;
}

bool point_ok(const FieldModel& model, double x, double y) {
    if (x < 0.0 || x > model.floor_w || y < 0.0 || y > model.floor_h) return false;
    // Keep a hair more than the hard clearance so field_at never trips.
    const double min_d2 = (source_clearance_m + 1e-3) * (source_clearance_m + 1e-3);
    for (const FieldSource& src : model.sources) {
        const double dx = x - src.pos.x;
        const double dy = y - src.pos.y;
        if (dx * dx + dy * dy < min_d2) return false;
    }
    return true;
}

/// One placement attempt: straight or L-shaped run of len points. Empty
/// result means the draw did not fit.
std::vector<Vec2> try_layout(Rng& rng, const FieldModel& model, int len, double spacing) {
    const bool bent = len >= 6 && rng.uniform_int(0, 1) == 1;
    const int dir0 = static_cast<int>(rng.uniform_int(0, 3));
    int corner = len;  // index where the second leg starts; past the end = straight
    int dir1 = dir0;
    if (bent) {
        corner = static_cast<int>(rng.uniform_int(2, len - 3));
        dir1 = (dir0 + (rng.uniform_int(0, 1) == 0 ? 1 : 3)) % 4;
    }
    const double x0 = rng.uniform_real(0.0, model.floor_w);
    const double y0 = rng.uniform_real(0.0, model.floor_h);

    std::vector<Vec2> pts;
    pts.reserve(len);
    const double cx = x0 + dir_dx[dir0] * (corner * spacing);
    const double cy = y0 + dir_dy[dir0] * (corner * spacing);
    for (int i = 0; i < len; ++i) {
        double x, y;
        if (i <= corner) {
            x = x0 + dir_dx[dir0] * (i * spacing);
            y = y0 + dir_dy[dir0] * (i * spacing);
        } else {
            x = cx + dir_dx[dir1] * ((i - corner) * spacing);
            y = cy + dir_dy[dir1] * ((i - corner) * spacing);
        }
        if (!point_ok(model, x, y)) return {};
        pts.push_back({x, y});
    }
    return pts;
}

/// True when no two points share exactly the same feature pair, i.e. the
/// minimum pairwise feature distance is strictly positive.
bool features_distinct(const FingerprintMap& map) {
    std::vector<FeatureVec> feats;
    feats.reserve(map.total_points());
    for (const RefPath& path : map.paths) {
        for (const RefPoint& pt : path.points) feats.push_back(pt.feat);
    }
    std::sort(feats.begin(), feats.end(), [](const FeatureVec& a, const FeatureVec& b) {
        return std::pair(a.mv, a.mh) < std::pair(b.mv, b.mh);
    });
    return std::adjacent_find(feats.begin(), feats.end()) == feats.end();
}

}  // namespace

FingerprintMap generate_survey(const FieldModel& model, const SurveySpec& spec,
                               std::uint64_t seed) {
    if (spec.n_paths < 1) throw std::invalid_argument("need at least one path");
    if (spec.min_len < 2 || spec.min_len > spec.max_len) {
        throw std::invalid_argument("bad path length range");
    }
    if (spec.spacing_m <= 0.0) throw std::invalid_argument("spacing must be positive");

    Rng rng(seed);
    constexpr int max_map_attempts = 32;
    constexpr int max_path_attempts = 400;

    for (int attempt = 0; attempt < max_map_attempts; ++attempt) {
        const std::vector<int> lengths = draw_lengths(rng, spec);
        std::vector<SurveyPath> survey;
        survey.reserve(spec.n_paths);
        for (int p = 0; p < spec.n_paths; ++p) {
            std::vector<Vec2> pts;
            for (int t = 0; t < max_path_attempts && pts.empty(); ++t) {
                pts = try_layout(rng, model, lengths[p], spec.spacing_m);
            }
            if (pts.empty()) {
                throw FloorOverflow("cannot place a " + std::to_string(lengths[p]) +
                                    "-point path on a " + std::to_string(model.floor_w) + " x " +
                                    std::to_string(model.floor_h) + " m floor");
            }
            SurveyPath sp;
            sp.path_id = p;
            sp.points.reserve(pts.size());
            for (const Vec2& pos : pts) {
                sp.points.emplace_back(pos, field_at(model, pos));
            }
            survey.push_back(std::move(sp));
        }
        FingerprintMap map =
            build_map(survey, spec.spacing_m,
                      {{"generator", "synthetic-field"}, {"seed", std::to_string(seed)}});
        // Exact feature collisions would break downstream tie-breaks; redraw.
        if (features_distinct(map)) return map;
    }
    throw Error("could not draw a survey with distinct features");
}

Window warp_replay(const Window& window, std::span<const WarpOp> ops, double noise_ut,
                   std::uint64_t seed) {
    const int len = window.length();
    if (len < 2) throw DegenerateWindow("source window has fewer than 2 points");

    std::map<int, WarpKind> plan;  // at most one op per index; later ops win
    for (const WarpOp& op : ops) {
        if (op.index < 0 || op.index >= len) {
            throw DegenerateWindow("warp index " + std::to_string(op.index) +
                                   " outside window of length " + std::to_string(len));
        }
        if (op.kind == WarpKind::drop && (op.index == 0 || op.index == len - 1)) {
            throw DegenerateWindow("cannot drop a window endpoint");
        }
        plan[op.index] = op.kind;
    }

    Window out;
    out.path_id = window.path_id;
    out.start = window.start;
    out.direction = window.direction;
    for (int i = 0; i < len; ++i) {
        const auto it = plan.find(i);
        if (it != plan.end() && it->second == WarpKind::drop) continue;
        const int copies = it != plan.end() && it->second == WarpKind::duplicate ? 2 : 1;
        for (int c = 0; c < copies; ++c) {
            out.feats.push_back(window.feats[i]);
            out.coords.push_back(window.coords[i]);
        }
    }
    if (out.length() < 2) throw DegenerateWindow("warp leaves fewer than 2 points");

    if (noise_ut > 0.0) {
        Rng rng(seed);
        for (FeatureVec& f : out.feats) {
            f.mv += rng.normal(0.0, noise_ut);
            f.mh = std::max(0.0, f.mh + rng.normal(0.0, noise_ut));
        }
    }
    return out;
}

SurveySpec canonical_survey_spec() {
    SurveySpec spec;
    spec.n_paths = 24;
    spec.min_len = 20;
    spec.max_len = 50;
    spec.spacing_m = 0.30;
    spec.total_points = 1024;
    return spec;
}

FieldModel canonical_field(std::uint64_t seed) {
    return make_default_field(60.0, 79.0, 200, seed);
}

}  // namespace magfp
