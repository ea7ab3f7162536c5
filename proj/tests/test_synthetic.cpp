#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "doctest.h"
#include "magfp/errors.hpp"
#include "magfp/matching.hpp"
#include "magfp/rng.hpp"
#include "magfp/synthetic.hpp"

using namespace magfp;

namespace {

Window sample_window() {
    Window w;
    w.path_id = 3;
    w.start = 2;
    for (int i = 0; i < 4; ++i) {
        w.feats.push_back({10.0 + i, 1.0 + i});
        w.coords.push_back({0.3 * i, 0.0});
    }
    return w;
}

}  // namespace

TEST_CASE("field value matches the closed form for a single source") {
    FieldModel model;
    model.sources = {{{0.0, 0.0}, 100.0, 1.0}};
    const Vec2 query{0.0, std::sqrt(3.75)};
    const FeatureVec f = field_at(model, query);
    CHECK(f.mv == doctest::Approx(71.0).epsilon(1e-12));  // 46 + 100 / (3.75 + 0.25)
    CHECK(f.mh == doctest::Approx(30.0).epsilon(1e-12));  // vertical-only source

    FieldModel horizontal = model;
    horizontal.sources[0].vertical_fraction = 0.0;
    const FeatureVec h = field_at(horizontal, query);
    CHECK(h.mv == doctest::Approx(46.0).epsilon(1e-12));
    CHECK(h.mh == doctest::Approx(55.0).epsilon(1e-12));
}

TEST_CASE("contributions add across sources") {
    FieldModel model;
    model.sources = {{{0.0, 0.0}, 100.0, 1.0}, {{10.0, 0.0}, 100.0, 1.0}};
    const FeatureVec f = field_at(model, {5.0, 0.0});
    CHECK(f.mv == doctest::Approx(46.0 + 2 * (100.0 / 25.25)).epsilon(1e-12));
}

TEST_CASE("queries on top of a source are rejected") {
    FieldModel model;
    model.sources = {{{1.0, 1.0}, 100.0, 0.5}};
    CHECK_THROWS_AS(field_at(model, {1.0, 1.0}), SourceCollision);
    CHECK_THROWS_AS(field_at(model, {1.0, 1.0 + 0.049}), SourceCollision);
    CHECK_NOTHROW(field_at(model, {1.0, 1.0 + 0.051}));
}

TEST_CASE("the horizontal magnitude is clamped non-negative") {
    FieldModel model;
    model.sources = {{{0.0, 0.0}, -400.0, 0.0}};  // drives mh deeply negative nearby
    const FeatureVec f = field_at(model, {0.0, 0.5});
    CHECK(f.mh >= 0.0);
}

TEST_CASE("default field draws sources inside the floor with documented ranges") {
    const FieldModel model = make_default_field(40.0, 30.0, 150, 9);
    REQUIRE(model.sources.size() == 150);
    CHECK(model.floor_w == 40.0);
    CHECK(model.floor_h == 30.0);
    CHECK(model.seed == 9);
    for (const FieldSource& s : model.sources) {
        CHECK(s.pos.x >= 0.0);
        CHECK(s.pos.x <= 40.0);
        CHECK(s.pos.y >= 0.0);
        CHECK(s.pos.y <= 30.0);
        CHECK(s.strength >= 100.0);
        CHECK(s.strength <= 400.0);
        CHECK(s.vertical_fraction >= 0.2);
        CHECK(s.vertical_fraction <= 0.8);
    }

    const FieldModel again = make_default_field(40.0, 30.0, 150, 9);
    CHECK(again.sources.size() == model.sources.size());
    CHECK(again.sources[17].pos == model.sources[17].pos);
    const FieldModel other = make_default_field(40.0, 30.0, 150, 10);
    CHECK(other.sources[0].pos != model.sources[0].pos);
}

TEST_CASE("surveys are deterministic in (model, spec, seed)") {
    const FieldModel field = canonical_field(7);
    SurveySpec spec;
    spec.n_paths = 6;
    spec.min_len = 8;
    spec.max_len = 12;

    const FingerprintMap a = generate_survey(field, spec, 100);
    const FingerprintMap b = generate_survey(field, spec, 100);
    CHECK(structurally_equal(a, b));
    CHECK(a.meta == b.meta);

    const FingerprintMap c = generate_survey(field, spec, 101);
    CHECK(!structurally_equal(a, c));
}

TEST_CASE("surveys respect the requested shape") {
    const FieldModel field = canonical_field(8);
    SurveySpec spec;
    spec.n_paths = 7;
    spec.min_len = 9;
    spec.max_len = 15;
    spec.total_points = 80;
    const FingerprintMap map = generate_survey(field, spec, 200);

    CHECK(map.paths.size() == 7);
    CHECK(map.total_points() == 80);
    CHECK(map.spacing_m == spec.spacing_m);
    for (const RefPath& p : map.paths) {
        CHECK(int(p.points.size()) >= 9);
        CHECK(int(p.points.size()) <= 15);
    }
    CHECK(map.meta.at("generator") == "synthetic-field");
    CHECK(map.meta.at("seed") == "200");
}

TEST_CASE("survey points sit on the grid and sample the field honestly") {
    const FieldModel field = canonical_field(9);
    SurveySpec spec;
    spec.n_paths = 5;
    spec.min_len = 6;
    spec.max_len = 20;
    const FingerprintMap map = generate_survey(field, spec, 300);

    CHECK(validate_map(map).empty());
    for (const RefPath& path : map.paths) {
        for (const RefPoint& pt : path.points) {
            CHECK(pt.pos.x >= 0.0);
            CHECK(pt.pos.x <= field.floor_w);
            CHECK(pt.pos.y >= 0.0);
            CHECK(pt.pos.y <= field.floor_h);
            CHECK(pt.feat == field_at(field, pt.pos));
        }
        for (std::size_t i = 1; i < path.points.size(); ++i) {
            const double dx = path.points[i].pos.x - path.points[i - 1].pos.x;
            const double dy = path.points[i].pos.y - path.points[i - 1].pos.y;
            CHECK(std::hypot(dx, dy) == doctest::Approx(spec.spacing_m).epsilon(1e-9));
        }
    }
}

TEST_CASE("generated features are pairwise distinct") {
    const FieldModel field = canonical_field(10);
    SurveySpec spec;
    spec.n_paths = 8;
    spec.min_len = 10;
    spec.max_len = 20;
    const FingerprintMap map = generate_survey(field, spec, 400);

    std::set<std::pair<double, double>> seen;
    for (const RefPath& p : map.paths)
        for (const RefPoint& pt : p.points) seen.insert({pt.feat.mv, pt.feat.mh});
    CHECK(seen.size() == map.total_points());
}

TEST_CASE("impossible layouts overflow the floor") {
    FieldModel cramped = make_default_field(2.0, 2.0, 5, 11);
    SurveySpec spec;
    spec.n_paths = 1;
    spec.min_len = 30;
    spec.max_len = 30;
    CHECK_THROWS_AS(generate_survey(cramped, spec, 1), FloorOverflow);
}

TEST_CASE("infeasible point totals are rejected up front") {
    const FieldModel field = canonical_field(12);
    SurveySpec spec;
    spec.n_paths = 2;
    spec.min_len = 5;
    spec.max_len = 6;
    spec.total_points = 20;  // above 2 * 6
    CHECK_THROWS_AS(generate_survey(field, spec, 1), std::invalid_argument);
    spec.total_points = 9;  // below 2 * 5
    CHECK_THROWS_AS(generate_survey(field, spec, 1), std::invalid_argument);
}

TEST_CASE("duplicate warp repeats an element in place") {
    const Window w = sample_window();
    const std::vector<WarpOp> ops{{1, WarpKind::duplicate}};
    const Window out = warp_replay(w, ops, 0.0, 1);
    REQUIRE(out.length() == 5);
    CHECK(out.feats[1] == w.feats[1]);
    CHECK(out.feats[2] == w.feats[1]);
    CHECK(out.coords[2] == w.coords[1]);
    CHECK(out.feats[3] == w.feats[2]);
    CHECK(out.path_id == w.path_id);
    CHECK(out.start == w.start);
}

TEST_CASE("drop warp removes an interior element") {
    const Window w = sample_window();
    const std::vector<WarpOp> ops{{2, WarpKind::drop}};
    const Window out = warp_replay(w, ops, 0.0, 1);
    REQUIRE(out.length() == 3);
    CHECK(out.feats[0] == w.feats[0]);
    CHECK(out.feats[1] == w.feats[1]);
    CHECK(out.feats[2] == w.feats[3]);
}

TEST_CASE("paired duplicate and drop preserve the length") {
    const Window w = sample_window();
    const std::vector<WarpOp> ops{{1, WarpKind::duplicate}, {2, WarpKind::drop}};
    const Window out = warp_replay(w, ops, 0.0, 1);
    REQUIRE(out.length() == 4);
    CHECK(out.feats[0] == w.feats[0]);
    CHECK(out.feats[1] == w.feats[1]);
    CHECK(out.feats[2] == w.feats[1]);
    CHECK(out.feats[3] == w.feats[3]);
}

TEST_CASE("a later op on the same index overrides the earlier one") {
    const Window w = sample_window();
    const std::vector<WarpOp> ops{{1, WarpKind::duplicate}, {1, WarpKind::drop}};
    const Window out = warp_replay(w, ops, 0.0, 1);
    REQUIRE(out.length() == 3);  // the drop won
    CHECK(out.feats[1] == w.feats[2]);
}

TEST_CASE("endpoints may be duplicated but never dropped") {
    const Window w = sample_window();
    const std::vector<WarpOp> dup0{{0, WarpKind::duplicate}};
    CHECK(warp_replay(w, dup0, 0.0, 1).length() == 5);

    const std::vector<WarpOp> drop0{{0, WarpKind::drop}};
    CHECK_THROWS_AS(warp_replay(w, drop0, 0.0, 1), DegenerateWindow);
    const std::vector<WarpOp> drop_last{{3, WarpKind::drop}};
    CHECK_THROWS_AS(warp_replay(w, drop_last, 0.0, 1), DegenerateWindow);
    const std::vector<WarpOp> outside{{4, WarpKind::duplicate}};
    CHECK_THROWS_AS(warp_replay(w, outside, 0.0, 1), DegenerateWindow);
}

TEST_CASE("degenerate source windows are rejected") {
    Window tiny;
    tiny.feats = {{1, 1}};
    tiny.coords = {{0, 0}};
    CHECK_THROWS_AS(warp_replay(tiny, {}, 0.0, 1), DegenerateWindow);
}

TEST_CASE("warp noise is seeded and clamps mh at zero") {
    Window w = sample_window();
    const Window a = warp_replay(w, {}, 0.5, 99);
    const Window b = warp_replay(w, {}, 0.5, 99);
    CHECK(a == b);
    const Window c = warp_replay(w, {}, 0.5, 100);
    CHECK(a.feats != c.feats);
    CHECK(warp_replay(w, {}, 0.0, 1).feats == w.feats);  // zero noise is a plain copy

    for (FeatureVec& f : w.feats) f.mh = 0.01;
    const Window clamped = warp_replay(w, {}, 50.0, 7);
    for (const FeatureVec& f : clamped.feats) CHECK(f.mh >= 0.0);
}

TEST_CASE("canonical survey shape and field are what the docs promise") {
    const SurveySpec spec = canonical_survey_spec();
    CHECK(spec.n_paths == 24);
    CHECK(spec.min_len == 20);
    CHECK(spec.max_len == 50);
    CHECK(spec.spacing_m == 0.30);
    REQUIRE(spec.total_points.has_value());
    CHECK(*spec.total_points == 1024);

    const FieldModel field = canonical_field(5);
    CHECK(field.floor_w == 60.0);
    CHECK(field.floor_h == 79.0);
    CHECK(field.sources.size() == 200);
    CHECK(field.background == FeatureVec{46.0, 30.0});
    CHECK(canonical_window_len == 20);
}

TEST_CASE("warped replays favor elastic matching") {
    const FieldModel field = canonical_field(mix_seed(17, 1));
    SurveySpec spec;
    spec.n_paths = 6;
    spec.min_len = 12;
    spec.max_len = 18;
    const FingerprintMap map = generate_survey(field, spec, mix_seed(17, 2));
    const WindowSet set = enumerate_windows(map, 10, true);

    Rng rng(mix_seed(17, 3));
    int dtw_hits = 0, path_hits = 0;
    const int cases = 20;
    for (int i = 0; i < cases; ++i) {
        const std::size_t pick =
            std::size_t(rng.uniform_int(0, std::int64_t(set.windows.size()) - 1));
        const Window& source = set.windows[pick];
        const int dup = int(rng.uniform_int(1, 8));
        int drop = int(rng.uniform_int(1, 8));
        while (drop == dup) drop = int(rng.uniform_int(1, 8));
        const std::vector<WarpOp> ops{{dup, WarpKind::duplicate}, {drop, WarpKind::drop}};
        const Window warped = warp_replay(source, ops, 0.3, rng.next_u64());

        if (*dtw_match(warped, set.windows).window == source.key()) ++dtw_hits;
        if (*path_match(warped, set.windows).window == source.key()) ++path_hits;
    }
    CHECK(dtw_hits >= path_hits);
    CHECK(dtw_hits >= cases / 2);
}
