// Acceptance harness: one self-contained check per release criterion, one
// PASS/FAIL line each, exit code = number of failures. Run with a list of
// criterion numbers to restrict the run, e.g. `acceptance_tests 3 7`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <set>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "magfp/evaluation.hpp"
#include "magfp/io.hpp"
#include "magfp/matching.hpp"
#include "magfp/rng.hpp"
#include "magfp/synthetic.hpp"

using namespace magfp;
namespace fs = std::filesystem;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

FingerprintMap canonical_survey(std::uint64_t master) {
    const FieldModel field = canonical_field(mix_seed(master, 1));
    return generate_survey(field, canonical_survey_spec(), mix_seed(master, 2));
}

// ---- criterion 1: window census on the canonical survey shape ----

bool check_window_census(std::string& detail) {
    for (const std::uint64_t master : {42ULL, 7ULL}) {
        const FingerprintMap map = canonical_survey(master);
        if (map.paths.size() != 24 || map.total_points() != 1024) {
            detail = "seed " + std::to_string(master) + ": survey shape " +
                     std::to_string(map.paths.size()) + " paths / " +
                     std::to_string(map.total_points()) + " points";
            return false;
        }
        std::size_t closed_form = 0;
        for (const RefPath& p : map.paths)
            closed_form += p.points.size() - std::size_t(canonical_window_len) + 1;

        const std::size_t fwd = enumerate_windows(map, canonical_window_len, false).windows.size();
        const std::size_t both = enumerate_windows(map, canonical_window_len, true).windows.size();
        if (fwd != 568 || both != 1136 || closed_form != 568) {
            detail = "seed " + std::to_string(master) + ": " + std::to_string(fwd) +
                     " forward / " + std::to_string(both) + " reversed windows";
            return false;
        }
    }
    detail = "568 forward / 1136 with reversal on two canonical surveys";
    return true;
}

// ---- criterion 2: feature identities over random samples ----

bool check_feature_identities(std::string& detail) {
    Rng rng(1234);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        SensorSample s;
        s.m = {rng.uniform_real(-80, 80), rng.uniform_real(-80, 80), rng.uniform_real(-80, 80)};
        do {
            s.a = {rng.uniform_real(-10, 10), rng.uniform_real(-10, 10),
                   rng.uniform_real(-10, 10)};
        } while (std::sqrt(s.a.x * s.a.x + s.a.y * s.a.y + s.a.z * s.a.z) <= 1e-3);

        const FeatureVec f = extract_features_projected(s);
        const double m2 = s.m.x * s.m.x + s.m.y * s.m.y + s.m.z * s.m.z;
        const double recomposed = f.mv * f.mv + f.mh * f.mh;
        if (std::abs(recomposed - m2) > 1e-9 * std::max(1.0, m2)) {
            detail = "magnitude identity off by " + std::to_string(std::abs(recomposed - m2)) +
                     " at sample " + std::to_string(i);
            return false;
        }
    }
    for (int i = 0; i < n; ++i) {
        SensorSample s;
        s.m = {rng.uniform_real(-80, 80), rng.uniform_real(-80, 80), rng.uniform_real(-80, 80)};
        s.a = {0, 0, rng.uniform_real(0.5, 15.0)};
        const FeatureVec p = extract_features_projected(s);
        const FeatureVec a = extract_features_aligned(s);
        if (!(p == a)) {
            detail = "projected != aligned under axis-aligned gravity at sample " +
                     std::to_string(i);
            return false;
        }
    }
    detail = "100k magnitude identities within 1e-9, 100k axis-aligned samples bit-equal";
    return true;
}

// ---- criterion 3: dtw against recursive brute force ----

double brute_dtw(std::span<const FeatureVec> a, std::span<const FeatureVec> b, int i, int j) {
    if (i == 0 && j == 0) return 0.0;
    if (i == 0 || j == 0) return inf;
    const double d = feature_distance(a[i - 1], b[j - 1]);
    return d + std::min({brute_dtw(a, b, i - 1, j), brute_dtw(a, b, i, j - 1),
                         brute_dtw(a, b, i - 1, j - 1)});
}

bool check_dtw_oracle(std::string& detail) {
    Rng rng(77);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = int(rng.uniform_int(1, 6));
        const int m = int(rng.uniform_int(1, 6));
        std::vector<FeatureVec> a, b;
        for (int i = 0; i < n; ++i)
            a.push_back({rng.uniform_real(-50, 50), rng.uniform_real(0, 60)});
        for (int i = 0; i < m; ++i)
            b.push_back({rng.uniform_real(-50, 50), rng.uniform_real(0, 60)});

        const double got = dtw_distance(a, b);
        const double want = brute_dtw(a, b, n, m);
        if (std::abs(got - want) > 1e-12 * std::max(1.0, std::abs(want))) {
            detail = "trial " + std::to_string(trial) + ": dtw " + std::to_string(got) +
                     " vs brute " + std::to_string(want);
            return false;
        }
    }
    detail = "1000 random pairs (lengths 1..6) match the recursive oracle within 1e-12";
    return true;
}

// ---- criterion 4: exact-replay evaluation is exactly zero ----

bool check_self_replay(std::string& detail) {
    const FingerprintMap map = canonical_survey(42);
    const WindowSet set = enumerate_windows(map, canonical_window_len, true);
    EvalParams params;
    params.window_len = canonical_window_len;

    for (const Algorithm alg : {Algorithm::path, Algorithm::dtw, Algorithm::point}) {
        const ErrorReport r = evaluate_workload(map, set.windows, alg, params);
        if (r.mean != 0.0 || r.quartiles.max != 0.0) {
            detail = std::string(to_string(alg)) + " self-replay mean " +
                     std::to_string(r.mean) + ", max " + std::to_string(r.quartiles.max);
            return false;
        }
    }
    detail = "1136 exact replays: mean and max error 0.0 for path, dtw, and point";
    return true;
}

// ---- criterion 5: feature aliasing wrecks point matching only ----

bool check_aliasing(std::string& detail) {
    // Two far-apart straight paths with disjoint feature ramps, then one
    // point of the second path borrows its feature from the first.
    SurveyPath p0{0, {}};
    for (int i = 0; i < 26; ++i) p0.points.push_back({{0.3 * i, 0.0}, {double(i), 5.0}});
    SurveyPath p1{1, {}};
    for (int i = 0; i < 40; ++i) p1.points.push_back({{0.3 * i, 50.0}, {1000.0 + i, 5.0}});
    p1.points[12].second = p0.points[5].second;

    const std::vector<SurveyPath> survey{p0, p1};
    const FingerprintMap map = build_map(survey);
    const Vec2 pos_a = map.paths[0].points[5].pos;
    const Vec2 pos_b = map.paths[1].points[12].pos;
    const double separation = point_error(pos_b, pos_a);

    // Point matching: query every reference point with its own feature.
    std::vector<Window> point_targets;
    for (const RefPath& path : map.paths)
        for (const RefPoint& pt : path.points) {
            Window w;
            w.feats = {pt.feat};
            w.coords = {pt.pos};
            point_targets.push_back(w);
        }
    EvalParams params;
    params.window_len = canonical_window_len;
    const ErrorReport pt = evaluate_workload(map, point_targets, Algorithm::point, params);
    if (pt.quartiles.max != separation) {
        detail = "point max error " + std::to_string(pt.quartiles.max) + ", separation " +
                 std::to_string(separation);
        return false;
    }

    // Window matching: the surrounding context disambiguates the alias.
    const WindowSet set = enumerate_windows(map, canonical_window_len, true);
    for (const Algorithm alg : {Algorithm::path, Algorithm::dtw}) {
        const ErrorReport r = evaluate_workload(map, set.windows, alg, params);
        if (r.quartiles.max != 0.0) {
            detail = std::string(to_string(alg)) + " max error " +
                     std::to_string(r.quartiles.max) + " despite window context";
            return false;
        }
    }
    detail = "aliased pair: point max error equals the " + io::format_double(separation) +
             " m separation, path/dtw stay at 0";
    return true;
}

// ---- criterion 6: relative matching cost ----

bool check_timing_order(std::string& detail) {
    const FingerprintMap map = canonical_survey(42);
    const WindowSet targets = enumerate_windows(map, canonical_window_len, false);
    EvalParams params;
    params.window_len = canonical_window_len;
    const std::vector<Algorithm> algs{Algorithm::point, Algorithm::path, Algorithm::dtw};

    const TimingReport r = benchmark(map, targets.windows, algs, params, 3);
    double t_point = 0, t_path = 0, t_dtw = 0;
    for (const TimingEntry& t : r.timings) {
        if (t.seconds <= 0.0) {
            detail = std::string(to_string(t.algorithm)) + " timing is not positive";
            return false;
        }
        if (t.algorithm == Algorithm::point) t_point = t.seconds;
        if (t.algorithm == Algorithm::path) t_path = t.seconds;
        if (t.algorithm == Algorithm::dtw) t_dtw = t.seconds;
    }
    const bool slowest = t_dtw > t_path && t_dtw > t_point;
    const bool ratio = t_dtw >= 5.0 * t_path;
    char buf[160];
    std::snprintf(buf, sizeof buf, "point %.4fs, path %.4fs, dtw %.4fs (dtw/path %.1fx)",
                  t_point, t_path, t_dtw, t_dtw / t_path);
    detail = buf;
    return slowest && ratio;
}

// ---- criterion 7: warped replays favor elastic matching ----

bool check_warp_tolerance(std::string& detail) {
    const std::uint64_t master = 42;
    const FingerprintMap map = canonical_survey(master);
    const WindowSet set = enumerate_windows(map, canonical_window_len, true);

    Rng rng(mix_seed(master, 3));
    int dtw_hits = 0, path_hits = 0;
    const int cases = 100;
    for (int c = 0; c < cases; ++c) {
        const std::size_t src =
            std::size_t(rng.uniform_int(0, std::int64_t(set.windows.size()) - 1));
        const Window& source = set.windows[src];

        // k duplications paired with k drops at 2k distinct interior
        // indices, so the replay keeps its length and Path can compete.
        const int k = int(rng.uniform_int(1, 3));
        std::vector<int> idx;
        while (int(idx.size()) < 2 * k) {
            const int i = int(rng.uniform_int(1, canonical_window_len - 2));
            if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
        }
        std::vector<WarpOp> ops;
        for (int j = 0; j < k; ++j) ops.push_back({idx[j], WarpKind::duplicate});
        for (int j = k; j < 2 * k; ++j) ops.push_back({idx[j], WarpKind::drop});
        const Window warped = warp_replay(source, ops, 0.5, rng.next_u64());

        if (*dtw_match(warped, set.windows).window == source.key()) ++dtw_hits;
        if (*path_match(warped, set.windows).window == source.key()) ++path_hits;
    }
    detail = "dtw recovered " + std::to_string(dtw_hits) + "/100, path " +
             std::to_string(path_hits) + "/100";
    return dtw_hits >= 90 && dtw_hits > path_hits;
}

// ---- criterion 8: CLI determinism and CSV round-trip ----

int run_cli(const fs::path& dir, const std::string& args) {
    const std::string cmd = "cd " + dir.string() + " && " + MAGFP_CLI_PATH " " + args +
                            " > /dev/null 2> /dev/null";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

bool check_determinism(std::string& detail) {
    const fs::path dir = fs::temp_directory_path() / "magfp_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");

    const std::string synth = "synth --canonical --seed 5 --out map.csv --json-out map.json "
                              "--targets-out targets.csv --window 20";
    for (const char* sub : {"a", "b"})
        if (run_cli(dir / sub, synth) != 0) {
            detail = std::string("synth failed in ") + sub;
            return false;
        }
    for (const char* file : {"map.csv", "map.json", "targets.csv"})
        if (io::read_file(dir / "a" / file) != io::read_file(dir / "b" / file)) {
            detail = std::string(file) + " differs between identical seeded runs";
            return false;
        }

    const std::string match = "match --map map.csv --targets targets.csv --algorithm path "
                              "--window 20 --out results.json";
    for (const char* sub : {"a", "b"})
        if (run_cli(dir / sub, match) != 0) {
            detail = std::string("match failed in ") + sub;
            return false;
        }
    if (io::read_file(dir / "a" / "results.json") != io::read_file(dir / "b" / "results.json")) {
        detail = "results.json differs between identical seeded runs";
        return false;
    }

    const FingerprintMap loaded = io::load_map_csv(dir / "a" / "map.csv");
    io::save_map_csv(loaded, dir / "roundtrip.csv");
    const FingerprintMap again = io::load_map_csv(dir / "roundtrip.csv");
    if (!structurally_equal(loaded, again)) {
        detail = "map CSV save/load round-trip is not structurally equal";
        return false;
    }
    if (io::read_file(dir / "a" / "map.csv") != io::read_file(dir / "roundtrip.csv")) {
        detail = "map CSV save/load round-trip is not byte-identical";
        return false;
    }
    fs::remove_all(dir);
    detail = "seeded synth and match byte-identical across runs; map CSV round-trips";
    return true;
}

struct Criterion {
    int id;
    const char* name;
    bool (*check)(std::string&);
    double budget_s;
};

const Criterion criteria[] = {
    {1, "window census", check_window_census, 1.0},
    {2, "feature identities", check_feature_identities, 5.0},
    {3, "dtw brute-force equivalence", check_dtw_oracle, 10.0},
    {4, "self-replay zero error", check_self_replay, 60.0},
    {5, "point-matching aliasing", check_aliasing, 10.0},
    {6, "matching cost ordering", check_timing_order, 300.0},
    {7, "time-warp tolerance", check_warp_tolerance, 300.0},
    {8, "determinism and round-trip", check_determinism, 30.0},
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!wanted.empty() && !wanted.count(c.id)) continue;

        std::string detail;
        bool ok = false;
        const auto start = std::chrono::steady_clock::now();
        try {
            ok = c.check(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        const bool in_budget = elapsed <= c.budget_s;
        if (ok && !in_budget) detail += " [over time budget]";
        const bool pass = ok && in_budget;
        failures += pass ? 0 : 1;
        std::printf("[%s] criterion %d: %s - %s (%.2fs, budget %.0fs)\n",
                    pass ? "PASS" : "FAIL", c.id, c.name, detail.c_str(), elapsed,
                    c.budget_s);
        std::fflush(stdout);
    }
    if (failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
