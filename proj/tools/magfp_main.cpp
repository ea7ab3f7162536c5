#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "magfp/errors.hpp"
#include "magfp/evaluation.hpp"
#include "magfp/features.hpp"
#include "magfp/io.hpp"
#include "magfp/matching.hpp"
#include "magfp/rng.hpp"
#include "magfp/synthetic.hpp"

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;
using namespace magfp;

// Exit codes: 0 success, 2 bad input, 3 data-quality failure, 4 matching
// impossible. 1 is reserved for unexpected internal failures.
constexpr int exit_ok = 0;
constexpr int exit_input = 2;
constexpr int exit_quality = 3;
constexpr int exit_impossible = 4;

fs::path resolve_out(const std::string& out_dir, const std::string& file) {
    const fs::path p(file);
    if (p.is_absolute() || out_dir.empty() || out_dir == ".") return p;
    return fs::path(out_dir) / p;
}

Algorithm parse_algorithm(const std::string& s) {
    const auto alg = algorithm_from_string(s);
    if (!alg) throw std::invalid_argument("unknown algorithm '" + s + "'");
    return *alg;
}

std::optional<int> band_option(int band) {
    if (band < 0) return std::nullopt;
    return band;
}

std::vector<WarpOp> parse_warp_spec(const std::string& spec) {
    std::vector<WarpOp> ops;
    std::size_t begin = 0;
    while (begin < spec.size()) {
        std::size_t end = spec.find(',', begin);
        if (end == std::string::npos) end = spec.size();
        const std::string token = spec.substr(begin, end - begin);
        begin = end + 1;
        const std::size_t colon = token.find(':');
        if (colon == std::string::npos) {
            throw std::invalid_argument("warp op '" + token + "' is not kind:index");
        }
        const std::string kind = token.substr(0, colon);
        WarpOp op;
        if (kind == "dup") {
            op.kind = WarpKind::duplicate;
        } else if (kind == "drop") {
            op.kind = WarpKind::drop;
        } else {
            throw std::invalid_argument("warp kind '" + kind + "' is not dup or drop");
        }
        try {
            op.index = std::stoi(token.substr(colon + 1));
        } catch (const std::exception&) {
            throw std::invalid_argument("warp op '" + token + "' has a bad index");
        }
        ops.push_back(op);
    }
    return ops;
}

/// Loads and gate-checks a map. Spacing deviations only warn (hand surveys
/// are not micrometer-exact); structural violations are fatal.
// Structural violations are fatal; spacing deviations only warn, since hand
// surveyed maps are never perfectly even. Window fit is not checked here:
// enumeration skips short paths itself and reports when nothing remains.
FingerprintMap load_checked_map(const fs::path& file) {
    FingerprintMap map = io::load_map_csv(file);
    const std::vector<Violation> violations = validate_map(map);
    int spacing = 0;
    std::vector<const Violation*> hard;
    for (const Violation& v : violations) {
        if (v.message.rfind("spacing", 0) == 0) {
            ++spacing;
        } else {
            hard.push_back(&v);
        }
    }
    if (spacing > 0) {
        std::cerr << "warning: " << spacing << " spacing deviation(s) in " << file.string()
                  << "\n";
    }
    if (!hard.empty()) {
        for (std::size_t i = 0; i < hard.size() && i < 5; ++i) {
            std::cerr << "map violation: " << hard[i]->message << " (path "
                      << hard[i]->path_id << ", seq " << hard[i]->seq << ")\n";
        }
        throw std::invalid_argument(file.string() + " fails validation with " +
                                    std::to_string(hard.size()) + " violation(s)");
    }
    return map;
}

struct ExtractOpts {
    std::string log_file;
    std::string marker_file;
    std::string mode = "aligned";
    std::string out = "path_features.csv";
};

int run_extract(const ExtractOpts& o, const std::string& out_dir) {
    const std::vector<SensorSample> log = io::load_sensor_log_csv(o.log_file);
    const std::vector<Marker> markers = io::load_marker_csv(o.marker_file);
    const FeatureMode mode =
        o.mode == "projected" ? FeatureMode::projected : FeatureMode::aligned;

    if (mode == FeatureMode::projected) {
        const std::vector<std::size_t> picks = select_marker_samples(log, markers);
        std::vector<std::size_t> bad;
        for (const std::size_t idx : picks) {
            try {
                extract_features_projected(log[idx]);
            } catch (const DegenerateGravity&) {
                bad.push_back(idx);
            }
        }
        if (!bad.empty()) {
            for (const std::size_t idx : bad) {
                // +2: one for the header line, one for 1-based numbering.
                std::cerr << "degenerate gravity at log line " << idx + 2
                          << " (timestamp_us=" << log[idx].timestamp_us << ")\n";
            }
            std::cerr << bad.size() << " sample(s) cannot be projected\n";
            return exit_quality;
        }
    }

    const std::vector<PathFeature> feats = extract_path_features(log, markers, mode);
    const fs::path out = resolve_out(out_dir, o.out);
    io::save_path_features_csv(feats, out);
    std::cout << "wrote " << feats.size() << " feature rows to " << out.string() << "\n";
    return exit_ok;
}

struct MatchOpts {
    std::string map_file;
    std::string targets_file;
    std::string algorithm = "path";
    int window_len = 20;
    bool reversed = false;
    int dtw_band = -1;
    std::string out = "results.json";
};

int run_match(const MatchOpts& o, const std::string& out_dir) {
    const Algorithm alg = parse_algorithm(o.algorithm);
    const FingerprintMap map = load_checked_map(o.map_file);
    const std::vector<io::TargetCase> cases = io::load_targets_csv(o.targets_file);
    if (cases.empty()) throw std::invalid_argument("no target cases in " + o.targets_file);

    std::vector<Window> candidates;
    if (alg != Algorithm::point) {
        for (const io::TargetCase& c : cases) {
            if (c.window.length() != o.window_len) {
                throw std::invalid_argument(
                    "case " + std::to_string(c.case_id) + " has " +
                    std::to_string(c.window.length()) + " points, expected --window " +
                    std::to_string(o.window_len));
            }
        }
        WindowSet set = enumerate_windows(map, o.window_len, o.reversed);
        if (set.skipped_paths > 0) {
            std::cerr << "warning: skipped " << set.skipped_paths
                      << " path(s) shorter than the window\n";
        }
        if (set.windows.empty()) {
            throw EmptyCandidates("map yields no windows of length " +
                                  std::to_string(o.window_len));
        }
        candidates = std::move(set.windows);
    } else if (map.total_points() == 0) {
        throw EmptyMap("map has no points");
    }

    DtwParams dtw{band_option(o.dtw_band)};
    ojson results = ojson::array();
    for (const io::TargetCase& c : cases) {
        ojson row;
        row["case_id"] = c.case_id;
        if (alg == Algorithm::point) {
            const MatchResult r = point_match(c.window.feats.front(), map);
            const RefPoint* pt = map.find_point(*r.point_id);
            row["score"] = r.score;
            row["matched"] = {{"point_id", *r.point_id}};
            row["est"] = ojson::array({ojson::array({pt->pos.x, pt->pos.y})});
        } else {
            const MatchResult r = alg == Algorithm::path
                                      ? path_match(c.window, candidates)
                                      : dtw_match(c.window, candidates, dtw);
            const Window& w = candidates[r.candidate_index];
            row["score"] = r.score;
            row["matched"] = {{"path_id", w.path_id},
                              {"start", w.start},
                              {"direction", std::string(to_string(w.direction))}};
            ojson est = ojson::array();
            for (const Vec2& p : w.coords) est.push_back(ojson::array({p.x, p.y}));
            row["est"] = std::move(est);
        }
        results.push_back(std::move(row));
    }

    ojson j;
    j["algorithm"] = std::string(to_string(alg));
    j["params"] = {{"window_len", o.window_len},
                   {"reversed_candidates", o.reversed},
                   {"dtw_band", o.dtw_band < 0 ? ojson(nullptr) : ojson(o.dtw_band)}};
    j["map"] = {{"n_points", map.total_points()},
                {"n_paths", map.paths.size()},
                {"n_candidate_windows", candidates.size()}};
    j["results"] = std::move(results);

    const fs::path out = resolve_out(out_dir, o.out);
    io::write_file(out, j.dump(2) + "\n");
    std::cout << "matched " << cases.size() << " case(s) with " << to_string(alg) << " into "
              << out.string() << "\n";
    return exit_ok;
}

struct EvaluateOpts {
    std::string results_file;
    std::string truth_file;
    std::string report = "report.json";
    std::string heatmap;
    double cell_m = 1.0;
};

int run_evaluate(const EvaluateOpts& o, const std::string& out_dir) {
    const ojson j = ojson::parse(io::read_file(o.results_file));
    const Algorithm alg = parse_algorithm(j.at("algorithm").get<std::string>());
    const ojson& results = j.at("results");
    if (!results.is_array() || results.empty()) {
        throw std::invalid_argument("results file has no cases");
    }

    const std::vector<io::TargetCase> truth = io::load_targets_csv(o.truth_file);
    std::unordered_map<int, const io::TargetCase*> truth_by_id;
    for (const io::TargetCase& c : truth) truth_by_id[c.case_id] = &c;

    std::vector<CaseError> per_case;
    per_case.reserve(results.size());
    std::size_t consumed = 0;
    for (const ojson& row : results) {
        const int case_id = row.at("case_id").get<int>();
        const auto it = truth_by_id.find(case_id);
        if (it == truth_by_id.end()) {
            throw std::invalid_argument("case id " + std::to_string(case_id) +
                                        " is missing from the truth file");
        }
        ++consumed;
        const Window& tw = it->second->window;
        std::vector<Vec2> est;
        for (const ojson& p : row.at("est")) {
            est.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        }
        CaseError ce;
        ce.case_id = case_id;
        ce.truth = tw.coords.front();
        if (alg == Algorithm::point) {
            if (est.empty()) throw std::invalid_argument("case " + std::to_string(case_id) +
                                                         " has no estimate");
            ce.error_m = point_error(tw.coords.front(), est.front());
        } else {
            ce.error_m = path_error(tw.coords, est);
        }
        per_case.push_back(ce);
    }
    if (consumed != truth.size()) {
        for (const io::TargetCase& c : truth) {
            bool found = false;
            for (const ojson& row : results) {
                if (row.at("case_id").get<int>() == c.case_id) {
                    found = true;
                    break;
                }
            }
            if (!found) {
                throw std::invalid_argument("truth case id " + std::to_string(c.case_id) +
                                            " is missing from the results file");
            }
        }
    }

    const ErrorReport report = aggregate_errors(std::move(per_case));

    ojson out;
    out["algorithm"] = std::string(to_string(alg));
    if (j.contains("params")) out["params"] = j.at("params");
    out["workload"] = {{"n_cases", report.per_case.size()}};
    ojson cases = ojson::array();
    for (const CaseError& c : report.per_case) {
        cases.push_back({{"case_id", c.case_id},
                         {"x_m", c.truth.x},
                         {"y_m", c.truth.y},
                         {"error_m", c.error_m}});
    }
    out["per_case"] = std::move(cases);
    out["quartiles"] = {{"min", report.quartiles.min},
                        {"q25", report.quartiles.q25},
                        {"median", report.quartiles.median},
                        {"q75", report.quartiles.q75},
                        {"max", report.quartiles.max}};
    out["mean"] = report.mean;

    const fs::path report_path = resolve_out(out_dir, o.report);
    io::write_file(report_path, out.dump(2) + "\n");
    std::cout << "mean error " << io::format_double(report.mean) << " m over "
              << report.per_case.size() << " case(s), report in " << report_path.string()
              << "\n";

    if (!o.heatmap.empty()) {
        const std::vector<HeatCell> cells = error_heatmap(report, o.cell_m);
        const fs::path heatmap_path = resolve_out(out_dir, o.heatmap);
        io::write_file(heatmap_path, serialize_heatmap_csv(cells));
        std::cout << "heatmap with " << cells.size() << " cell(s) in "
                  << heatmap_path.string() << "\n";
    }
    return exit_ok;
}

struct BenchOpts {
    std::string map_file;
    std::string targets_file;
    std::string algorithms = "point,path,dtw";
    int repetitions = 3;
    int window_len = 20;
    bool reversed = false;
    int dtw_band = -1;
    bool parallel = false;
    std::string out = "timing.json";
};

int run_bench(const BenchOpts& o, const std::string& out_dir) {
    std::vector<Algorithm> algs;
    std::size_t begin = 0;
    while (begin <= o.algorithms.size()) {
        std::size_t end = o.algorithms.find(',', begin);
        if (end == std::string::npos) end = o.algorithms.size();
        algs.push_back(parse_algorithm(o.algorithms.substr(begin, end - begin)));
        begin = end + 1;
    }

    const bool needs_windows = std::any_of(algs.begin(), algs.end(),
                                           [](Algorithm a) { return a != Algorithm::point; });
    const FingerprintMap map = load_checked_map(o.map_file);
    const std::vector<io::TargetCase> cases = io::load_targets_csv(o.targets_file);
    if (cases.empty()) throw std::invalid_argument("no target cases in " + o.targets_file);
    std::vector<Window> targets;
    targets.reserve(cases.size());
    for (const io::TargetCase& c : cases) {
        if (needs_windows && c.window.length() != o.window_len) {
            throw std::invalid_argument("case " + std::to_string(c.case_id) + " has " +
                                        std::to_string(c.window.length()) +
                                        " points, expected --window " +
                                        std::to_string(o.window_len));
        }
        targets.push_back(c.window);
    }

    EvalParams params;
    params.window_len = o.window_len;
    params.include_reversed = o.reversed;
    params.dtw.band = band_option(o.dtw_band);
    params.threads =
        o.parallel ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency())) : 1;

    const TimingReport report = benchmark(map, targets, algs, params, o.repetitions);

    ojson j;
    j["workload"] = {{"n_points", report.workload.n_points},
                     {"n_paths", report.workload.n_paths},
                     {"n_candidate_windows", report.workload.n_candidate_windows},
                     {"n_targets", report.workload.n_targets},
                     {"window_len", report.workload.window_len}};
    j["repetitions"] = report.repetitions;
    j["parallel"] = report.parallel;
    ojson timings = ojson::array();
    for (const TimingEntry& t : report.timings) {
        timings.push_back(
            {{"algorithm", std::string(to_string(t.algorithm))}, {"seconds", t.seconds}});
        std::cout << to_string(t.algorithm) << ": " << io::format_double(t.seconds) << " s\n";
    }
    j["timings"] = std::move(timings);

    const fs::path out = resolve_out(out_dir, o.out);
    io::write_file(out, j.dump(2) + "\n");
    std::cout << "timing report in " << out.string() << "\n";
    return exit_ok;
}

struct SynthOpts {
    bool canonical = false;
    int n_paths = 24;
    int len_min = 20;
    int len_max = 50;
    int len = -1;
    int total = -1;
    double spacing = 0.30;
    double floor_w = 60.0;
    double floor_h = 79.0;
    int sources = 200;
    std::uint64_t seed = 0;
    std::string out = "map.csv";
    std::string json_out;
    std::string targets_out;
    int window_len = 20;
    bool targets_reversed = false;
    std::string warp;
    double noise = 0.0;
    std::int64_t warp_seed = -1;
};

int run_synth(const SynthOpts& o, const std::string& out_dir) {
    SurveySpec spec;
    FieldModel field;
    if (o.canonical) {
        spec = canonical_survey_spec();
        field = canonical_field(mix_seed(o.seed, 1));
    } else {
        spec.n_paths = o.n_paths;
        spec.min_len = o.len >= 0 ? o.len : o.len_min;
        spec.max_len = o.len >= 0 ? o.len : o.len_max;
        spec.spacing_m = o.spacing;
        if (o.total >= 0) spec.total_points = o.total;
        field = make_default_field(o.floor_w, o.floor_h, o.sources, mix_seed(o.seed, 1));
    }

    const FingerprintMap map = generate_survey(field, spec, mix_seed(o.seed, 2));
    const fs::path out = resolve_out(out_dir, o.out);
    io::save_map_csv(map, out);
    std::cout << "wrote " << map.total_points() << " points over " << map.paths.size()
              << " path(s) to " << out.string() << "\n";
    if (!o.json_out.empty()) {
        io::save_map_json(map, resolve_out(out_dir, o.json_out));
    }

    if (!o.targets_out.empty()) {
        const WindowSet set = enumerate_windows(map, o.window_len, o.targets_reversed);
        if (set.windows.empty()) {
            throw EmptyCandidates("map yields no windows of length " +
                                  std::to_string(o.window_len));
        }
        const std::vector<WarpOp> ops = parse_warp_spec(o.warp);
        const std::uint64_t warp_seed =
            o.warp_seed >= 0 ? static_cast<std::uint64_t>(o.warp_seed) : mix_seed(o.seed, 3);
        std::vector<io::TargetCase> cases;
        cases.reserve(set.windows.size());
        for (std::size_t i = 0; i < set.windows.size(); ++i) {
            io::TargetCase c;
            c.case_id = static_cast<int>(i);
            c.window = ops.empty() && o.noise <= 0.0
                           ? set.windows[i]
                           : warp_replay(set.windows[i], ops, o.noise, mix_seed(warp_seed, i));
            cases.push_back(std::move(c));
        }
        const fs::path targets_path = resolve_out(out_dir, o.targets_out);
        io::save_targets_csv(cases, targets_path);
        std::cout << "wrote " << cases.size() << " target case(s) to " << targets_path.string()
                  << "\n";
    }
    return exit_ok;
}

int classify_failure(const std::exception& e) {
    if (dynamic_cast<const DegenerateGravity*>(&e)) return exit_quality;
    if (dynamic_cast<const EmptyCandidates*>(&e) || dynamic_cast<const EmptyMap*>(&e)) {
        return exit_impossible;
    }
    if (dynamic_cast<const Error*>(&e)) return exit_input;
    if (dynamic_cast<const nlohmann::json::exception*>(&e)) return exit_input;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return exit_input;
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return exit_input;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"magnetic fingerprint positioning toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value config file");

    std::string out_dir = ".";
    app.add_option("--out-dir", out_dir, "Directory for relative output paths")
        ->envname("MAGFP_OUT_DIR")
        ->capture_default_str();

    ExtractOpts extract_opts;
    CLI::App* extract = app.add_subcommand(
        "extract", "Turn a sensor log plus position markers into path features");
    extract->add_option("--log", extract_opts.log_file, "Sensor log CSV")->required();
    extract->add_option("--markers", extract_opts.marker_file, "Marker CSV")->required();
    extract->add_option("--mode", extract_opts.mode, "aligned or projected")
        ->check(CLI::IsMember({"aligned", "projected"}))
        ->capture_default_str();
    extract->add_option("--out", extract_opts.out, "Output features CSV")
        ->capture_default_str();

    MatchOpts match_opts;
    CLI::App* match =
        app.add_subcommand("match", "Match target cases against a fingerprint map");
    match->add_option("--map", match_opts.map_file, "Fingerprint map CSV")->required();
    match->add_option("--targets", match_opts.targets_file, "Target CSV")->required();
    match->add_option("--algorithm", match_opts.algorithm, "point, path, or dtw")
        ->check(CLI::IsMember({"point", "path", "dtw"}))
        ->capture_default_str();
    match->add_option("--window", match_opts.window_len, "Window length")
        ->capture_default_str();
    match->add_flag("--reversed", match_opts.reversed,
                    "Also enumerate reversed candidate windows");
    match->add_option("--dtw-band", match_opts.dtw_band,
                      "DTW band half-width (unconstrained when omitted)")
        ->check(CLI::NonNegativeNumber);
    match->add_option("--out", match_opts.out, "Results JSON")->capture_default_str();

    EvaluateOpts evaluate_opts;
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "Score match results against ground truth");
    evaluate->add_option("--results", evaluate_opts.results_file, "Results JSON")->required();
    evaluate->add_option("--truth", evaluate_opts.truth_file, "Truth target CSV")->required();
    evaluate->add_option("--report", evaluate_opts.report, "Report JSON")
        ->capture_default_str();
    evaluate->add_option("--heatmap", evaluate_opts.heatmap, "Error heatmap CSV (optional)");
    evaluate->add_option("--cell", evaluate_opts.cell_m, "Heatmap cell size, meters")
        ->capture_default_str();

    BenchOpts bench_opts;
    CLI::App* bench = app.add_subcommand("bench", "Time matching algorithms on a workload");
    bench->add_option("--map", bench_opts.map_file, "Fingerprint map CSV")->required();
    bench->add_option("--targets", bench_opts.targets_file, "Target CSV")->required();
    bench->add_option("--algorithms", bench_opts.algorithms, "Comma-separated list")
        ->capture_default_str();
    bench->add_option("--reps", bench_opts.repetitions, "Repetitions per algorithm")
        ->capture_default_str();
    bench->add_option("--window", bench_opts.window_len, "Window length")
        ->capture_default_str();
    bench->add_flag("--reversed", bench_opts.reversed,
                    "Also enumerate reversed candidate windows");
    bench->add_option("--dtw-band", bench_opts.dtw_band, "DTW band half-width")
        ->check(CLI::NonNegativeNumber);
    bench->add_flag("--parallel", bench_opts.parallel,
                    "Time the multi-threaded evaluation mode instead");
    bench->add_option("--out", bench_opts.out, "Timing JSON")->capture_default_str();

    SynthOpts synth_opts;
    CLI::App* synth =
        app.add_subcommand("synth", "Generate a synthetic survey (and optional targets)");
    synth->add_flag("--canonical", synth_opts.canonical,
                    "Canonical survey: 24 paths, 1024 points, 0.30 m spacing");
    synth->add_option("--paths", synth_opts.n_paths, "Number of paths")->capture_default_str();
    synth->add_option("--len-min", synth_opts.len_min, "Minimum path length")
        ->capture_default_str();
    synth->add_option("--len-max", synth_opts.len_max, "Maximum path length")
        ->capture_default_str();
    synth->add_option("--len", synth_opts.len, "Fixed path length (overrides min/max)");
    synth->add_option("--total", synth_opts.total, "Exact total point count");
    synth->add_option("--spacing", synth_opts.spacing, "Point spacing, meters")
        ->capture_default_str();
    synth->add_option("--floor-w", synth_opts.floor_w, "Floor width, meters")
        ->capture_default_str();
    synth->add_option("--floor-h", synth_opts.floor_h, "Floor height, meters")
        ->capture_default_str();
    synth->add_option("--sources", synth_opts.sources, "Number of field sources")
        ->capture_default_str();
    synth->add_option("--seed", synth_opts.seed, "Master seed")->capture_default_str();
    synth->add_option("--out", synth_opts.out, "Map CSV")->capture_default_str();
    synth->add_option("--json-out", synth_opts.json_out, "Optional JSON mirror of the map");
    synth->add_option("--targets-out", synth_opts.targets_out,
                      "Also emit every window as a target case");
    synth->add_option("--window", synth_opts.window_len, "Target window length")
        ->capture_default_str();
    synth->add_flag("--targets-reversed", synth_opts.targets_reversed,
                    "Include reversed windows in the target set");
    synth->add_option("--warp", synth_opts.warp,
                      "Warp ops applied to every target, e.g. dup:3,drop:7");
    synth->add_option("--noise", synth_opts.noise, "Gaussian feature noise stddev, uT")
        ->capture_default_str();
    synth->add_option("--warp-seed", synth_opts.warp_seed,
                      "Seed for warp noise (derived from --seed when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_input;
    }

    try {
        if (extract->parsed()) return run_extract(extract_opts, out_dir);
        if (match->parsed()) return run_match(match_opts, out_dir);
        if (evaluate->parsed()) return run_evaluate(evaluate_opts, out_dir);
        if (bench->parsed()) return run_bench(bench_opts, out_dir);
        if (synth->parsed()) return run_synth(synth_opts, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify_failure(e);
    }
    return exit_input;
}
