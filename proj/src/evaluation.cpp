#include "magfp/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>

#include "magfp/errors.hpp"
#include "magfp/io.hpp"

namespace magfp {

namespace {

double quantile(const std::vector<double>& sorted, double q) {
    // Linear interpolation between the two closest order statistics.
    const double h = q * static_cast<double>(sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(i);
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

/// Runs fn(i) for every target index, on params.threads threads. Each index
/// writes only its own output slot, so the result does not depend on the
/// partition.
template <typename Fn>
void for_each_target(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

struct PreparedWorkload {
    std::vector<Window> candidates;  // empty for point matching
};

PreparedWorkload prepare(const FingerprintMap& map, std::span<const Window> targets,
                         Algorithm algorithm, const EvalParams& params) {
    if (targets.empty()) throw std::invalid_argument("no target windows");
    PreparedWorkload w;
    if (algorithm == Algorithm::point) {
        if (map.total_points() == 0) throw EmptyMap("map has no points");
        for (const Window& t : targets) {
            if (t.length() == 0) throw LengthMismatch("target window is empty");
        }
        return w;
    }
    const int len = targets.front().length();
    for (const Window& t : targets) {
        if (t.length() != len) {
            throw LengthMismatch("target windows have differing lengths");
        }
    }
    WindowSet set = enumerate_windows(map, len, params.include_reversed);
    if (set.windows.empty()) throw EmptyCandidates("no candidate windows at this length");
    w.candidates = std::move(set.windows);
    return w;
}

}  // namespace

double point_error(const Vec2& truth, const Vec2& estimate) {
    const double dx = truth.x - estimate.x;
    const double dy = truth.y - estimate.y;
    return std::sqrt(dx * dx + dy * dy);
}

double path_error(std::span<const Vec2> truth, std::span<const Vec2> estimate) {
    if (truth.empty() || truth.size() != estimate.size()) {
        throw LengthMismatch("path_error: sequences of length " + std::to_string(truth.size()) +
                             " and " + std::to_string(estimate.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        sum += point_error(truth[i], estimate[i]);
    }
    return sum / static_cast<double>(truth.size());
}

ErrorReport aggregate_errors(std::vector<CaseError> per_case) {
    if (per_case.empty()) throw std::invalid_argument("no per-case errors to aggregate");
    ErrorReport report;
    report.per_case = std::move(per_case);

    std::vector<double> sorted;
    sorted.reserve(report.per_case.size());
    double sum = 0.0;
    for (const CaseError& c : report.per_case) {
        sorted.push_back(c.error_m);
        sum += c.error_m;
    }
    std::sort(sorted.begin(), sorted.end());

    report.quartiles.min = sorted.front();
    report.quartiles.q25 = quantile(sorted, 0.25);
    report.quartiles.median = quantile(sorted, 0.50);
    report.quartiles.q75 = quantile(sorted, 0.75);
    report.quartiles.max = sorted.back();
    report.mean = sum / static_cast<double>(sorted.size());
    return report;
}

ErrorReport evaluate_workload(const FingerprintMap& map, std::span<const Window> targets,
                              Algorithm algorithm, const EvalParams& params) {
    const PreparedWorkload prep = prepare(map, targets, algorithm, params);

    std::vector<CaseError> errors(targets.size());
    for_each_target(targets.size(), params.threads, [&](std::size_t i) {
        const Window& t = targets[i];
        CaseError ce;
        ce.case_id = static_cast<int>(i);
        ce.truth = t.coords.front();
        switch (algorithm) {
            case Algorithm::point: {
                const MatchResult r = point_match(t.feats.front(), map);
                const RefPoint* pt = map.find_point(*r.point_id);
                ce.error_m = point_error(t.coords.front(), pt->pos);
                break;
            }
            case Algorithm::path: {
                const MatchResult r = path_match(t, prep.candidates);
                ce.error_m = path_error(t.coords, prep.candidates[r.candidate_index].coords);
                break;
            }
            case Algorithm::dtw: {
                const MatchResult r = dtw_match(t, prep.candidates, params.dtw);
                ce.error_m = path_error(t.coords, prep.candidates[r.candidate_index].coords);
                break;
            }
        }
        errors[i] = ce;
    });
    return aggregate_errors(std::move(errors));
}

std::vector<HeatCell> error_heatmap(const ErrorReport& report, double cell_m) {
    if (cell_m <= 0.0) throw std::invalid_argument("cell size must be positive");
    std::map<std::pair<long, long>, std::pair<double, std::size_t>> cells;
    for (const CaseError& c : report.per_case) {
        const long bx = static_cast<long>(std::floor(c.truth.x / cell_m));
        const long by = static_cast<long>(std::floor(c.truth.y / cell_m));
        auto& [sum, count] = cells[{bx, by}];
        sum += c.error_m;
        ++count;
    }
    std::vector<HeatCell> out;
    out.reserve(cells.size());
    for (const auto& [key, acc] : cells) {
        out.push_back({static_cast<double>(key.first) * cell_m,
                       static_cast<double>(key.second) * cell_m,
                       acc.first / static_cast<double>(acc.second)});
    }
    return out;
}

std::string serialize_heatmap_csv(std::span<const HeatCell> cells) {
    std::string out = "x_m,y_m,error_m\n";
    for (const HeatCell& c : cells) {
        out += io::format_double(c.x_m);
        out += ',';
        out += io::format_double(c.y_m);
        out += ',';
        out += io::format_double(c.error_m);
        out += '\n';
    }
    return out;
}

namespace {

volatile double benchmark_sink_slot = 0.0;

[[gnu::noinline]] void benchmark_sink(double v) { benchmark_sink_slot = v; }

double timed_pass(const FingerprintMap& map, std::span<const Window> targets,
                  Algorithm algorithm, const EvalParams& params,
                  std::span<const Window> candidates) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> scores(targets.size());
    for_each_target(targets.size(), params.threads, [&](std::size_t i) {
        switch (algorithm) {
            case Algorithm::point:
                scores[i] = point_match(targets[i].feats.front(), map).score;
                break;
            case Algorithm::path:
                scores[i] = path_match(targets[i], candidates).score;
                break;
            case Algorithm::dtw:
                scores[i] = dtw_match(targets[i], candidates, params.dtw).score;
                break;
        }
    });
    double sum = 0.0;
    for (const double s : scores) sum += s;
    benchmark_sink(sum);
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

TimingReport benchmark(const FingerprintMap& map, std::span<const Window> targets,
                       std::span<const Algorithm> algorithms, const EvalParams& params,
                       int repetitions) {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
    if (algorithms.empty()) throw std::invalid_argument("no algorithms to benchmark");

    const bool needs_windows =
        std::any_of(algorithms.begin(), algorithms.end(),
                    [](Algorithm a) { return a != Algorithm::point; });
    PreparedWorkload prep;
    if (needs_windows) {
        prep = prepare(map, targets, Algorithm::path, params);
    } else {
        prep = prepare(map, targets, Algorithm::point, params);
    }

    TimingReport report;
    report.workload.n_points = map.total_points();
    report.workload.n_paths = map.paths.size();
    report.workload.n_candidate_windows = prep.candidates.size();
    report.workload.n_targets = targets.size();
    report.workload.window_len = targets.empty() ? 0 : targets.front().length();
    report.repetitions = repetitions;
    report.parallel = params.threads > 1;

    for (const Algorithm alg : algorithms) {
        std::vector<double> runs;
        runs.reserve(repetitions);
        for (int r = 0; r < repetitions; ++r) {
            runs.push_back(timed_pass(map, targets, alg, params, prep.candidates));
        }
        std::sort(runs.begin(), runs.end());
        const std::size_t n = runs.size();
        const double median =
            n % 2 == 1 ? runs[n / 2] : 0.5 * (runs[n / 2 - 1] + runs[n / 2]);
        report.timings.push_back({alg, median});
    }
    return report;
}

}  // namespace magfp
