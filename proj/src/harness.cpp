#include "netslate/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "netslate/rng.hpp"
#include "netslate/stats.hpp"

namespace netslate {

std::string estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Proposed: return "proposed";
        case EstimatorKind::Oracle: return "oracle";
        case EstimatorKind::Baseline: return "baseline";
    }
    return "unknown";
}

std::optional<EstimatorKind> estimator_from_name(const std::string& name) {
    if (name == "proposed") return EstimatorKind::Proposed;
    if (name == "oracle") return EstimatorKind::Oracle;
    if (name == "baseline") return EstimatorKind::Baseline;
    return std::nullopt;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

namespace {

struct Cell {
    int num_units = 0;
    int rep = 0;
};

int default_target_unit(const Dataset& data) {
    for (int i = 0; i < data.num_units(); ++i)
        if (data.graph.degree(i) >= 1) return i;
    return 0;
}

void run_cell(const McOptions& options, const Cell& cell, std::vector<McResult>& out) {
    const std::uint64_t seed = derive_seed(options.base_seed, static_cast<std::uint64_t>(cell.num_units),
                                           static_cast<std::uint64_t>(cell.rep));
    DgpProfile profile = options.profile_template;
    profile.num_units = cell.num_units;
    profile.seed = seed;

    Dataset data;
    GroundTruth truth;
    std::string gen_error;
    try {
        auto [d, t] = generate_dataset(profile);
        data = std::move(d);
        truth = std::move(t);
    } catch (const std::exception& e) {
        gen_error = e.what();
    }

    int target = 0;
    Slate t_from, t_to;
    double truth_value = 0.0;
    std::vector<std::vector<double>> distances, masked_distances;
    const bool need_distances =
        gen_error.empty() &&
        std::any_of(options.estimators.begin(), options.estimators.end(), [](EstimatorKind k) {
            return k == EstimatorKind::Proposed || k == EstimatorKind::Oracle;
        });
    const bool need_masked =
        gen_error.empty() &&
        std::any_of(options.estimators.begin(), options.estimators.end(),
                    [](EstimatorKind k) { return k == EstimatorKind::Proposed; });
    if (gen_error.empty()) {
        target = options.target_unit.value_or(default_target_unit(data));
        // Default contrast: toggle slate coordinate 1 from -1 to +1 while the
        // unit's remaining coordinates stay at their observed values.
        t_from = data.slates[static_cast<std::size_t>(target)].with_coordinate(0, -1);
        t_to = data.slates[static_cast<std::size_t>(target)].with_coordinate(0, +1);
        truth_value = true_contrast_value(truth, target, t_from, t_to);
        if (need_distances)
            distances = pairwise_config_distances(data.configs, profile.radius,
                                                  options.pipeline.discrepancy);
        if (need_masked) {
            std::vector<RootedConfig> masked;
            masked.reserve(data.configs.size());
            for (const auto& c : data.configs) {
                RootedConfig m = mask_root_mark(c);
                if (options.pipeline.nuisance_tree_projection) m = tree_projection(m);
                masked.push_back(std::move(m));
            }
            masked_distances =
                pairwise_config_distances(masked, profile.radius, options.pipeline.discrepancy);
        }
    }

    for (EstimatorKind kind : options.estimators) {
        McResult row;
        row.estimator = kind;
        row.num_units = cell.num_units;
        row.rep = cell.rep;
        row.seed = seed;
        row.truth = truth_value;

        const auto t0 = std::chrono::steady_clock::now();
        try {
            if (!gen_error.empty()) throw std::runtime_error(gen_error);
            if (options.fail_injection && options.fail_injection(kind, cell.num_units, cell.rep))
                throw std::runtime_error("injected failure");

            PipelineConfig config = options.pipeline;
            config.seed = seed;
            ContrastReport report;
            switch (kind) {
                case EstimatorKind::Proposed:
                    report = run_pipeline(data, target, t_from, t_to, config, &distances, &masked_distances);
                    break;
                case EstimatorKind::Oracle:
                    report = oracle_estimate(data, truth, target, t_from, t_to, config, &distances);
                    break;
                case EstimatorKind::Baseline:
                    report = baseline_estimate(data, target, t_from, t_to, config);
                    break;
            }
            row.estimate = report.debiased_estimate;
            row.ci_low = report.ci_low;
            row.ci_high = report.ci_high;
            row.covered = report.ci_low <= row.truth && row.truth <= report.ci_high;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
            row.estimate = std::nan("");
            row.ci_low = std::nan("");
            row.ci_high = std::nan("");
            row.covered = false;
        }
        const auto t1 = std::chrono::steady_clock::now();
        row.runtime_ms = options.stable_runtime
                             ? 0
                             : std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
        out.push_back(std::move(row));
    }
}

} // namespace

std::vector<McResult> run_montecarlo(const McOptions& options) {
    if (options.reps < 1) throw std::invalid_argument("run_montecarlo: reps must be >= 1");
    if (options.sizes.empty()) throw std::invalid_argument("run_montecarlo: empty size list");

    std::vector<Cell> cells;
    for (int n : options.sizes)
        for (int rep = 0; rep < options.reps; ++rep) cells.push_back(Cell{n, rep});

    std::vector<std::vector<McResult>> slots(cells.size());
    const int workers = std::max(1, options.workers);
    std::atomic<std::size_t> next{0};
    auto worker_fn = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= cells.size()) return;
            run_cell(options, cells[idx], slots[idx]);
        }
    };
    if (workers == 1) {
        worker_fn();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
        for (auto& th : pool) th.join();
    }

    std::vector<McResult> results;
    results.reserve(cells.size() * options.estimators.size());
    for (auto& slot : slots)
        for (auto& row : slot) results.push_back(std::move(row));
    return results;
}

std::vector<McSummary> summarize(const std::vector<McResult>& results) {
    if (results.empty()) throw std::invalid_argument("summarize: empty result list");
    std::map<std::pair<std::string, int>, std::vector<const McResult*>> groups;
    for (const auto& r : results)
        groups[{estimator_name(r.estimator), r.num_units}].push_back(&r);

    std::vector<McSummary> out;
    for (const auto& [key, rows] : groups) {
        McSummary s;
        s.estimator = *estimator_from_name(key.first);
        s.num_units = key.second;
        std::vector<double> estimates, biases, widths;
        int covered = 0;
        for (const McResult* r : rows) {
            if (!r->ok) continue;
            estimates.push_back(r->estimate);
            biases.push_back(r->estimate - r->truth);
            widths.push_back(r->ci_high - r->ci_low);
            if (r->covered) ++covered;
        }
        s.reps = static_cast<int>(estimates.size());
        if (s.reps == 0) {
            s.mean_bias = s.median_bias = s.sd = s.ci95_width = s.mean_interval_width = s.coverage =
                std::nan("");
        } else {
            s.mean_bias = mean_of(biases);
            s.median_bias = quantile_linear(biases, 0.5);
            s.sd = sd_of(estimates);
            s.ci95_width = quantile_linear(estimates, 0.975) - quantile_linear(estimates, 0.025);
            s.mean_interval_width = mean_of(widths);
            s.coverage = static_cast<double>(covered) / static_cast<double>(s.reps);
        }
        out.push_back(s);
    }
    return out;
}

void results_to_csv(std::ostream& os, const std::vector<McResult>& results) {
    os << "estimator,N,rep,seed,estimate,ci_low,ci_high,truth,covered,runtime_ms\n";
    for (const auto& r : results) {
        os << estimator_name(r.estimator) << ',' << r.num_units << ',' << r.rep << ',' << r.seed << ','
           << format_double(r.estimate) << ',' << format_double(r.ci_low) << ','
           << format_double(r.ci_high) << ',' << format_double(r.truth) << ',' << (r.covered ? 1 : 0)
           << ',' << r.runtime_ms << '\n';
    }
}

std::vector<McResult> results_from_csv(std::istream& is) {
    std::vector<McResult> out;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("results_from_csv: empty file");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        McResult r;
        std::getline(ss, field, ',');
        const auto kind = estimator_from_name(field);
        if (!kind) throw std::runtime_error("results_from_csv: unknown estimator " + field);
        r.estimator = *kind;
        std::getline(ss, field, ',');
        r.num_units = std::stoi(field);
        std::getline(ss, field, ',');
        r.rep = std::stoi(field);
        std::getline(ss, field, ',');
        r.seed = std::stoull(field);
        std::getline(ss, field, ',');
        r.estimate = std::stod(field);
        std::getline(ss, field, ',');
        r.ci_low = std::stod(field);
        std::getline(ss, field, ',');
        r.ci_high = std::stod(field);
        std::getline(ss, field, ',');
        r.truth = std::stod(field);
        std::getline(ss, field, ',');
        r.covered = field == "1";
        std::getline(ss, field, ',');
        r.runtime_ms = std::stoll(field);
        r.ok = !std::isnan(r.estimate);
        out.push_back(r);
    }
    return out;
}

void summaries_to_csv(std::ostream& os, const std::vector<McSummary>& summaries) {
    os << "estimator,N,reps,mean_bias,median_bias,sd,ci95_width,mean_interval_width,coverage\n";
    for (const auto& s : summaries) {
        os << estimator_name(s.estimator) << ',' << s.num_units << ',' << s.reps << ','
           << format_double(s.mean_bias) << ',' << format_double(s.median_bias) << ','
           << format_double(s.sd) << ',' << format_double(s.ci95_width) << ','
           << format_double(s.mean_interval_width) << ',' << format_double(s.coverage) << '\n';
    }
}

void plotdata_to_csv(std::ostream& os, const std::vector<McResult>& results) {
    os << "estimator,N,rep,error\n";
    for (const auto& r : results) {
        if (!r.ok) continue;
        os << estimator_name(r.estimator) << ',' << r.num_units << ',' << r.rep << ','
           << format_double(r.estimate - r.truth) << '\n';
    }
}

} // namespace netslate
