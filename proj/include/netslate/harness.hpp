#pragma once
// Monte Carlo experiment driver and metrics aggregation.

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "netslate/simgen.hpp"

namespace netslate {

enum class EstimatorKind { Proposed, Oracle, Baseline };

std::string estimator_name(EstimatorKind kind);
std::optional<EstimatorKind> estimator_from_name(const std::string& name);

struct McResult {
    EstimatorKind estimator = EstimatorKind::Proposed;
    int num_units = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double truth = 0.0;
    bool covered = false;
    long long runtime_ms = 0;
    bool ok = true;            // false: estimator failed on this cell
    std::string error;         // failure note, not part of the CSV schema
};

struct McSummary {
    EstimatorKind estimator = EstimatorKind::Proposed;
    int num_units = 0;
    int reps = 0;              // successful reps
    double mean_bias = 0.0;
    double median_bias = 0.0;
    double sd = 0.0;
    double ci95_width = 0.0;   // Q97.5 - Q2.5 of the estimates
    double mean_interval_width = 0.0;
    double coverage = 0.0;
};

struct McOptions {
    DgpProfile profile_template;        // num_units and seed replaced per cell
    PipelineConfig pipeline;            // seed replaced per cell
    std::vector<int> sizes;
    int reps = 100;
    std::vector<EstimatorKind> estimators = {EstimatorKind::Proposed};
    std::uint64_t base_seed = 20240501;
    int workers = 1;
    std::optional<int> target_unit;     // default rule: lowest-index unit with degree >= 1
    bool stable_runtime = false;        // zero runtime_ms so CSV bytes are reproducible
    // test hook: force a failure row for matching cells
    std::function<bool(EstimatorKind, int, int)> fail_injection;
};

// One row per (size, rep, estimator); deterministic order and content
// regardless of worker count. Per-cell failures become failed rows.
std::vector<McResult> run_montecarlo(const McOptions& options);

// One summary per (estimator, N) in deterministic order.
std::vector<McSummary> summarize(const std::vector<McResult>& results);

void results_to_csv(std::ostream& os, const std::vector<McResult>& results);
std::vector<McResult> results_from_csv(std::istream& is);
void summaries_to_csv(std::ostream& os, const std::vector<McSummary>& summaries);
void plotdata_to_csv(std::ostream& os, const std::vector<McResult>& results);

// Canonical float formatting shared by every CSV writer.
std::string format_double(double value);

} // namespace netslate
