#pragma once
// Kernel localization weights over configuration space and Kish
// effective-sample-size accounting.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "netslate/config.hpp"

namespace netslate {

enum class Kernel { Indicator, Epanechnikov };

struct LocalWeights {
    std::vector<double> weights;   // nonnegative, sums to 1
    double n_eff = 0.0;            // 1 / sum w^2
    int support_count = 0;
    double bandwidth_used = 0.0;
    bool fallback_used = false;
};

inline double kernel_value(Kernel k, double u) {
    switch (k) {
        case Kernel::Indicator: return u <= 1.0 ? 1.0 : 0.0;
        case Kernel::Epanechnikov: return std::max(0.0, 1.0 - u * u);
    }
    return 0.0;
}

inline double effective_sample_size(const std::vector<double>& weights) {
    double sq = 0.0, total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("effective_sample_size: negative weight");
        sq += w * w;
        total += w;
    }
    if (sq <= 0.0) throw std::invalid_argument("effective_sample_size: zero weight vector");
    (void)total;
    return 1.0 / sq;
}

inline double effective_sample_size(const LocalWeights& w) { return effective_sample_size(w.weights); }

// Weights from precomputed distances to the target. Falls back to uniform
// weights on the ceil(sqrt(N)) nearest units (ties by unit index) when every
// kernel value is zero.
inline LocalWeights kernel_weights_from_distances(const std::vector<double>& distances, Kernel kernel,
                                                  double bandwidth) {
    if (distances.empty()) throw std::invalid_argument("kernel_weights: empty config list");
    if (bandwidth <= 0.0) throw std::invalid_argument("kernel_weights: bandwidth must be positive");

    const std::size_t n = distances.size();
    LocalWeights out;
    out.bandwidth_used = bandwidth;
    out.weights.assign(n, 0.0);

    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double k = kernel_value(kernel, distances[j] / bandwidth);
        out.weights[j] = k;
        total += k;
    }

    if (total <= 0.0) {
        out.fallback_used = true;
        const std::size_t k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });
        std::fill(out.weights.begin(), out.weights.end(), 0.0);
        for (std::size_t r = 0; r < std::min(k, n); ++r) out.weights[idx[r]] = 1.0;
        total = static_cast<double>(std::min(k, n));
    }

    for (double& w : out.weights) w /= total;
    out.support_count = static_cast<int>(std::count_if(out.weights.begin(), out.weights.end(),
                                                       [](double w) { return w > 0.0; }));
    out.n_eff = effective_sample_size(out.weights);
    return out;
}

inline LocalWeights kernel_weights(const std::vector<RootedConfig>& configs, const RootedConfig& target,
                                   Kernel kernel, double bandwidth, int radius,
                                   const DiscrepancyOptions& opts = {}) {
    if (configs.empty()) throw std::invalid_argument("kernel_weights: empty config list");
    std::vector<double> d(configs.size());
    for (std::size_t j = 0; j < configs.size(); ++j)
        d[j] = config_distance(configs[j], target, radius, opts);
    return kernel_weights_from_distances(d, kernel, bandwidth);
}

// Diagnostics dump: unit, distance, weight.
inline void weights_to_csv(std::ostream& os, const std::vector<double>& distances, const LocalWeights& w) {
    os << "unit,distance,weight\n";
    for (std::size_t j = 0; j < w.weights.size(); ++j)
        os << j << ',' << distances[j] << ',' << w.weights[j] << '\n';
}

} // namespace netslate
