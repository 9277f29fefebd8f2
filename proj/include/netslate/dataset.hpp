#pragma once
// Single-snapshot dataset container and cross-fitting fold assignment.

#include <stdexcept>
#include <vector>

#include "netslate/config.hpp"
#include "netslate/graph.hpp"

namespace netslate {

struct Dataset {
    Graph graph;
    std::vector<std::vector<double>> covariates;   // N x dim_x
    std::vector<Slate> slates;                     // observed treatment slates
    std::vector<double> outcomes;
    std::vector<RootedConfig> configs;             // configs[i] rooted at unit i

    int num_units() const { return static_cast<int>(outcomes.size()); }

    void validate() const {
        const std::size_t n = outcomes.size();
        if (covariates.size() != n || slates.size() != n || configs.size() != n)
            throw std::invalid_argument("Dataset: per-unit arrays must have equal length");
        if (static_cast<int>(n) != graph.num_nodes())
            throw std::invalid_argument("Dataset: unit count must match the graph");
    }
};

struct FoldAssignment {
    int num_folds = 0;
    std::vector<int> fold_of;   // per-unit fold index in [0, num_folds)

    std::vector<std::vector<int>> members() const {
        std::vector<std::vector<int>> m(static_cast<std::size_t>(num_folds));
        for (std::size_t i = 0; i < fold_of.size(); ++i)
            m[static_cast<std::size_t>(fold_of[i])].push_back(static_cast<int>(i));
        return m;
    }
};

// Seeded uniform random partition with balanced sizes (differ by at most 1).
FoldAssignment make_folds(int num_units, int num_folds, std::uint64_t seed);

} // namespace netslate
