#pragma once
// Synthetic data-generating process with known ground truth, plus the Oracle
// and Graph-Agnostic-DR baseline estimator arms.
//
// Outcome model: Y_i = <alpha(g_i), Z(T_i)> + eps_i with
// alpha_S(g_i) = beta_S * (1 + interference_strength * rho_i), where rho_i is
// unit i's treated-neighbor fraction on slate coordinate 1 (rho = 0.5 for
// isolated units). The designated contrast subset {1} carries the constant
// coefficient true_contrast / 2, so the designated contrast is exact for
// every unit. No other active subset touches coordinate 1.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netslate/dataset.hpp"
#include "netslate/estimator.hpp"
#include "netslate/walsh.hpp"

namespace netslate {

struct DgpProfile {
    std::string name = "custom";
    int num_units = 500;
    int slate_dim = 10;
    double avg_degree = 8.0;
    int s_active = 3;
    double noise_sd = 0.5;
    double interference_strength = 1.5;
    int radius = 1;
    double true_contrast = 0.0;
    std::uint64_t seed = 1;

    // instantiation knobs
    std::vector<int> mark_coords = {0};   // slate coordinates used as config marks; empty = all
    double assignment_correlation = 0.0;  // latent-Gaussian network correlation of coordinate 1
    bool active_singletons_only = true;   // active subsets: singletons only vs orders <= 2
    bool modulate_intercept_only = false; // interference enters through the outcome level only

    void validate() const;
};

// Profiles named after the experiment layouts they reproduce.
DgpProfile fig2_profile(int num_units, std::uint64_t seed);
DgpProfile appendix_a_profile(int num_units, std::uint64_t seed);

// Pipeline defaults paired with the fig2 profile.
PipelineConfig fig2_pipeline(std::uint64_t seed);

struct GroundTruth {
    std::vector<WalshCoeffs> alpha_of_unit;
    std::vector<double> noiseless_outcomes;
    std::vector<double> rho;              // treated-neighbor fraction per unit
    DgpProfile dgp;
};

// Erdos-Renyi G(N, q) with q = avg_degree / (N - 1), seeded.
Graph generate_graph(int num_units, double avg_degree, std::uint64_t seed);

std::pair<Dataset, GroundTruth> generate_dataset(const DgpProfile& profile);

// <alpha(g_unit), Z(t2) - Z(t)> on the true coefficients.
double true_contrast_value(const GroundTruth& truth, int unit, const Slate& t, const Slate& t2);

// Infeasible benchmark: true coefficients and true nuisances substituted into
// the debiased formula, so the only error source is the outcome noise.
ContrastReport oracle_estimate(const Dataset& data, const GroundTruth& truth, int unit, const Slate& t,
                               const Slate& t2, const PipelineConfig& config,
                               const std::vector<std::vector<double>>* distances = nullptr);

// Graph-agnostic ablation: uniform weights, covariate-only nuisances.
ContrastReport baseline_estimate(const Dataset& data, int unit, const Slate& t, const Slate& t2,
                                 const PipelineConfig& config);

} // namespace netslate
