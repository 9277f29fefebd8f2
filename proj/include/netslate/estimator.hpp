#pragma once
// Localized weighted Lasso over the Walsh dictionary, approximate
// inverse-direction solve, debiased contrast inference, the three contrast
// families, and the Hamming partial-identification bound.

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "netslate/localize.hpp"
#include "netslate/nuisance.hpp"
#include "netslate/walsh.hpp"

namespace netslate {

struct LassoOptions {
    double tol = 1e-10;          // max coefficient change per sweep
    int max_sweeps = 10000;
    double kkt_tol = 1e-8;
};

struct LassoFit {
    WalshCoeffs alpha_hat;
    double lambda = 0.0;
    double sigma_hat = 0.0;
    double n_eff = 0.0;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double kkt_violation = 0.0;
};

struct LambdaChoice {
    double lambda = 0.0;
    double sigma_hat = 0.0;
    bool degenerate = false;   // all-zero residuals
};

// sigma_hat = 1.4826 * weighted MAD of y_resid; lambda = c * sigma_hat *
// sqrt(log d / n_eff), floored at 1e-12.
LambdaChoice select_lambda(const ResidualPanel& panel, const LocalWeights& weights, double c_lambda);

// Cyclic coordinate descent with soft thresholding on
//   sum_j w_j (y_j - z_j' beta)^2 + lambda ||beta||_1.
LassoFit weighted_lasso(const ResidualPanel& panel, const LocalWeights& weights, double lambda,
                        const LassoOptions& opts = {});

// Sigma_hat(g) = sum_j w_j z_j z_j'
Eigen::MatrixXd weighted_gram(const ResidualPanel& panel, const LocalWeights& weights);

struct ClimeOptions {
    double admm_penalty = 1.0;
    double tol = 1e-8;
    int max_iterations = 20000;
    int max_inflations = 4;
    double feasibility_slack = 1e-7;   // numeric slack on the final check
};

struct DebiasDirection {
    Eigen::VectorXd gamma_hat;
    double eta = 0.0;                  // final (possibly inflated) eta
    double feasibility_gap = 0.0;      // ||Sigma gamma - v||_inf
    int eta_inflations = 0;
};

// min ||gamma||_1 subject to ||Sigma gamma - v||_inf <= eta, solved by a
// linearized alternating-direction scheme; eta doubles on infeasibility, up
// to max_inflations times. Throws when still infeasible afterwards.
DebiasDirection clime_direction(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& v, double eta,
                                const ClimeOptions& opts = {});

struct ContrastDiagnostics {
    bool weight_fallback_used = false;
    int eta_inflations = 0;
    bool lasso_converged = false;
    bool degenerate_variance = false;
};

struct ContrastReport {
    double plugin_estimate = 0.0;
    double debiased_estimate = 0.0;
    double variance = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double nominal_level = 0.95;
    double n_eff = 0.0;
    ContrastDiagnostics diagnostics;
};

// <alpha_hat, Z(t2) - Z(t)>
double plugin_contrast_T(const LassoFit& fit, const Slate& t, const Slate& t2);

// theta_G = <alpha(g') - alpha(g), Z(t)>; theta_GT = <alpha(g'), Z(t2)> - <alpha(g), Z(t)>
std::pair<double, double> structural_contrasts(const LassoFit& fit_at_g, const LassoFit& fit_at_g2,
                                               const Slate& t, const Slate& t2);

// Debiased estimate, variance and normal-quantile confidence interval.
ContrastReport debiased_contrast(const LassoFit& fit, const DebiasDirection& dir,
                                 const ResidualPanel& panel, const LocalWeights& weights,
                                 const std::vector<double>& v, double nominal_level = 0.95);

// Partial-identification fallback: L * Hamming distance.
double hamming_bound(double lipschitz, const Slate& t, const Slate& t2);

struct PipelineConfig {
    int radius = 1;
    Kernel kernel = Kernel::Epanechnikov;
    double b_graph = 0.8;        // localization bandwidth over d_R
    int num_folds = 5;
    double c_lambda = 1.0;
    double c_eta = 1.0;
    int order_cap = 1;
    std::uint64_t seed = 1;
    double b_config = 0.25;      // nuisance bandwidth over masked-config distance
    double b_cov = 0.0;          // 0 = median heuristic
    double nominal_level = 0.95;
    bool uniform_weights = false;        // graph-agnostic ablation: no localization
    bool covariates_only_nuisance = false;
    bool nuisance_tree_projection = false;
    bool ego_separated_folds = false;
    LassoOptions lasso;
    ClimeOptions clime;
    DiscrepancyOptions discrepancy;
};

struct PipelineError : std::runtime_error {
    std::string stage;
    PipelineError(std::string stage_, const std::string& message)
        : std::runtime_error("[" + stage_ + "] " + message), stage(std::move(stage_)) {}
};

// Algorithm steps, in order: weights -> n_eff -> cross-fitted residuals ->
// weighted Lasso -> Gram -> inverse direction -> debiased estimate and CI.
// The optional matrices are precomputed symmetric d_R matrices: `distances`
// over the configs as stored (localization weights), `masked_distances` over
// root-masked configs (nuisance smoothing).
ContrastReport run_pipeline(const Dataset& data, int target_unit, const Slate& t, const Slate& t2,
                            const PipelineConfig& config,
                            const std::vector<std::vector<double>>* distances = nullptr,
                            const std::vector<std::vector<double>>* masked_distances = nullptr);

} // namespace netslate
