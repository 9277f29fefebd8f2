#include "netslate/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netslate/stats.hpp"

namespace netslate {

LambdaChoice select_lambda(const ResidualPanel& panel, const LocalWeights& weights, double c_lambda) {
    if (c_lambda <= 0.0) throw std::invalid_argument("select_lambda: c_lambda must be positive");
    const double n_eff = weights.n_eff;
    if (n_eff <= 0.0) throw std::invalid_argument("select_lambda: nonpositive n_eff");

    constexpr double kFloor = 1e-12;
    LambdaChoice out;
    bool all_zero = true;
    for (double y : panel.y_resid)
        if (y != 0.0) { all_zero = false; break; }
    if (all_zero) {
        out.sigma_hat = 0.0;
        out.lambda = kFloor;
        out.degenerate = true;
        return out;
    }
    out.sigma_hat = weighted_mad_sigma(panel.y_resid, weights.weights);
    const double d = static_cast<double>(panel.index_set.size());
    out.lambda = std::max(kFloor, c_lambda * out.sigma_hat * std::sqrt(std::log(d) / n_eff));
    return out;
}

namespace {

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

} // namespace

LassoFit weighted_lasso(const ResidualPanel& panel, const LocalWeights& weights, double lambda,
                        const LassoOptions& opts) {
    if (lambda < 0.0) throw std::invalid_argument("weighted_lasso: negative lambda");
    const int n = static_cast<int>(panel.y_resid.size());
    const int d = panel.index_set.size();
    if (static_cast<int>(weights.weights.size()) != n)
        throw std::invalid_argument("weighted_lasso: weight/panel size mismatch");

    // a_k = 2 sum_j w_j z_jk^2
    std::vector<double> a(static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j < n; ++j) {
        const double w = weights.weights[static_cast<std::size_t>(j)];
        if (w == 0.0) continue;
        const auto& z = panel.z_resid[static_cast<std::size_t>(j)];
        for (int k = 0; k < d; ++k) a[static_cast<std::size_t>(k)] += 2.0 * w * z[static_cast<std::size_t>(k)] * z[static_cast<std::size_t>(k)];
    }

    std::vector<double> beta(static_cast<std::size_t>(d), 0.0);
    std::vector<double> resid(panel.y_resid);   // y - z'beta, beta = 0 initially

    int sweep = 0;
    double max_change = 0.0;
    for (; sweep < opts.max_sweeps; ++sweep) {
        max_change = 0.0;
        for (int k = 0; k < d; ++k) {
            if (a[static_cast<std::size_t>(k)] == 0.0) continue;
            double c = 0.0;
            for (int j = 0; j < n; ++j) {
                const double w = weights.weights[static_cast<std::size_t>(j)];
                if (w == 0.0) continue;
                c += 2.0 * w * panel.z_resid[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] * resid[static_cast<std::size_t>(j)];
            }
            c += a[static_cast<std::size_t>(k)] * beta[static_cast<std::size_t>(k)];
            const double updated = soft_threshold(c, lambda) / a[static_cast<std::size_t>(k)];
            const double delta = updated - beta[static_cast<std::size_t>(k)];
            if (delta != 0.0) {
                for (int j = 0; j < n; ++j)
                    resid[static_cast<std::size_t>(j)] -= delta * panel.z_resid[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
                beta[static_cast<std::size_t>(k)] = updated;
            }
            max_change = std::max(max_change, std::fabs(delta));
        }
        if (max_change < opts.tol) { ++sweep; break; }
    }

    // KKT stationarity: g_k = 2 sum_j w_j z_jk (y_j - z_j'beta)
    double kkt = 0.0;
    double weighted_sse = 0.0;
    for (int j = 0; j < n; ++j)
        weighted_sse += weights.weights[static_cast<std::size_t>(j)] * resid[static_cast<std::size_t>(j)] * resid[static_cast<std::size_t>(j)];
    double l1 = 0.0;
    for (int k = 0; k < d; ++k) {
        double g = 0.0;
        for (int j = 0; j < n; ++j) {
            const double w = weights.weights[static_cast<std::size_t>(j)];
            if (w == 0.0) continue;
            g += 2.0 * w * panel.z_resid[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] * resid[static_cast<std::size_t>(j)];
        }
        const double b = beta[static_cast<std::size_t>(k)];
        l1 += std::fabs(b);
        const double violation = (b == 0.0) ? std::max(0.0, std::fabs(g) - lambda)
                                            : std::fabs(g - lambda * (b > 0.0 ? 1.0 : -1.0));
        kkt = std::max(kkt, violation);
    }

    LassoFit fit;
    fit.alpha_hat = WalshCoeffs{panel.index_set, beta};
    fit.lambda = lambda;
    fit.n_eff = weights.n_eff;
    fit.objective = weighted_sse + lambda * l1;
    fit.iterations = sweep;
    fit.kkt_violation = kkt;
    fit.converged = (max_change < opts.tol) && (kkt <= opts.kkt_tol);
    return fit;
}

Eigen::MatrixXd weighted_gram(const ResidualPanel& panel, const LocalWeights& weights) {
    const int n = static_cast<int>(panel.y_resid.size());
    const int d = panel.index_set.size();
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);
    for (int j = 0; j < n; ++j) {
        const double w = weights.weights[static_cast<std::size_t>(j)];
        if (w == 0.0) continue;
        Eigen::Map<const Eigen::VectorXd> z(panel.z_resid[static_cast<std::size_t>(j)].data(), d);
        sigma.selfadjointView<Eigen::Lower>().rankUpdate(z, w);
    }
    sigma.triangularView<Eigen::StrictlyUpper>() = sigma.transpose();
    return sigma;
}

namespace {

// One linearized-ADMM run at fixed eta. Returns the iterate and whether the
// feasibility check passed.
struct AdmmResult {
    Eigen::VectorXd gamma;
    double gap = 0.0;
    bool feasible = false;
};

AdmmResult clime_admm(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& v, double eta,
                      const ClimeOptions& opts, const Eigen::VectorXd* warm_start) {
    const int d = static_cast<int>(v.size());
    const double rho = opts.admm_penalty;

    // Lipschitz constant of the linearized step: rho * lambda_max(Sigma)^2.
    double lmax = 0.0;
    {
        Eigen::VectorXd x = Eigen::VectorXd::Ones(d).normalized();
        for (int it = 0; it < 100; ++it) {
            Eigen::VectorXd y = sigma * x;
            const double norm = y.norm();
            if (norm <= 0.0) break;
            x = y / norm;
            lmax = norm;
        }
    }
    const double mu = std::max(1e-12, 1.05 * rho * lmax * lmax);

    Eigen::VectorXd gamma = warm_start ? *warm_start : Eigen::VectorXd::Zero(d);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(d);

    AdmmResult out;
    for (int it = 0; it < opts.max_iterations; ++it) {
        const Eigen::VectorXd sg = sigma * gamma;
        // gamma-step (linearized proximal update)
        const Eigen::VectorXd grad = sigma * (sg - z - v + u);
        Eigen::VectorXd gamma_next(d);
        for (int k = 0; k < d; ++k)
            gamma_next[k] = soft_threshold(gamma[k] - (rho / mu) * grad[k], 1.0 / mu);
        // z-step: projection onto the eta-box
        const Eigen::VectorXd sg_next = sigma * gamma_next;
        Eigen::VectorXd z_next = sg_next - v + u;
        for (int k = 0; k < d; ++k) z_next[k] = std::clamp(z_next[k], -eta, eta);
        // dual update
        const Eigen::VectorXd primal = sg_next - z_next - v;
        u += primal;

        const double primal_inf = primal.lpNorm<Eigen::Infinity>();
        const double change = (gamma_next - gamma).lpNorm<Eigen::Infinity>();
        gamma = gamma_next;
        z = z_next;
        if (primal_inf < opts.tol && change < opts.tol) break;
    }

    out.gamma = gamma;
    out.gap = (sigma * gamma - v).lpNorm<Eigen::Infinity>();
    out.feasible = out.gap <= eta + opts.feasibility_slack;
    return out;
}

} // namespace

DebiasDirection clime_direction(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& v, double eta,
                                const ClimeOptions& opts) {
    if (eta <= 0.0) throw std::invalid_argument("clime_direction: eta must be positive");
    if (sigma.rows() != sigma.cols() || sigma.rows() != v.size())
        throw std::invalid_argument("clime_direction: dimension mismatch");

    DebiasDirection dir;
    dir.eta = eta;
    const Eigen::VectorXd* warm = nullptr;
    Eigen::VectorXd last;
    for (int attempt = 0; attempt <= opts.max_inflations; ++attempt) {
        AdmmResult res = clime_admm(sigma, v, dir.eta, opts, warm);
        if (res.feasible) {
            dir.gamma_hat = res.gamma;
            dir.feasibility_gap = res.gap;
            return dir;
        }
        last = res.gamma;
        warm = &last;
        if (attempt < opts.max_inflations) {
            dir.eta *= 2.0;
            ++dir.eta_inflations;
        }
    }
    throw std::runtime_error("clime_direction: constraint infeasible after " +
                             std::to_string(opts.max_inflations) + " eta inflations (gap " +
                             std::to_string((sigma * last - v).lpNorm<Eigen::Infinity>()) + ", eta " +
                             std::to_string(dir.eta) + ")");
}

double plugin_contrast_T(const LassoFit& fit, const Slate& t, const Slate& t2) {
    const auto v = contrast_direction(t, t2, fit.alpha_hat.index_set);
    double acc = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) acc += fit.alpha_hat.values[k] * v[k];
    return acc;
}

std::pair<double, double> structural_contrasts(const LassoFit& fit_at_g, const LassoFit& fit_at_g2,
                                               const Slate& t, const Slate& t2) {
    if (!(fit_at_g.alpha_hat.index_set == fit_at_g2.alpha_hat.index_set))
        throw std::invalid_argument("structural_contrasts: index-set mismatch");
    const double f_g_t = evaluate_response(fit_at_g.alpha_hat, t);
    const double f_g2_t = evaluate_response(fit_at_g2.alpha_hat, t);
    const double f_g2_t2 = evaluate_response(fit_at_g2.alpha_hat, t2);
    return {f_g2_t - f_g_t, f_g2_t2 - f_g_t};
}

ContrastReport debiased_contrast(const LassoFit& fit, const DebiasDirection& dir,
                                 const ResidualPanel& panel, const LocalWeights& weights,
                                 const std::vector<double>& v, double nominal_level) {
    const int n = static_cast<int>(panel.y_resid.size());
    const int d = panel.index_set.size();
    if (static_cast<int>(v.size()) != d || dir.gamma_hat.size() != d)
        throw std::invalid_argument("debiased_contrast: dimension mismatch");
    if (nominal_level <= 0.0 || nominal_level >= 1.0)
        throw std::invalid_argument("debiased_contrast: nominal level in (0,1) required");

    double plugin = 0.0;
    for (int k = 0; k < d; ++k) plugin += v[static_cast<std::size_t>(k)] * fit.alpha_hat.values[static_cast<std::size_t>(k)];

    double correction = 0.0;
    double var_sum = 0.0;
    for (int j = 0; j < n; ++j) {
        const double w = weights.weights[static_cast<std::size_t>(j)];
        if (w == 0.0) continue;
        const auto& z = panel.z_resid[static_cast<std::size_t>(j)];
        double zb = 0.0, zg = 0.0;
        for (int k = 0; k < d; ++k) {
            zb += z[static_cast<std::size_t>(k)] * fit.alpha_hat.values[static_cast<std::size_t>(k)];
            zg += z[static_cast<std::size_t>(k)] * dir.gamma_hat[k];
        }
        const double eps = panel.y_resid[static_cast<std::size_t>(j)] - zb;
        correction += w * zg * eps;
        var_sum += w * w * zg * eps * zg * eps;
    }

    ContrastReport report;
    report.plugin_estimate = plugin;
    report.debiased_estimate = plugin + correction;
    report.variance = weights.n_eff * var_sum;
    report.nominal_level = nominal_level;
    report.n_eff = weights.n_eff;
    const double z = z_for_level(nominal_level);
    const double half_width = z * std::sqrt(report.variance / weights.n_eff);
    report.ci_low = report.debiased_estimate - half_width;
    report.ci_high = report.debiased_estimate + half_width;
    report.diagnostics.weight_fallback_used = weights.fallback_used;
    report.diagnostics.eta_inflations = dir.eta_inflations;
    report.diagnostics.lasso_converged = fit.converged;
    report.diagnostics.degenerate_variance =
        report.variance == 0.0 && dir.gamma_hat.lpNorm<Eigen::Infinity>() > 0.0;
    return report;
}

double hamming_bound(double lipschitz, const Slate& t, const Slate& t2) {
    if (lipschitz < 0.0) throw std::invalid_argument("hamming_bound: negative Lipschitz constant");
    return lipschitz * static_cast<double>(hamming_distance(t, t2));
}

ContrastReport run_pipeline(const Dataset& data, int target_unit, const Slate& t, const Slate& t2,
                            const PipelineConfig& config,
                            const std::vector<std::vector<double>>* distances,
                            const std::vector<std::vector<double>>* masked_distances) {
    data.validate();
    const int n = data.num_units();
    if (target_unit < 0 || target_unit >= n)
        throw PipelineError("validate", "target unit out of range");
    if (n < 2) throw PipelineError("validate", "cannot cross-fit a dataset with fewer than 2 units");
    if (t.dim() != t2.dim() || t.dim() != data.slates.front().dim())
        throw PipelineError("validate", "contrast slates must match the dataset dimension");

    // Step 1: localization weights and effective sample size.
    LocalWeights weights;
    try {
        if (config.uniform_weights) {
            weights.weights.assign(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
            weights.n_eff = static_cast<double>(n);
            weights.support_count = n;
            weights.bandwidth_used = 0.0;
        } else if (distances) {
            weights = kernel_weights_from_distances((*distances)[static_cast<std::size_t>(target_unit)],
                                                    config.kernel, config.b_graph);
        } else {
            weights = kernel_weights(data.configs, data.configs[static_cast<std::size_t>(target_unit)],
                                     config.kernel, config.b_graph, config.radius, config.discrepancy);
        }
    } catch (const std::exception& e) {
        throw PipelineError("weights", e.what());
    }

    // Step 2: cross-fitted residuals.
    ResidualPanel panel;
    WalshIndexSet index_set = WalshIndexSet::build(t.dim(), std::min(config.order_cap, t.dim()));
    try {
        const FoldAssignment folds = make_folds(n, config.num_folds, config.seed);
        CrossfitOptions cf;
        cf.nuisance.b_config = config.b_config;
        cf.nuisance.b_cov = config.b_cov;
        cf.nuisance.covariates_only = config.covariates_only_nuisance;
        cf.nuisance.tree_projected = config.nuisance_tree_projection;
        cf.nuisance.discrepancy = config.discrepancy;
        cf.ego_separated = config.ego_separated_folds;
        cf.masked_distances = masked_distances;
        panel = crossfit_residuals(data, folds, index_set, cf);
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError("crossfit", e.what());
    }

    // Steps 3-4: penalty scale and weighted Lasso.
    LassoFit fit;
    try {
        const LambdaChoice lam = select_lambda(panel, weights, config.c_lambda);
        fit = weighted_lasso(panel, weights, lam.lambda, config.lasso);
        fit.sigma_hat = lam.sigma_hat;
    } catch (const std::exception& e) {
        throw PipelineError("lasso", e.what());
    }

    // Steps 5-6: Gram, inverse direction, debiased estimate.
    try {
        const Eigen::MatrixXd sigma = weighted_gram(panel, weights);
        const auto v = contrast_direction(t, t2, index_set);
        Eigen::Map<const Eigen::VectorXd> v_map(v.data(), static_cast<int>(v.size()));
        const double eta0 =
            config.c_eta * std::sqrt(std::log(static_cast<double>(index_set.size())) / weights.n_eff);
        ClimeOptions clime = config.clime;
        const DebiasDirection dir = clime_direction(sigma, v_map, eta0, clime);
        return debiased_contrast(fit, dir, panel, weights, v, config.nominal_level);
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError("debias", e.what());
    }
}

} // namespace netslate
