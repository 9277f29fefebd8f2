#pragma once
// Cross-fitted Nadaraya-Watson nuisance estimation of mu(g, x) = E[Y | G, X]
// and m(g, x) = E[Z(T) | G, X], and the residualized outcome/feature panel.
//
// The product kernel smooths over configuration distance and covariate
// distance. Configuration distances are taken on root-mark-masked configs so
// a unit's own treatment never informs the prediction of its own features.

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "netslate/dataset.hpp"
#include "netslate/localize.hpp"
#include "netslate/walsh.hpp"

namespace netslate {

struct NuisanceOptions {
    double b_config = 0.25;      // bandwidth over masked-config distance; <= 0 means adaptive
    double b_cov = 0.0;          // covariate bandwidth; <= 0 means median pairwise heuristic
    Kernel kernel = Kernel::Epanechnikov;
    bool covariates_only = false;   // graph-agnostic mode: ignore configuration distance
    bool tree_projected = false;    // smooth over BFS-tree projections of the configs
    double adaptive_target = 8.0;   // desired mean effective local count for adaptive b_config
    DiscrepancyOptions discrepancy;
};

struct NuisancePrediction {
    double mu = 0.0;
    std::vector<double> m;   // clipped coordinatewise to [-1, 1]
};

// Immutable predictor fit on a training subset. `masked_distances`, when
// provided, is the full N x N distance matrix over root-masked configs,
// indexed by original unit ids; it removes all per-query distance work.
class NuisanceModel {
public:
    NuisanceModel(const Dataset& data, std::vector<int> train_units, const WalshIndexSet& index_set,
                  const NuisanceOptions& opts,
                  const std::vector<std::vector<double>>* masked_distances = nullptr);

    NuisancePrediction predict(const RootedConfig& config, const std::vector<double>& x) const;
    NuisancePrediction predict_unit(int unit) const;

    double predict_outcome(const RootedConfig& config, const std::vector<double>& x) const {
        return predict(config, x).mu;
    }
    std::vector<double> predict_features(const RootedConfig& config, const std::vector<double>& x) const {
        return predict(config, x).m;
    }

    double covariate_bandwidth() const { return b_cov_; }
    double config_bandwidth() const { return b_config_; }

private:
    // smoothing weights against the training units; empty means "fall back
    // to the training mean"
    std::vector<double> smoothing_weights(const RootedConfig* config, int query_unit,
                                          const std::vector<double>& x) const;
    NuisancePrediction predict_from_weights(const std::vector<double>& w) const;

    double masked_distance(std::size_t train_pos, int other_pos) const;

    const Dataset* data_;
    std::vector<int> train_units_;
    WalshIndexSet index_set_;
    NuisanceOptions opts_;
    double b_cov_;
    double b_config_ = 0.0;
    const std::vector<std::vector<double>>* masked_distances_;
    std::vector<RootedConfig> masked_train_;
    std::vector<std::string> masked_train_keys_;
    std::vector<std::vector<double>> train_features_;
    double mean_outcome_ = 0.0;
    std::vector<double> mean_features_;
    // masked configs repeat heavily under projected marks; cache d_R by key pair
    mutable std::unordered_map<std::string, double> distance_cache_;
};

struct ResidualPanel {
    std::vector<double> y_resid;                    // per-unit outcome residual
    std::vector<std::vector<double>> z_resid;       // per-unit feature residual, entries in [-2, 2]
    WalshIndexSet index_set;
    FoldAssignment folds;
};

struct CrossfitOptions {
    NuisanceOptions nuisance;
    bool ego_separated = false;   // drop training units within graph distance 2R of the query fold
    const std::vector<std::vector<double>>* masked_distances = nullptr;
};

// Residuals for each unit come from the model trained on the complement of
// its fold.
ResidualPanel crossfit_residuals(const Dataset& data, const FoldAssignment& folds,
                                 const WalshIndexSet& index_set, const CrossfitOptions& opts);

void panel_to_csv(std::ostream& os, const ResidualPanel& panel);

} // namespace netslate
