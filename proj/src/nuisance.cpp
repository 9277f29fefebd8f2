#include "netslate/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "netslate/rng.hpp"
#include "netslate/stats.hpp"

namespace netslate {

FoldAssignment make_folds(int num_units, int num_folds, std::uint64_t seed) {
    if (num_folds < 2 || num_folds > num_units)
        throw std::invalid_argument("make_folds: need 2 <= K_cf <= N");
    std::vector<int> order(static_cast<std::size_t>(num_units));
    for (int i = 0; i < num_units; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    rng.shuffle(order);
    FoldAssignment folds;
    folds.num_folds = num_folds;
    folds.fold_of.assign(static_cast<std::size_t>(num_units), 0);
    for (int pos = 0; pos < num_units; ++pos)
        folds.fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos % num_folds;
    return folds;
}

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double median_pairwise_distance(const Dataset& data, const std::vector<int>& units) {
    std::vector<double> d;
    d.reserve(units.size() * (units.size() - 1) / 2);
    for (std::size_t a = 0; a < units.size(); ++a)
        for (std::size_t b = a + 1; b < units.size(); ++b)
            d.push_back(euclidean(data.covariates[static_cast<std::size_t>(units[a])],
                                  data.covariates[static_cast<std::size_t>(units[b])]));
    if (d.empty()) return 1.0;
    std::vector<double> w(d.size(), 1.0);
    const double med = weighted_median(d, w);
    return med > 0.0 ? med : 1.0;
}

} // namespace

NuisanceModel::NuisanceModel(const Dataset& data, std::vector<int> train_units,
                             const WalshIndexSet& index_set, const NuisanceOptions& opts,
                             const std::vector<std::vector<double>>* masked_distances)
    : data_(&data),
      train_units_(std::move(train_units)),
      index_set_(index_set),
      opts_(opts),
      masked_distances_(masked_distances) {
    if (train_units_.empty()) throw std::invalid_argument("NuisanceModel: empty training set");

    b_cov_ = opts_.b_cov > 0.0 ? opts_.b_cov : median_pairwise_distance(data, train_units_);

    train_features_.reserve(train_units_.size());
    mean_features_.assign(static_cast<std::size_t>(index_set_.size()), 0.0);
    const bool need_configs = !opts_.covariates_only && masked_distances_ == nullptr;
    for (int j : train_units_) {
        if (need_configs) {
            RootedConfig masked = mask_root_mark(data.configs[static_cast<std::size_t>(j)]);
            if (opts_.tree_projected) masked = tree_projection(masked);
            masked_train_.push_back(std::move(masked));
            masked_train_keys_.push_back(masked_train_.back().canonical_key());
        }
        train_features_.push_back(walsh_features(data.slates[static_cast<std::size_t>(j)], index_set_));
        mean_outcome_ += data.outcomes[static_cast<std::size_t>(j)];
        for (std::size_t k = 0; k < mean_features_.size(); ++k)
            mean_features_[k] += train_features_.back()[k];
    }
    const double n = static_cast<double>(train_units_.size());
    mean_outcome_ /= n;
    for (double& v : mean_features_) v /= n;

    b_config_ = opts_.b_config;
    if (b_config_ <= 0.0 && !opts_.covariates_only) {
        // Adaptive bandwidth: smallest grid value whose windows hold enough
        // kernel mass on average, so sparse neighborhoods widen automatically.
        static const double grid[] = {0.05, 0.08, 0.12, 0.2, 0.35, 0.6};
        const std::size_t m = train_units_.size();
        const std::size_t sample = std::min<std::size_t>(m, 64);
        const std::size_t stride = std::max<std::size_t>(1, m / sample);
        b_config_ = grid[sizeof(grid) / sizeof(grid[0]) - 1];
        for (double b : grid) {
            std::vector<double> masses;
            for (std::size_t a = 0; a < m; a += stride) {
                double mass = 0.0;
                for (std::size_t o = 0; o < m; ++o) {
                    if (o == a) continue;
                    mass += kernel_value(opts_.kernel, masked_distance(a, o) / b);
                }
                masses.push_back(mass);
            }
            std::vector<double> ones(masses.size(), 1.0);
            if (!masses.empty() && weighted_median(masses, ones) >= opts_.adaptive_target) {
                b_config_ = b;
                break;
            }
        }
    }
}

// distance between two training units over root-masked configs
double NuisanceModel::masked_distance(std::size_t train_pos, int other_pos) const {
    if (masked_distances_)
        return (*masked_distances_)[static_cast<std::size_t>(train_units_[train_pos])]
                                   [static_cast<std::size_t>(train_units_[static_cast<std::size_t>(other_pos)])];
    const std::string& ka = masked_train_keys_[train_pos];
    const std::string& kb = masked_train_keys_[static_cast<std::size_t>(other_pos)];
    const std::string pair_key = ka <= kb ? ka + "|" + kb : kb + "|" + ka;
    auto it = distance_cache_.find(pair_key);
    if (it != distance_cache_.end()) return it->second;
    const double d = config_distance(masked_train_[train_pos], masked_train_[static_cast<std::size_t>(other_pos)],
                                     masked_train_[train_pos].radius, opts_.discrepancy);
    distance_cache_.emplace(pair_key, d);
    return d;
}

std::vector<double> NuisanceModel::smoothing_weights(const RootedConfig* config, int query_unit,
                                                     const std::vector<double>& x) const {
    std::optional<RootedConfig> masked;
    std::string query_key;
    if (!opts_.covariates_only && masked_distances_ == nullptr) {
        masked = mask_root_mark(*config);
        if (opts_.tree_projected) masked = tree_projection(*masked);
        query_key = masked->canonical_key();
    }

    std::vector<double> w(train_units_.size(), 0.0);
    double total = 0.0;
    for (std::size_t a = 0; a < train_units_.size(); ++a) {
        double k_cfg = 1.0;
        if (!opts_.covariates_only) {
            double d_cfg;
            if (masked_distances_) {
                d_cfg = (*masked_distances_)[static_cast<std::size_t>(train_units_[a])]
                                            [static_cast<std::size_t>(query_unit)];
            } else {
                const std::string& tk = masked_train_keys_[a];
                const std::string pair_key = query_key <= tk ? query_key + "|" + tk : tk + "|" + query_key;
                auto it = distance_cache_.find(pair_key);
                if (it != distance_cache_.end()) {
                    d_cfg = it->second;
                } else {
                    d_cfg = config_distance(masked_train_[a], *masked, masked->radius, opts_.discrepancy);
                    distance_cache_.emplace(pair_key, d_cfg);
                }
            }
            k_cfg = kernel_value(opts_.kernel, d_cfg / b_config_);
        }
        const double d_cov = euclidean(data_->covariates[static_cast<std::size_t>(train_units_[a])], x);
        const double k_cov = kernel_value(opts_.kernel, d_cov / b_cov_);
        w[a] = k_cfg * k_cov;
        total += w[a];
    }
    if (total <= 0.0) return {};   // caller falls back to the training mean
    for (double& v : w) v /= total;
    return w;
}

NuisancePrediction NuisanceModel::predict_from_weights(const std::vector<double>& w) const {
    NuisancePrediction out;
    if (w.empty()) {
        out.mu = mean_outcome_;
        out.m = mean_features_;
    } else {
        out.m.assign(static_cast<std::size_t>(index_set_.size()), 0.0);
        for (std::size_t a = 0; a < w.size(); ++a) {
            if (w[a] == 0.0) continue;
            out.mu += w[a] * data_->outcomes[static_cast<std::size_t>(train_units_[a])];
            for (std::size_t k = 0; k < out.m.size(); ++k) out.m[k] += w[a] * train_features_[a][k];
        }
    }
    for (double& v : out.m) v = std::clamp(v, -1.0, 1.0);
    return out;
}

NuisancePrediction NuisanceModel::predict(const RootedConfig& config, const std::vector<double>& x) const {
    if (masked_distances_ != nullptr && !opts_.covariates_only)
        throw std::invalid_argument("NuisanceModel: config queries need a model built without a distance matrix");
    return predict_from_weights(smoothing_weights(&config, -1, x));
}

NuisancePrediction NuisanceModel::predict_unit(int unit) const {
    const auto& x = data_->covariates[static_cast<std::size_t>(unit)];
    if (masked_distances_ != nullptr || opts_.covariates_only)
        return predict_from_weights(smoothing_weights(nullptr, unit, x));
    return predict(data_->configs[static_cast<std::size_t>(unit)], x);
}

namespace {

// Units within graph distance `hops` of any unit in `fold_units`.
std::vector<bool> neighborhood_mask(const Graph& graph, const std::vector<int>& fold_units, int hops) {
    std::vector<int> dist(static_cast<std::size_t>(graph.num_nodes()), -1);
    std::deque<int> queue;
    for (int u : fold_units) {
        dist[static_cast<std::size_t>(u)] = 0;
        queue.push_back(u);
    }
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        if (dist[static_cast<std::size_t>(u)] == hops) continue;
        for (int w : graph.neighbors(u)) {
            if (dist[static_cast<std::size_t>(w)] < 0) {
                dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
                queue.push_back(w);
            }
        }
    }
    std::vector<bool> mask(static_cast<std::size_t>(graph.num_nodes()), false);
    for (int u = 0; u < graph.num_nodes(); ++u)
        mask[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(u)] >= 0;
    return mask;
}

} // namespace

ResidualPanel crossfit_residuals(const Dataset& data, const FoldAssignment& folds,
                                 const WalshIndexSet& index_set, const CrossfitOptions& opts) {
    data.validate();
    const int n = data.num_units();
    if (static_cast<int>(folds.fold_of.size()) != n)
        throw std::invalid_argument("crossfit_residuals: folds do not cover the dataset");

    ResidualPanel panel;
    panel.index_set = index_set;
    panel.folds = folds;
    panel.y_resid.assign(static_cast<std::size_t>(n), 0.0);
    panel.z_resid.assign(static_cast<std::size_t>(n), {});

    const auto members = folds.members();
    for (int k = 0; k < folds.num_folds; ++k) {
        const auto& fold_units = members[static_cast<std::size_t>(k)];
        if (fold_units.empty()) throw std::invalid_argument("crossfit_residuals: empty fold");

        std::vector<bool> excluded(static_cast<std::size_t>(n), false);
        for (int u : fold_units) excluded[static_cast<std::size_t>(u)] = true;
        if (opts.ego_separated) {
            const int hops = 2 * (data.configs.empty() ? 0 : data.configs.front().radius);
            const auto near = neighborhood_mask(data.graph, fold_units, hops);
            for (int u = 0; u < n; ++u)
                if (near[static_cast<std::size_t>(u)]) excluded[static_cast<std::size_t>(u)] = true;
        }
        std::vector<int> train;
        for (int u = 0; u < n; ++u)
            if (!excluded[static_cast<std::size_t>(u)]) train.push_back(u);
        if (train.empty())
            throw std::runtime_error("crossfit_residuals: ego separation removed every training unit");

        NuisanceModel model(data, train, index_set, opts.nuisance, opts.masked_distances);
        for (int u : fold_units) {
            const NuisancePrediction pred = model.predict_unit(u);
            panel.y_resid[static_cast<std::size_t>(u)] =
                data.outcomes[static_cast<std::size_t>(u)] - pred.mu;
            auto z = walsh_features(data.slates[static_cast<std::size_t>(u)], index_set);
            for (std::size_t c = 0; c < z.size(); ++c) z[c] -= pred.m[c];
            panel.z_resid[static_cast<std::size_t>(u)] = std::move(z);
        }
    }
    return panel;
}

void panel_to_csv(std::ostream& os, const ResidualPanel& panel) {
    os << "unit,fold,y_resid";
    for (int k = 0; k < panel.index_set.size(); ++k) os << ",z" << k;
    os << '\n';
    for (std::size_t u = 0; u < panel.y_resid.size(); ++u) {
        os << u << ',' << panel.folds.fold_of[u] << ',' << panel.y_resid[u];
        for (double z : panel.z_resid[u]) os << ',' << z;
        os << '\n';
    }
}

} // namespace netslate
