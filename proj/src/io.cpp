#include "netslate/io.hpp"

#include <fstream>
#include <stdexcept>

namespace netslate {

json profile_to_json(const DgpProfile& p) {
    return json{{"name", p.name},
                {"N", p.num_units},
                {"p", p.slate_dim},
                {"avg_degree", p.avg_degree},
                {"s_active", p.s_active},
                {"noise_sd", p.noise_sd},
                {"interference_strength", p.interference_strength},
                {"R", p.radius},
                {"true_contrast", p.true_contrast},
                {"seed", p.seed},
                {"mark_coords", p.mark_coords},
                {"assignment_correlation", p.assignment_correlation},
                {"modulate_intercept_only", p.modulate_intercept_only},
                {"active_singletons_only", p.active_singletons_only}};
}

DgpProfile profile_from_json(const json& j) {
    DgpProfile p;
    if (j.contains("name")) {
        const std::string name = j.at("name").get<std::string>();
        if (name == "fig2") p = fig2_profile(p.num_units, p.seed);
        else if (name == "appendixA") p = appendix_a_profile(p.num_units, p.seed);
        p.name = name;
    }
    if (j.contains("N")) p.num_units = j.at("N").get<int>();
    if (j.contains("p")) p.slate_dim = j.at("p").get<int>();
    if (j.contains("avg_degree")) p.avg_degree = j.at("avg_degree").get<double>();
    if (j.contains("s_active")) p.s_active = j.at("s_active").get<int>();
    if (j.contains("noise_sd")) p.noise_sd = j.at("noise_sd").get<double>();
    if (j.contains("interference_strength"))
        p.interference_strength = j.at("interference_strength").get<double>();
    if (j.contains("R")) p.radius = j.at("R").get<int>();
    if (j.contains("true_contrast")) p.true_contrast = j.at("true_contrast").get<double>();
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("mark_coords")) p.mark_coords = j.at("mark_coords").get<std::vector<int>>();
    if (j.contains("assignment_correlation"))
        p.assignment_correlation = j.at("assignment_correlation").get<double>();
    if (j.contains("modulate_intercept_only"))
        p.modulate_intercept_only = j.at("modulate_intercept_only").get<bool>();
    if (j.contains("active_singletons_only"))
        p.active_singletons_only = j.at("active_singletons_only").get<bool>();
    p.validate();
    return p;
}

json dataset_bundle_to_json(const Dataset& data, const GroundTruth& truth) {
    json edges = json::array();
    for (const auto& [u, v] : data.graph.edges()) edges.push_back(json::array({u, v}));

    json slates = json::array();
    for (const auto& s : data.slates) {
        json row = json::array();
        for (auto b : s.bits) row.push_back(static_cast<int>(b));
        slates.push_back(std::move(row));
    }

    json alphas = json::array();
    for (const auto& a : truth.alpha_of_unit) alphas.push_back(a.values);

    return json{{"profile", profile_to_json(truth.dgp)},
                {"graph", json{{"n", data.graph.num_nodes()}, {"edges", std::move(edges)}}},
                {"X", data.covariates},
                {"T", std::move(slates)},
                {"Y", data.outcomes},
                {"truth", json{{"index_set",
                                json{{"p", truth.alpha_of_unit.empty()
                                               ? truth.dgp.slate_dim
                                               : truth.alpha_of_unit.front().index_set.p},
                                     {"order_cap", truth.alpha_of_unit.empty()
                                                       ? 0
                                                       : truth.alpha_of_unit.front().index_set.order_cap}}},
                               {"alpha", std::move(alphas)},
                               {"noiseless", truth.noiseless_outcomes},
                               {"rho", truth.rho}}}};
}

std::pair<Dataset, GroundTruth> dataset_bundle_from_json(const json& j) {
    GroundTruth truth;
    truth.dgp = profile_from_json(j.at("profile"));

    const auto& jg = j.at("graph");
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : jg.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    Graph graph(jg.at("n").get<int>(), std::move(edges));

    Dataset data;
    data.covariates = j.at("X").get<std::vector<std::vector<double>>>();
    for (const auto& row : j.at("T")) {
        std::vector<std::int8_t> bits;
        for (const auto& b : row) bits.push_back(static_cast<std::int8_t>(b.get<int>()));
        data.slates.push_back(Slate(std::move(bits)));
    }
    data.outcomes = j.at("Y").get<std::vector<double>>();
    data.graph = std::move(graph);
    for (int i = 0; i < data.graph.num_nodes(); ++i)
        data.configs.push_back(
            extract_config(data.graph, data.slates, i, truth.dgp.radius, truth.dgp.mark_coords));
    data.validate();

    const auto& jt = j.at("truth");
    const WalshIndexSet set = WalshIndexSet::build(jt.at("index_set").at("p").get<int>(),
                                                   jt.at("index_set").at("order_cap").get<int>());
    for (const auto& values : jt.at("alpha"))
        truth.alpha_of_unit.push_back(WalshCoeffs{set, values.get<std::vector<double>>()});
    truth.noiseless_outcomes = jt.at("noiseless").get<std::vector<double>>();
    if (jt.contains("rho")) truth.rho = jt.at("rho").get<std::vector<double>>();
    return {std::move(data), std::move(truth)};
}

json config_to_json(const RootedConfig& config) {
    json vertices = json::array();
    for (int v = 0; v < config.size(); ++v) {
        json mark = json::array();
        for (auto b : config.marks[static_cast<std::size_t>(v)].bits) mark.push_back(static_cast<int>(b));
        json item{{"id", v}, {"depth", config.depth[static_cast<std::size_t>(v)]}, {"mark", std::move(mark)}};
        if (config.has_covariate_marks())
            item["covariate_mark"] = config.covariate_marks[static_cast<std::size_t>(v)];
        vertices.push_back(std::move(item));
    }
    json edges = json::array();
    for (const auto& [u, v] : config.edges) edges.push_back(json::array({u, v}));
    return json{{"radius", config.radius}, {"vertices", std::move(vertices)}, {"edges", std::move(edges)}};
}

RootedConfig config_from_json(const json& j) {
    RootedConfig config;
    config.radius = j.at("radius").get<int>();
    for (const auto& v : j.at("vertices")) {
        config.depth.push_back(v.at("depth").get<int>());
        std::vector<std::int8_t> bits;
        for (const auto& b : v.at("mark")) bits.push_back(static_cast<std::int8_t>(b.get<int>()));
        config.marks.push_back(Slate(std::move(bits)));
        if (v.contains("covariate_mark")) config.covariate_marks.push_back(v.at("covariate_mark").get<int>());
    }
    for (const auto& e : j.at("edges")) config.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    config.validate();
    return config;
}

json coeffs_to_json(const WalshCoeffs& coeffs) {
    return json{{"p", coeffs.index_set.p}, {"order_cap", coeffs.index_set.order_cap}, {"values", coeffs.values}};
}

WalshCoeffs coeffs_from_json(const json& j) {
    const WalshIndexSet set = WalshIndexSet::build(j.at("p").get<int>(), j.at("order_cap").get<int>());
    WalshCoeffs coeffs{set, j.at("values").get<std::vector<double>>()};
    if (static_cast<int>(coeffs.values.size()) != set.size())
        throw std::runtime_error("coeffs_from_json: value count does not match the index set");
    return coeffs;
}

json report_to_json(const ContrastReport& report) {
    return json{{"plugin_estimate", report.plugin_estimate},
                {"debiased_estimate", report.debiased_estimate},
                {"variance", report.variance},
                {"ci_low", report.ci_low},
                {"ci_high", report.ci_high},
                {"nominal_level", report.nominal_level},
                {"n_eff", report.n_eff},
                {"diagnostics", json{{"weight_fallback_used", report.diagnostics.weight_fallback_used},
                                     {"eta_inflations", report.diagnostics.eta_inflations},
                                     {"lasso_converged", report.diagnostics.lasso_converged},
                                     {"degenerate_variance", report.diagnostics.degenerate_variance}}}};
}

PipelineConfig pipeline_from_json(const json& j, PipelineConfig c) {
    if (j.contains("R")) c.radius = j.at("R").get<int>();
    if (j.contains("kernel")) {
        const std::string k = j.at("kernel").get<std::string>();
        if (k == "indicator") c.kernel = Kernel::Indicator;
        else if (k == "epanechnikov") c.kernel = Kernel::Epanechnikov;
        else throw std::runtime_error("pipeline_from_json: unknown kernel " + k);
    }
    if (j.contains("b_G")) c.b_graph = j.at("b_G").get<double>();
    if (j.contains("K_cf")) c.num_folds = j.at("K_cf").get<int>();
    if (j.contains("c_lambda")) c.c_lambda = j.at("c_lambda").get<double>();
    if (j.contains("c_eta")) c.c_eta = j.at("c_eta").get<double>();
    if (j.contains("order_cap")) c.order_cap = j.at("order_cap").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("b_mu")) c.b_config = j.at("b_mu").get<double>();
    if (j.contains("b_x")) c.b_cov = j.at("b_x").get<double>();
    if (j.contains("nominal_level")) c.nominal_level = j.at("nominal_level").get<double>();
    if (j.contains("uniform_weights")) c.uniform_weights = j.at("uniform_weights").get<bool>();
    if (j.contains("covariates_only_nuisance"))
        c.covariates_only_nuisance = j.at("covariates_only_nuisance").get<bool>();
    if (j.contains("nuisance_tree_projection"))
        c.nuisance_tree_projection = j.at("nuisance_tree_projection").get<bool>();
    if (j.contains("ego_separated_folds")) c.ego_separated_folds = j.at("ego_separated_folds").get<bool>();
    if (j.contains("lasso_tol")) c.lasso.tol = j.at("lasso_tol").get<double>();
    if (j.contains("lasso_max_sweeps")) c.lasso.max_sweeps = j.at("lasso_max_sweeps").get<int>();
    if (j.contains("kkt_tol")) c.lasso.kkt_tol = j.at("kkt_tol").get<double>();
    if (j.contains("admm_penalty")) c.clime.admm_penalty = j.at("admm_penalty").get<double>();
    if (j.contains("admm_tol")) c.clime.tol = j.at("admm_tol").get<double>();
    if (j.contains("admm_max_iterations")) c.clime.max_iterations = j.at("admm_max_iterations").get<int>();
    if (j.contains("max_inflations")) c.clime.max_inflations = j.at("max_inflations").get<int>();
    if (j.contains("max_ball_size")) c.discrepancy.max_ball_size = j.at("max_ball_size").get<int>();
    return c;
}

json pipeline_to_json(const PipelineConfig& c) {
    return json{{"R", c.radius},
                {"kernel", c.kernel == Kernel::Indicator ? "indicator" : "epanechnikov"},
                {"b_G", c.b_graph},
                {"K_cf", c.num_folds},
                {"c_lambda", c.c_lambda},
                {"c_eta", c.c_eta},
                {"order_cap", c.order_cap},
                {"seed", c.seed},
                {"b_mu", c.b_config},
                {"b_x", c.b_cov},
                {"nominal_level", c.nominal_level},
                {"uniform_weights", c.uniform_weights},
                {"covariates_only_nuisance", c.covariates_only_nuisance},
                {"nuisance_tree_projection", c.nuisance_tree_projection},
                {"ego_separated_folds", c.ego_separated_folds},
                {"lasso_tol", c.lasso.tol},
                {"lasso_max_sweeps", c.lasso.max_sweeps},
                {"kkt_tol", c.lasso.kkt_tol},
                {"admm_penalty", c.clime.admm_penalty},
                {"admm_tol", c.clime.tol},
                {"admm_max_iterations", c.clime.max_iterations},
                {"max_inflations", c.clime.max_inflations},
                {"max_ball_size", c.discrepancy.max_ball_size}};
}

json results_to_json(const std::vector<McResult>& results) {
    json arr = json::array();
    for (const auto& r : results) {
        arr.push_back(json{{"estimator", estimator_name(r.estimator)},
                           {"N", r.num_units},
                           {"rep", r.rep},
                           {"seed", r.seed},
                           {"estimate", r.ok ? json(r.estimate) : json()},
                           {"ci_low", r.ok ? json(r.ci_low) : json()},
                           {"ci_high", r.ok ? json(r.ci_high) : json()},
                           {"truth", r.truth},
                           {"covered", r.covered},
                           {"runtime_ms", r.runtime_ms},
                           {"ok", r.ok},
                           {"error", r.error}});
    }
    return arr;
}

json summaries_to_json(const std::vector<McSummary>& summaries) {
    json arr = json::array();
    for (const auto& s : summaries) {
        arr.push_back(json{{"estimator", estimator_name(s.estimator)},
                           {"N", s.num_units},
                           {"reps", s.reps},
                           {"mean_bias", s.mean_bias},
                           {"median_bias", s.median_bias},
                           {"sd", s.sd},
                           {"ci95_width", s.ci95_width},
                           {"mean_interval_width", s.mean_interval_width},
                           {"coverage", s.coverage}});
    }
    return arr;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    in >> j;
    return j;
}

void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

} // namespace netslate
