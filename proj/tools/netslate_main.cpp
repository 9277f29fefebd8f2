// netslate command line: simulate synthetic datasets, run the localized
// debiased estimator on a dataset file, compute configuration distances, and
// drive Monte Carlo sweeps.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "netslate/harness.hpp"
#include "netslate/io.hpp"

using namespace netslate;

namespace {

DgpProfile profile_from_flags(const std::string& name, int n, std::uint64_t seed, const json& overrides) {
    DgpProfile p;
    if (name == "fig2") p = fig2_profile(n, seed);
    else if (name == "appendixA") p = appendix_a_profile(n, seed);
    else if (name == "custom") { p.num_units = n; p.seed = seed; }
    else throw CLI::ValidationError("--profile", "unknown profile " + name);
    p = profile_from_json(overrides.is_null() ? profile_to_json(p) : overrides);
    p.num_units = n;
    p.seed = seed;
    return p;
}

std::vector<int> parse_sizes(const std::string& csv) {
    std::vector<int> sizes;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) sizes.push_back(std::stoi(tok));
    return sizes;
}

int default_target(const Dataset& data) {
    for (int i = 0; i < data.num_units(); ++i)
        if (data.graph.degree(i) >= 1) return i;
    return 0;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << body;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"individualized causal contrasts under network interference"};
    app.require_subcommand(1);

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "generate a dataset bundle with ground truth");
    std::string sim_profile = "fig2", sim_out = "dataset.json", sim_config;
    int sim_n = 500;
    std::uint64_t sim_seed = 1;
    double sim_noise = -1.0, sim_interference = -1.0;
    sim->add_option("--profile", sim_profile, "fig2 | appendixA | custom");
    sim->add_option("--n", sim_n, "number of units");
    sim->add_option("--seed", sim_seed, "generator seed");
    sim->add_option("--noise-sd", sim_noise, "override noise sd");
    sim->add_option("--interference", sim_interference, "override interference strength");
    sim->add_option("--profile-json", sim_config, "JSON file with full profile keys");
    sim->add_option("--out", sim_out, "output bundle path");

    // ---- estimate ----
    auto* est = app.add_subcommand("estimate", "run the localized debiased estimator on a bundle");
    std::string est_data, est_config, est_dump_weights, est_dump_residuals;
    int est_unit = -1, est_flip = 1;
    std::uint64_t est_seed = 1;
    bool est_uniform = false, est_cov_only = false;
    double est_bg = -1.0, est_clambda = -1.0, est_ceta = -1.0, est_bmu = -1.0, est_bx = -1.0;
    int est_cap = -1, est_kcf = -1;
    est->add_option("data", est_data, "dataset bundle JSON")->required();
    est->add_option("--unit", est_unit, "target unit (default: lowest-index unit with degree >= 1)");
    est->add_option("--flip", est_flip,
                    "contrast coordinate K (1-based): toggle it from -1 to +1, others at observed values");
    est->add_option("--config", est_config, "pipeline config JSON file");
    est->add_option("--seed", est_seed, "fold seed");
    est->add_option("--b-g", est_bg, "localization bandwidth");
    est->add_option("--c-lambda", est_clambda, "lasso penalty constant");
    est->add_option("--c-eta", est_ceta, "inverse-direction slack constant");
    est->add_option("--b-mu", est_bmu, "nuisance config bandwidth");
    est->add_option("--b-x", est_bx, "nuisance covariate bandwidth (0 = median heuristic)");
    est->add_option("--order-cap", est_cap, "Walsh interaction-order cap");
    est->add_option("--kcf", est_kcf, "number of cross-fitting folds");
    est->add_flag("--uniform-weights", est_uniform, "disable localization");
    est->add_flag("--covariates-only", est_cov_only, "graph-agnostic nuisances");
    est->add_option("--dump-weights", est_dump_weights, "write weight diagnostics CSV");
    est->add_option("--dump-residuals", est_dump_residuals, "write residual panel CSV");

    // ---- distance ----
    auto* dist = app.add_subcommand("distance", "rooted-graph distance between two config dumps");
    std::string dist_a, dist_b;
    int dist_radius = -1;
    dist->add_option("a", dist_a, "first config JSON")->required();
    dist->add_option("b", dist_b, "second config JSON")->required();
    dist->add_option("--radius", dist_radius, "truncation radius (default: min of the two configs)");

    // ---- montecarlo ----
    auto* mc = app.add_subcommand("montecarlo", "Monte Carlo sweep over sample sizes");
    std::string mc_profile = "fig2", mc_sizes = "50,100,200,500,1000", mc_estimators = "proposed",
                mc_prefix = "mc", mc_config;
    int mc_reps = 100, mc_workers = 1, mc_unit = -1;
    std::uint64_t mc_seed = 20240501;
    bool mc_stable = false;
    mc->add_option("--profile", mc_profile, "fig2 | appendixA");
    mc->add_option("--sizes", mc_sizes, "comma-separated sample sizes");
    mc->add_option("--reps", mc_reps, "repetitions per size");
    mc->add_option("--estimators", mc_estimators, "comma list of proposed,oracle,baseline");
    mc->add_option("--seed", mc_seed, "base seed");
    mc->add_option("--workers", mc_workers, "worker threads");
    mc->add_option("--unit", mc_unit, "fixed target unit (default rule otherwise)");
    mc->add_option("--config", mc_config, "pipeline config JSON file");
    mc->add_flag("--stable-runtime", mc_stable, "zero the runtime_ms column for byte-stable output");
    mc->add_option("--out-prefix", mc_prefix, "output path prefix");

    // ---- summarize ----
    auto* sum = app.add_subcommand("summarize", "aggregate a results CSV");
    std::string sum_in, sum_out;
    sum->add_option("results", sum_in, "results CSV path")->required();
    sum->add_option("--out", sum_out, "summary CSV path (stdout otherwise)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 1;
    }

    try {
        if (sim->parsed()) {
            json overrides;
            if (!sim_config.empty()) overrides = load_json_file(sim_config);
            DgpProfile profile = profile_from_flags(sim_profile, sim_n, sim_seed, overrides);
            if (sim_noise >= 0.0) profile.noise_sd = sim_noise;
            if (sim_interference >= 0.0) profile.interference_strength = sim_interference;
            auto [data, truth] = generate_dataset(profile);
            save_json_file(sim_out, dataset_bundle_to_json(data, truth));
            std::cout << "wrote " << sim_out << " (" << data.num_units() << " units)\n";
            return 0;
        }

        if (est->parsed()) {
            auto [data, truth] = dataset_bundle_from_json(load_json_file(est_data));
            PipelineConfig config = fig2_pipeline(est_seed);
            config.radius = truth.dgp.radius;
            if (!est_config.empty()) config = pipeline_from_json(load_json_file(est_config), config);
            config.seed = est_seed;
            if (est_bg > 0.0) config.b_graph = est_bg;
            if (est_clambda >= 0.0) config.c_lambda = est_clambda == 0.0 ? 1e-12 : est_clambda;
            if (est_ceta > 0.0) config.c_eta = est_ceta;
            if (est_bmu > 0.0) config.b_config = est_bmu;
            if (est_bx >= 0.0) config.b_cov = est_bx;
            if (est_cap >= 0) config.order_cap = est_cap;
            if (est_kcf >= 2) config.num_folds = est_kcf;
            config.uniform_weights = est_uniform;
            config.covariates_only_nuisance = est_cov_only;

            const int unit = est_unit >= 0 ? est_unit : default_target(data);
            if (est_flip < 1 || est_flip > data.slates.front().dim())
                throw std::runtime_error("--flip coordinate out of range");
            const Slate t = data.slates[static_cast<std::size_t>(unit)].with_coordinate(est_flip - 1, -1);
            const Slate t2 = data.slates[static_cast<std::size_t>(unit)].with_coordinate(est_flip - 1, +1);

            ContrastReport report;
            try {
                const auto distances =
                    pairwise_config_distances(data.configs, config.radius, config.discrepancy);
                std::vector<RootedConfig> masked;
                masked.reserve(data.configs.size());
                for (const auto& c : data.configs) {
                    RootedConfig m = mask_root_mark(c);
                    if (config.nuisance_tree_projection) m = tree_projection(m);
                    masked.push_back(std::move(m));
                }
                const auto masked_distances =
                    pairwise_config_distances(masked, config.radius, config.discrepancy);
                report = run_pipeline(data, unit, t, t2, config, &distances, &masked_distances);
            } catch (const PipelineError& e) {
                std::cerr << "estimation failed: " << e.what() << "\n";
                return 2;
            }
            json out = report_to_json(report);
            out["unit"] = unit;
            out["truth"] = true_contrast_value(truth, unit, t, t2);
            std::cout << out.dump(2) << "\n";

            if (!est_dump_weights.empty()) {
                std::vector<double> d(static_cast<std::size_t>(data.num_units()));
                for (int j = 0; j < data.num_units(); ++j)
                    d[static_cast<std::size_t>(j)] =
                        config_distance(data.configs[static_cast<std::size_t>(j)],
                                        data.configs[static_cast<std::size_t>(unit)], config.radius);
                const LocalWeights w = kernel_weights_from_distances(d, config.kernel, config.b_graph);
                std::ofstream os(est_dump_weights);
                weights_to_csv(os, d, w);
            }
            if (!est_dump_residuals.empty()) {
                const auto folds = make_folds(data.num_units(), config.num_folds, config.seed);
                CrossfitOptions cf;
                cf.nuisance.b_config = config.b_config;
                cf.nuisance.b_cov = config.b_cov;
                cf.nuisance.covariates_only = config.covariates_only_nuisance;
                const auto panel = crossfit_residuals(
                    data, folds, WalshIndexSet::build(data.slates.front().dim(), config.order_cap), cf);
                std::ofstream os(est_dump_residuals);
                panel_to_csv(os, panel);
            }
            return 0;
        }

        if (dist->parsed()) {
            const RootedConfig a = config_from_json(load_json_file(dist_a));
            const RootedConfig b = config_from_json(load_json_file(dist_b));
            const int radius = dist_radius >= 0 ? dist_radius : std::min(a.radius, b.radius);
            std::cout << format_double(config_distance(a, b, radius)) << "\n";
            return 0;
        }

        if (mc->parsed()) {
            McOptions options;
            options.profile_template =
                mc_profile == "appendixA" ? appendix_a_profile(500, 1) : fig2_profile(500, 1);
            options.pipeline = fig2_pipeline(1);
            options.pipeline.radius = options.profile_template.radius;
            if (!mc_config.empty()) options.pipeline = pipeline_from_json(load_json_file(mc_config), options.pipeline);
            options.sizes = parse_sizes(mc_sizes);
            options.reps = mc_reps;
            options.base_seed = mc_seed;
            options.workers = mc_workers;
            options.stable_runtime = mc_stable;
            if (mc_unit >= 0) options.target_unit = mc_unit;
            options.estimators.clear();
            std::stringstream ss(mc_estimators);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                const auto kind = estimator_from_name(tok);
                if (!kind) throw std::runtime_error("unknown estimator " + tok);
                options.estimators.push_back(*kind);
            }

            const auto results = run_montecarlo(options);
            const auto summaries = summarize(results);

            std::ostringstream rcsv, scsv, pcsv;
            results_to_csv(rcsv, results);
            summaries_to_csv(scsv, summaries);
            plotdata_to_csv(pcsv, results);
            write_file(mc_prefix + "_results.csv", rcsv.str());
            write_file(mc_prefix + "_summary.csv", scsv.str());
            write_file(mc_prefix + "_plotdata.csv", pcsv.str());
            save_json_file(mc_prefix + "_results.json", results_to_json(results));
            std::cout << scsv.str();
            return 0;
        }

        if (sum->parsed()) {
            std::ifstream in(sum_in);
            if (!in) throw std::runtime_error("cannot open " + sum_in);
            const auto results = results_from_csv(in);
            const auto summaries = summarize(results);
            std::ostringstream scsv;
            summaries_to_csv(scsv, summaries);
            if (sum_out.empty()) std::cout << scsv.str();
            else write_file(sum_out, scsv.str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
