#pragma once
// JSON interchange: dataset bundles, config dumps, reports, and run
// configuration files.

#include <json.hpp>
#include <string>

#include "netslate/harness.hpp"

namespace netslate {

using json = nlohmann::json;

json profile_to_json(const DgpProfile& profile);
DgpProfile profile_from_json(const json& j);

// {profile, graph:{n, edges}, X, T, Y, truth:{index_set, alpha, noiseless, rho}}
json dataset_bundle_to_json(const Dataset& data, const GroundTruth& truth);
std::pair<Dataset, GroundTruth> dataset_bundle_from_json(const json& j);

// Config debug dump: vertices with depths and marks, plus the local edges.
json config_to_json(const RootedConfig& config);
RootedConfig config_from_json(const json& j);

// {p, order_cap, values:[...]} in the canonical index order.
json coeffs_to_json(const WalshCoeffs& coeffs);
WalshCoeffs coeffs_from_json(const json& j);

json report_to_json(const ContrastReport& report);

// Pipeline settings file; any missing key keeps its default.
PipelineConfig pipeline_from_json(const json& j, PipelineConfig base = {});
json pipeline_to_json(const PipelineConfig& config);

json results_to_json(const std::vector<McResult>& results);
json summaries_to_json(const std::vector<McSummary>& summaries);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

} // namespace netslate
