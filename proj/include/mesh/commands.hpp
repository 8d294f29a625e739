#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mesh/schedule.hpp"

namespace mesh {

// Everything a command run needs, loadable from JSON (`--config`) with
// CLI flags overriding individual fields. The effective config is echoed
// verbatim into every output file for provenance.
struct ExperimentConfig {
    std::int64_t n = 64;
    double eta = 2.0;
    std::int64_t r_min = 16;
    std::int64_t r_max = 1024;
    std::string space_path;
    std::vector<std::string> datasets;       // CSV paths or synth: specs
    std::vector<std::string> replay_tables;  // curve tables to tune against
    std::vector<std::string> tables;         // curve tables for the offline phase
    std::vector<std::string> tuners{"rs", "sh", "mesh"};
    std::string bundle;  // bundle file path, or "oracle" / "passthrough"
    std::int64_t repetitions = 1;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string regressor = "gbdt";
    std::int64_t patience = 50;
    int folds = 3;
    std::int64_t n_configs = 64;  // trials per dataset in generate-curves
    double max_seconds = 0.0;     // wall-clock budget per dataset (0 = off)
    std::string out_dir = "out";
    std::string metadataset;  // build-metadataset output / train-meta input
    std::string bundle_out = "bundle.json";
    std::vector<std::string> exclude_datasets;
    bool synthetic_curves = false;  // generate-curves: emit the synthetic family
    std::int64_t n_synthetic = 20;
    double severity = 0.9;

    static ExperimentConfig from_json(const nlohmann::json& j);  // rejects unknown keys
    nlohmann::json to_json() const;

    ResourceSchedule schedule() const;
};

// Runs one subcommand end to end; throws on failure. Output files land
// under cfg.out_dir (created if needed).
void run_command(const std::string& command, const ExperimentConfig& cfg);
void run_command(const std::string& command, const nlohmann::json& config_json);

// Stable exit-code contract: 0 success, 2 config error, 3 data error,
// 4 leakage refusal, 1 anything else.
int exit_code_for(const std::exception& e);

void cmd_generate_curves(const ExperimentConfig& cfg);
void cmd_build_metadataset(const ExperimentConfig& cfg);
void cmd_train_meta(const ExperimentConfig& cfg);
void cmd_compare(const ExperimentConfig& cfg);
void cmd_diagnostics(const ExperimentConfig& cfg);

}  // namespace mesh
