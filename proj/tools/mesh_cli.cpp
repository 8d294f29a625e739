// Command-line front end for the mesh tuning engine. All work happens
// behind the C API in libmesh; this binary only parses flags, assembles the
// experiment-config JSON, and maps statuses to exit codes.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mesh.h"

namespace {

using nlohmann::json;

struct CliOptions {
    std::string config_path;
    std::int64_t n = 0;
    double eta = 0.0;
    std::int64_t r_min = 0;
    std::int64_t r_max = 0;
    std::string space;
    std::vector<std::string> datasets;
    std::vector<std::string> replay_tables;
    std::vector<std::string> tables;
    std::vector<std::string> tuners;
    std::string bundle;
    std::int64_t repetitions = 0;
    std::int64_t seed = 0;
    int workers = 0;
    std::string regressor;
    std::int64_t patience = 0;
    int folds = 0;
    std::int64_t n_configs = 0;
    double max_seconds = 0.0;
    std::string out_dir;
    std::string metadataset;
    std::string bundle_out;
    std::vector<std::string> exclude_datasets;
    bool synthetic_curves = false;
    std::int64_t n_synthetic = 0;
    double severity = 0.0;
};

void add_common_flags(CLI::App* cmd, CliOptions& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config JSON file");
    cmd->add_option("-n,--n", opts.n, "configurations per halving run");
    cmd->add_option("--eta", opts.eta, "elimination factor (> 1)");
    cmd->add_option("--r-min", opts.r_min, "minimum resource (boosting rounds)");
    cmd->add_option("--r-max", opts.r_max, "maximum resource (boosting rounds)");
    cmd->add_option("--space", opts.space, "search-space JSON file");
    cmd->add_option("--datasets", opts.datasets, "dataset CSV paths or synth: specs");
    cmd->add_option("--replay-tables", opts.replay_tables, "loss-curve tables to tune against");
    cmd->add_option("--tables", opts.tables, "loss-curve table files");
    cmd->add_option("--tuners", opts.tuners, "tuners: rs, sh, mesh, mesh-oracle, mesh-passthrough");
    cmd->add_option("--bundle", opts.bundle, "meta-model bundle file, or oracle/passthrough");
    cmd->add_option("--repetitions", opts.repetitions, "repetitions per tuner");
    cmd->add_option("--seed", opts.seed, "base random seed");
    cmd->add_option("--workers", opts.workers, "parallel trial evaluations");
    cmd->add_option("--regressor", opts.regressor, "meta-regressor kind: knn, gbdt or mlp");
    cmd->add_option("--patience", opts.patience, "early-stopping patience (rounds)");
    cmd->add_option("--folds", opts.folds, "cross-validation folds");
    cmd->add_option("--n-configs", opts.n_configs, "trials per dataset when generating curves");
    cmd->add_option("--max-seconds", opts.max_seconds, "wall-clock budget per dataset");
    cmd->add_option("--out-dir", opts.out_dir, "output directory");
    cmd->add_option("--metadataset", opts.metadataset, "meta-dataset JSONL path");
    cmd->add_option("--bundle-out", opts.bundle_out, "bundle output path");
    cmd->add_option("--exclude-datasets", opts.exclude_datasets,
                    "dataset ids excluded from meta-training");
    cmd->add_flag("--synthetic-curves", opts.synthetic_curves,
                  "emit the synthetic crossover curve family instead of training");
    cmd->add_option("--n-synthetic", opts.n_synthetic, "synthetic tables to emit");
    cmd->add_option("--severity", opts.severity, "crossover severity of synthetic curves");
}

// Flags override values from --config; only flags the user actually passed
// are merged in.
json build_config(const CLI::App* cmd, const CliOptions& opts) {
    json cfg = json::object();
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) {
            std::fprintf(stderr, "error: cannot open config file '%s'\n",
                         opts.config_path.c_str());
            std::exit(2);
        }
        try {
            in >> cfg;
        } catch (const json::exception& e) {
            std::fprintf(stderr, "error: invalid JSON in '%s': %s\n", opts.config_path.c_str(),
                         e.what());
            std::exit(2);
        }
    }
    const auto passed = [&](const std::string& flag) { return cmd->count(flag) > 0; };
    if (passed("--n")) cfg["n"] = opts.n;
    if (passed("--eta")) cfg["eta"] = opts.eta;
    if (passed("--r-min")) cfg["r_min"] = opts.r_min;
    if (passed("--r-max")) cfg["r_max"] = opts.r_max;
    if (passed("--space")) cfg["space"] = opts.space;
    if (passed("--datasets")) cfg["datasets"] = opts.datasets;
    if (passed("--replay-tables")) cfg["replay_tables"] = opts.replay_tables;
    if (passed("--tables")) cfg["tables"] = opts.tables;
    if (passed("--tuners")) cfg["tuners"] = opts.tuners;
    if (passed("--bundle")) cfg["bundle"] = opts.bundle;
    if (passed("--repetitions")) cfg["repetitions"] = opts.repetitions;
    if (passed("--seed")) cfg["seed"] = opts.seed;
    if (passed("--workers")) cfg["workers"] = opts.workers;
    if (passed("--regressor")) cfg["regressor"] = opts.regressor;
    if (passed("--patience")) cfg["patience"] = opts.patience;
    if (passed("--folds")) cfg["folds"] = opts.folds;
    if (passed("--n-configs")) cfg["n_configs"] = opts.n_configs;
    if (passed("--max-seconds")) cfg["max_seconds"] = opts.max_seconds;
    if (passed("--out-dir")) cfg["out_dir"] = opts.out_dir;
    if (passed("--metadataset")) cfg["metadataset"] = opts.metadataset;
    if (passed("--bundle-out")) cfg["bundle_out"] = opts.bundle_out;
    if (passed("--exclude-datasets")) cfg["exclude_datasets"] = opts.exclude_datasets;
    if (passed("--synthetic-curves")) cfg["synthetic_curves"] = opts.synthetic_curves;
    if (passed("--n-synthetic")) cfg["n_synthetic"] = opts.n_synthetic;
    if (passed("--severity")) cfg["severity"] = opts.severity;
    return cfg;
}

int run(const std::string& command, const CLI::App* cmd, const CliOptions& opts) {
    const json cfg = build_config(cmd, opts);
    const mesh_status status = mesh_cmd_run(command.c_str(), cfg.dump().c_str());
    if (status != MESH_OK) {
        std::fprintf(stderr, "error: %s\n", mesh_last_error());
        switch (status) {
            case MESH_CONFIG_ERROR: return 2;
            case MESH_DATA_ERROR:
            case MESH_NUMERIC_ERROR: return 3;
            case MESH_LEAKAGE_ERROR: return 4;
            default: return 1;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mesh - hyperparameter tuning with random search, successive halving, "
                 "and meta-learned elimination"};
    app.set_version_flag("--version", std::string(mesh_version()));
    app.require_subcommand(1);

    CliOptions opts;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"generate-curves",
         "train sampled configurations at every resource level and record loss curves"},
        {"build-metadataset", "assemble per-round regression examples from curve tables"},
        {"train-meta", "train and tune per-round meta-regressors"},
        {"compare", "run the selected tuners at equal budget and report mean/std"},
        {"diagnostics", "emit elimination traces and rank-correlation tables"},
    };
    for (const auto& [name, description] : commands) {
        auto* cmd = app.add_subcommand(name, description);
        add_common_flags(cmd, opts);
        cmd->callback([&opts, cmd, name = name]() { std::exit(run(name, cmd, opts)); });
    }

    CLI11_PARSE(app, argc, argv);
    return 0;
}
