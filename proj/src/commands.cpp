#include "mesh/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>

#include "mesh/crossover.hpp"
#include "mesh/errors.hpp"
#include "mesh/evaluator.hpp"
#include "mesh/meta_train.hpp"
#include "mesh/metadataset.hpp"
#include "mesh/rng.hpp"
#include "mesh/synth.hpp"
#include "mesh/tuner.hpp"
#include "mesh/version.hpp"

namespace fs = std::filesystem;

namespace mesh {

namespace {

// Deterministic shortest-round-trip formatting for CSV cells.
std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string sanitize_id(const std::string& id) {
    std::string out = id;
    for (auto& c : out) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    }
    return out;
}

void ensure_out_dir(const ExperimentConfig& cfg) {
    if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);
}

nlohmann::json header_for(const ExperimentConfig& cfg) {
    return nlohmann::json{{"tool_version", kToolVersion},
                          {"experiment_config", cfg.to_json()}};
}

struct TunerSelection {
    std::string name;       // row label: "rs", "sh", "mesh", "mesh-oracle", ...
    std::string bundle_id;  // "", "oracle", "passthrough", or a file path
    bool is_mesh = false;
};

std::vector<TunerSelection> parse_tuners(const ExperimentConfig& cfg) {
    std::vector<TunerSelection> out;
    for (const auto& name : cfg.tuners) {
        TunerSelection sel;
        sel.name = name;
        if (name == "rs" || name == "sh") {
            out.push_back(sel);
        } else if (name == "mesh") {
            if (cfg.bundle.empty()) {
                throw ConfigError("tuner 'mesh' needs --bundle (file, oracle or passthrough)");
            }
            sel.is_mesh = true;
            sel.bundle_id = cfg.bundle;
            if (cfg.bundle == "oracle" || cfg.bundle == "passthrough") {
                sel.name = "mesh-" + cfg.bundle;
            }
            out.push_back(sel);
        } else if (name == "mesh-oracle" || name == "mesh-passthrough") {
            sel.is_mesh = true;
            sel.bundle_id = name.substr(5);
            out.push_back(sel);
        } else {
            throw ConfigError("unknown tuner '" + name + "' (expected rs, sh, mesh, "
                              "mesh-oracle or mesh-passthrough)");
        }
    }
    if (out.empty()) throw ConfigError("no tuners selected");
    return out;
}

}  // namespace

ResourceSchedule ExperimentConfig::schedule() const { return build_schedule(r_min, r_max, eta); }

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    ExperimentConfig cfg;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "n") cfg.n = value.get<std::int64_t>();
            else if (key == "eta") cfg.eta = value.get<double>();
            else if (key == "r_min") cfg.r_min = value.get<std::int64_t>();
            else if (key == "r_max") cfg.r_max = value.get<std::int64_t>();
            else if (key == "space") cfg.space_path = value.get<std::string>();
            else if (key == "datasets") cfg.datasets = value.get<std::vector<std::string>>();
            else if (key == "replay_tables")
                cfg.replay_tables = value.get<std::vector<std::string>>();
            else if (key == "tables") cfg.tables = value.get<std::vector<std::string>>();
            else if (key == "tuners") cfg.tuners = value.get<std::vector<std::string>>();
            else if (key == "bundle") cfg.bundle = value.get<std::string>();
            else if (key == "repetitions") cfg.repetitions = value.get<std::int64_t>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "workers") cfg.workers = value.get<int>();
            else if (key == "regressor") cfg.regressor = value.get<std::string>();
            else if (key == "patience") cfg.patience = value.get<std::int64_t>();
            else if (key == "folds") cfg.folds = value.get<int>();
            else if (key == "n_configs") cfg.n_configs = value.get<std::int64_t>();
            else if (key == "max_seconds") cfg.max_seconds = value.get<double>();
            else if (key == "out_dir") cfg.out_dir = value.get<std::string>();
            else if (key == "metadataset") cfg.metadataset = value.get<std::string>();
            else if (key == "bundle_out") cfg.bundle_out = value.get<std::string>();
            else if (key == "exclude_datasets")
                cfg.exclude_datasets = value.get<std::vector<std::string>>();
            else if (key == "synthetic_curves") cfg.synthetic_curves = value.get<bool>();
            else if (key == "n_synthetic") cfg.n_synthetic = value.get<std::int64_t>();
            else if (key == "severity") cfg.severity = value.get<double>();
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
    if (cfg.repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
    return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
    return nlohmann::json{{"n", n},
                          {"eta", eta},
                          {"r_min", r_min},
                          {"r_max", r_max},
                          {"space", space_path},
                          {"datasets", datasets},
                          {"replay_tables", replay_tables},
                          {"tables", tables},
                          {"tuners", tuners},
                          {"bundle", bundle},
                          {"repetitions", repetitions},
                          {"seed", seed},
                          {"workers", workers},
                          {"regressor", regressor},
                          {"patience", patience},
                          {"folds", folds},
                          {"n_configs", n_configs},
                          {"max_seconds", max_seconds},
                          {"out_dir", out_dir},
                          {"metadataset", metadataset},
                          {"bundle_out", bundle_out},
                          {"exclude_datasets", exclude_datasets},
                          {"synthetic_curves", synthetic_curves},
                          {"n_synthetic", n_synthetic},
                          {"severity", severity}};
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr) return 2;
    if (dynamic_cast<const DataError*>(&e) != nullptr) return 3;
    if (dynamic_cast<const NumericalError*>(&e) != nullptr) return 3;
    if (dynamic_cast<const LeakageError*>(&e) != nullptr) return 4;
    return 1;
}

void cmd_generate_curves(const ExperimentConfig& cfg) {
    const auto sched = cfg.schedule();
    ensure_out_dir(cfg);

    if (cfg.synthetic_curves) {
        if (cfg.n_synthetic < 1) throw ConfigError("n_synthetic must be >= 1");
        const HyperparamSpace space = HyperparamSpace::load(cfg.space_path);
        for (std::int64_t d = 0; d < cfg.n_synthetic; ++d) {
            synth::CurveFamilySpec family;
            family.dataset_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(d));
            family.n_configs = cfg.n_configs;
            family.severity = cfg.severity;
            auto table = synth::make_crossover_table(family, space, sched);
            table.experiment_config = cfg.to_json();
            const auto path =
                fs::path(cfg.out_dir) / ("curves_" + sanitize_id(table.dataset_id) + ".jsonl");
            table.save(path.string());
            std::cerr << "wrote " << path.string() << " (" << table.entries.size()
                      << " configs)\n";
        }
        return;
    }

    if (cfg.datasets.empty()) throw ConfigError("generate-curves needs at least one dataset");
    const HyperparamSpace space = HyperparamSpace::load(cfg.space_path);
    if (cfg.n_configs == 0) {
        std::cerr << "warning: trial budget is 0, emitting empty tables\n";
    }

    for (std::size_t d = 0; d < cfg.datasets.size(); ++d) {
        const auto start = std::chrono::steady_clock::now();
        Dataset ds = synth::load_dataset_path(cfg.datasets[d]);
        auto mf = compute_dataset_metafeatures(ds);
        for (const auto& note : mf.imputed) {
            std::cerr << "dataset '" << ds.id << "': imputed " << note << "\n";
        }

        LossCurveTable table;
        table.dataset_id = ds.id;
        table.schedule = sched;
        table.space = space;
        table.dataset_mf = mf;
        table.experiment_config = cfg.to_json();

        GbdtEvaluator evaluator(std::move(ds), space);
        const auto seed_d = mix_seed(cfg.seed, static_cast<std::uint64_t>(d));
        const auto configs =
            cfg.n_configs > 0 ? evaluator.sample_candidates(cfg.n_configs, seed_d)
                              : std::vector<Configuration>{};

        bool clock_exhausted = false;
        for (const auto& config : configs) {
            if (cfg.max_seconds > 0.0) {
                const std::chrono::duration<double> elapsed =
                    std::chrono::steady_clock::now() - start;
                if (elapsed.count() > cfg.max_seconds) {
                    clock_exhausted = true;
                    break;
                }
            }
            CurveEntry entry;
            entry.config = config;
            try {
                for (std::int64_t r : sched.resources) {
                    entry.losses[r] = evaluator.evaluate(config, r);
                }
            } catch (const std::exception& e) {
                std::cerr << "trial " << config.id.str() << " on '" << table.dataset_id
                          << "' failed, skipping: " << e.what() << "\n";
                continue;
            }
            table.entries.push_back(std::move(entry));
        }
        if (clock_exhausted) {
            std::cerr << "dataset '" << table.dataset_id
                      << "': wall-clock budget exhausted, table is partial\n";
        }

        const auto path =
            fs::path(cfg.out_dir) / ("curves_" + sanitize_id(table.dataset_id) + ".jsonl");
        table.save(path.string());
        std::cerr << "wrote " << path.string() << " (" << table.entries.size() << " configs)\n";
    }
}

void cmd_build_metadataset(const ExperimentConfig& cfg) {
    if (cfg.tables.empty()) throw ConfigError("build-metadataset needs --tables");
    if (cfg.metadataset.empty()) throw ConfigError("build-metadataset needs --metadataset");
    const auto sched = cfg.schedule();
    const HyperparamSpace space = HyperparamSpace::load(cfg.space_path);
    std::vector<LossCurveTable> tables;
    tables.reserve(cfg.tables.size());
    for (const auto& path : cfg.tables) {
        tables.push_back(LossCurveTable::load(path));
    }
    const auto md = build_metadataset(tables, space, sched);
    if (const auto parent = fs::path(cfg.metadataset).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
    }
    md.save(cfg.metadataset);
    std::size_t total = 0;
    for (const auto& round : md.per_round) total += round.size();
    std::cerr << "wrote " << cfg.metadataset << " (" << total << " examples, "
              << md.per_round.size() << " rounds)\n";
}

void cmd_train_meta(const ExperimentConfig& cfg) {
    if (cfg.metadataset.empty()) throw ConfigError("train-meta needs --metadataset");
    if (cfg.bundle_out.empty()) throw ConfigError("train-meta needs --bundle-out");
    ensure_out_dir(cfg);

    const auto md = MetaDataset::load(cfg.metadataset);
    const std::set<std::string> exclude(cfg.exclude_datasets.begin(),
                                        cfg.exclude_datasets.end());
    const auto kind = regressor_kind_from_str(cfg.regressor);
    const auto bundle = train_meta_models(md, kind, exclude, cfg.folds, cfg.seed);
    if (const auto parent = fs::path(cfg.bundle_out).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
    }
    bundle.save(cfg.bundle_out);
    std::cerr << "wrote " << cfg.bundle_out << "\n";

    // Offline accuracy report: per-round CV error, plus held-out error on
    // the excluded datasets when there are any.
    std::vector<MseRow> heldout;
    if (!exclude.empty()) {
        MetaDataset held;
        held.schedule = md.schedule;
        held.space = md.space;
        held.per_round.assign(md.per_round.size(), {});
        for (std::size_t i = 0; i < md.per_round.size(); ++i) {
            for (const auto& ex : md.per_round[i]) {
                if (exclude.count(ex.dataset_id)) held.per_round[i].push_back(ex);
            }
        }
        heldout = offline_mse_report(bundle, held);
    }

    const auto path = fs::path(cfg.out_dir) / "offline_mse.csv";
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "round,resource,cv_mse,heldout_mse,heldout_examples\n";
    for (std::size_t i = 0; i < bundle.models().size(); ++i) {
        const auto& model = bundle.models()[i];
        out << model.round << "," << md.schedule.resources[i] << ",";
        if (std::isfinite(model.cv_mse)) out << fmt_double(model.cv_mse);
        out << ",";
        if (!heldout.empty() && heldout[i].count > 0) out << fmt_double(heldout[i].mse);
        out << ",";
        out << (heldout.empty() ? 0 : heldout[i].count) << "\n";
    }
    std::cerr << "wrote " << path.string() << "\n";
}

namespace {

struct CompareTarget {
    std::string id;
    std::unique_ptr<Evaluator> make() const {
        if (replay != nullptr) {
            return std::make_unique<ReplayEvaluator>(*replay);
        }
        return std::make_unique<GbdtEvaluator>(*dataset, *space);
    }
    const HyperparamSpace* space = nullptr;
    std::shared_ptr<const LossCurveTable> replay;
    std::shared_ptr<const Dataset> dataset;
    std::optional<DatasetMetaFeatures> mf;
};

}  // namespace

void cmd_compare(const ExperimentConfig& cfg) {
    if (cfg.datasets.empty() == cfg.replay_tables.empty()) {
        throw ConfigError("compare needs either --datasets or --replay-tables (not both)");
    }
    const auto sched = cfg.schedule();
    const auto selections = parse_tuners(cfg);
    ensure_out_dir(cfg);
    fs::create_directories(fs::path(cfg.out_dir) / "runs");

    // The space comes from --space for GBDT targets and from the table
    // header for replay targets.
    HyperparamSpace file_space;
    if (!cfg.datasets.empty()) {
        file_space = HyperparamSpace::load(cfg.space_path);
    }

    std::shared_ptr<const TrainedBundle> trained;
    const bool needs_trained = std::any_of(
        selections.begin(), selections.end(), [](const TunerSelection& s) {
            return s.is_mesh && s.bundle_id != "oracle" && s.bundle_id != "passthrough";
        });
    if (needs_trained) {
        auto loaded = std::make_shared<TrainedBundle>(TrainedBundle::load(cfg.bundle));
        trained = loaded;
    }

    std::vector<CompareTarget> targets;
    for (const auto& path : cfg.replay_tables) {
        CompareTarget target;
        target.replay = std::make_shared<const LossCurveTable>(LossCurveTable::load(path));
        target.id = target.replay->dataset_id;
        target.space = &target.replay->space;
        target.mf = target.replay->dataset_mf;
        if (target.replay->schedule.resources != sched.resources) {
            throw DataError("replay table '" + target.id +
                            "' does not cover the requested schedule");
        }
        targets.push_back(std::move(target));
    }
    for (const auto& path : cfg.datasets) {
        CompareTarget target;
        target.dataset = std::make_shared<const Dataset>(synth::load_dataset_path(path));
        target.id = target.dataset->id;
        target.space = &file_space;
        target.mf = compute_dataset_metafeatures(*target.dataset);
        targets.push_back(std::move(target));
    }

    const std::int64_t rs_k = equivalent_rs_budget(cfg.n, sched);
    const std::int64_t ladder_budget = [&] {
        const auto sizes = cohort_sizes(cfg.n, sched);
        std::int64_t total = 0;
        for (std::size_t i = 0; i < sizes.size(); ++i) total += sizes[i] * sched.resources[i];
        return total;
    }();

    for (const auto& target : targets) {
        if (trained != nullptr) {
            const auto& prov = trained->provenance();
            if (std::find(prov.begin(), prov.end(), target.id) != prov.end()) {
                throw LeakageError("bundle was trained on dataset '" + target.id +
                                   "'; refusing to evaluate on it");
            }
        }

        const auto report_path =
            fs::path(cfg.out_dir) / ("compare_" + sanitize_id(target.id) + ".jsonl");
        std::ofstream report(report_path);
        if (!report) throw DataError("cannot write '" + report_path.string() + "'");
        nlohmann::json header = header_for(cfg);
        header["dataset_id"] = target.id;
        header["rs_k"] = rs_k;
        header["ladder_budget"] = ladder_budget;
        report << header.dump() << "\n";

        std::vector<std::int64_t> budgets(selections.size(), -1);
        for (std::size_t t = 0; t < selections.size(); ++t) {
            const auto& sel = selections[t];
            std::vector<double> raw;
            std::int64_t budget = 0;
            for (std::int64_t rep = 0; rep < cfg.repetitions; ++rep) {
                // seed+rep, so every tuner sees the same sampled
                // configurations within a repetition.
                const std::uint64_t rep_seed = cfg.seed + static_cast<std::uint64_t>(rep);
                auto evaluator = target.make();
                TunerOptions opts;
                opts.workers = cfg.workers;
                opts.patience = cfg.patience;

                TuneResult result;
                if (sel.name == "rs") {
                    result = run_random_search(*evaluator, *target.space, rs_k,
                                               sched.top_resource(), rep_seed, opts);
                } else if (sel.name == "sh") {
                    result = run_successive_halving(*evaluator, *target.space, cfg.n, sched,
                                                    rep_seed, opts);
                } else {
                    std::unique_ptr<MetaModelBundle> baseline;
                    const MetaModelBundle* bundle = nullptr;
                    if (sel.bundle_id == "oracle") {
                        if (target.replay == nullptr) {
                            throw ConfigError(
                                "the oracle bundle needs a replay table target");
                        }
                        baseline = std::make_unique<OracleBundle>(target.replay);
                        bundle = baseline.get();
                    } else if (sel.bundle_id == "passthrough") {
                        baseline = std::make_unique<PassthroughBundle>();
                        bundle = baseline.get();
                    } else {
                        bundle = trained.get();
                    }
                    result = run_mesh(*evaluator, *target.space, cfg.n, sched, *bundle,
                                      target.mf, rep_seed, opts);
                }

                raw.push_back(result.best_loss);
                budget = std::max(budget, result.resource_spent);
                nlohmann::json run_header{{"dataset_id", target.id},
                                          {"tuner", sel.name},
                                          {"repetition", rep},
                                          {"seed", rep_seed}};
                const auto log_path = fs::path(cfg.out_dir) / "runs" /
                                      (sanitize_id(target.id) + "_" + sel.name + "_rep" +
                                       std::to_string(rep) + ".jsonl");
                result.write_log(log_path.string(), run_header);
            }

            double mean = 0.0;
            for (double v : raw) mean += v;
            mean /= static_cast<double>(raw.size());
            double var = 0.0;
            for (double v : raw) var += (v - mean) * (v - mean);
            var /= static_cast<double>(raw.size());

            budgets[t] = budget;
            nlohmann::json row{{"tuner", sel.name},
                               {"mean", mean},
                               {"std", std::sqrt(var)},
                               {"raw", raw},
                               {"budget", budget}};
            report << row.dump() << "\n";
        }

        // Budget parity across rows, surfaced rather than silently trusted.
        for (std::size_t t = 0; t < selections.size(); ++t) {
            const auto& sel = selections[t];
            if (sel.name == "rs") {
                if (budgets[t] > ladder_budget) {
                    std::cerr << "warning: rs budget " << budgets[t]
                              << " exceeds the ladder budget " << ladder_budget << "\n";
                }
            } else if (budgets[t] != ladder_budget) {
                std::cerr << "warning: " << sel.name << " budget " << budgets[t]
                          << " != ladder budget " << ladder_budget << "\n";
            }
        }
        std::cerr << "wrote " << report_path.string() << "\n";
    }
}

void cmd_diagnostics(const ExperimentConfig& cfg) {
    std::vector<std::string> inputs = cfg.tables;
    inputs.insert(inputs.end(), cfg.replay_tables.begin(), cfg.replay_tables.end());
    if (inputs.empty()) throw ConfigError("diagnostics needs --tables");
    ensure_out_dir(cfg);

    for (const auto& path : inputs) {
        auto table = LossCurveTable::load(path);
        const auto stats = crossover_stats(table);
        const auto base = sanitize_id(table.dataset_id);

        const auto stats_path = fs::path(cfg.out_dir) / ("crossover_" + base + ".csv");
        {
            std::ofstream out(stats_path);
            if (!out) throw DataError("cannot write '" + stats_path.string() + "'");
            out << "round,resource,spearman_vs_final\n";
            for (const auto& row : stats) {
                out << row.round << "," << row.resource << ",";
                if (row.rank_correlation.has_value()) out << fmt_double(*row.rank_correlation);
                out << "\n";
            }
        }

        // Elimination trace of a halving run over the full table.
        const auto n = static_cast<std::int64_t>(table.entries.size());
        std::vector<std::vector<ConfigId>> trace;
        if (n > 1) {
            ReplayEvaluator evaluator(table);
            TunerOptions opts;
            opts.workers = cfg.workers;
            const auto result = run_successive_halving(evaluator, table.space, n,
                                                       table.schedule, cfg.seed, opts);
            trace = result.elimination_trace;
        } else {
            // A single configuration survives every round; there is nothing
            // to eliminate.
            trace.assign(static_cast<std::size_t>(table.schedule.num_rounds()),
                         {table.entries.front().config.id});
        }

        const auto trace_path = fs::path(cfg.out_dir) / ("trace_" + base + ".jsonl");
        {
            std::ofstream out(trace_path);
            if (!out) throw DataError("cannot write '" + trace_path.string() + "'");
            nlohmann::json header = header_for(cfg);
            header["dataset_id"] = table.dataset_id;
            header["source_table"] = path;
            out << header.dump() << "\n";
            for (const auto& entry : table.entries) {
                std::vector<int> survived_rounds;
                for (std::size_t i = 0; i < trace.size(); ++i) {
                    if (std::binary_search(trace[i].begin(), trace[i].end(),
                                           entry.config.id)) {
                        survived_rounds.push_back(static_cast<int>(i));
                    }
                }
                nlohmann::json losses = nlohmann::json::object();
                for (const auto& [r, loss] : entry.losses) {
                    losses[std::to_string(r)] = loss;
                }
                nlohmann::json line{{"config_id", entry.config.id.str()},
                                    {"losses", losses},
                                    {"survived_rounds", survived_rounds}};
                out << line.dump() << "\n";
            }
        }
        std::cerr << "wrote " << stats_path.string() << " and " << trace_path.string() << "\n";
    }
}

void run_command(const std::string& command, const ExperimentConfig& cfg) {
    if (command == "generate-curves") {
        cmd_generate_curves(cfg);
    } else if (command == "build-metadataset") {
        cmd_build_metadataset(cfg);
    } else if (command == "train-meta") {
        cmd_train_meta(cfg);
    } else if (command == "compare") {
        cmd_compare(cfg);
    } else if (command == "diagnostics") {
        cmd_diagnostics(cfg);
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }
}

void run_command(const std::string& command, const nlohmann::json& config_json) {
    run_command(command, ExperimentConfig::from_json(config_json));
}

}  // namespace mesh
