#include "mesh.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <string>

#include "mesh/commands.hpp"
#include "mesh/crossover.hpp"
#include "mesh/errors.hpp"
#include "mesh/evaluator.hpp"
#include "mesh/meta_train.hpp"
#include "mesh/metadataset.hpp"
#include "mesh/synth.hpp"
#include "mesh/tuner.hpp"
#include "mesh/version.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

mesh_status status_of(const std::exception& e) {
    if (dynamic_cast<const mesh::ConfigError*>(&e) != nullptr) return MESH_CONFIG_ERROR;
    if (dynamic_cast<const mesh::DataError*>(&e) != nullptr) return MESH_DATA_ERROR;
    if (dynamic_cast<const mesh::LeakageError*>(&e) != nullptr) return MESH_LEAKAGE_ERROR;
    if (dynamic_cast<const mesh::ContractViolation*>(&e) != nullptr) return MESH_CONTRACT_ERROR;
    if (dynamic_cast<const mesh::NumericalError*>(&e) != nullptr) return MESH_NUMERIC_ERROR;
    return MESH_ERROR;
}

template <typename Fn>
mesh_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return MESH_OK;
    } catch (const std::exception& e) {
        set_error(e.what());
        return status_of(e);
    } catch (...) {
        set_error("unknown error");
        return MESH_ERROR;
    }
}

mesh_status require(bool ok, const char* message) {
    if (ok) return MESH_OK;
    set_error(message);
    return MESH_CONTRACT_ERROR;
}

char* copy_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct mesh_space {
    mesh::HyperparamSpace space;
};

struct mesh_schedule {
    mesh::ResourceSchedule sched;
};

struct mesh_dataset {
    mesh::Dataset ds;
};

struct mesh_table {
    std::shared_ptr<const mesh::LossCurveTable> table;
};

struct mesh_evaluator {
    std::unique_ptr<mesh::Evaluator> evaluator;
};

struct mesh_bundle {
    std::unique_ptr<mesh::MetaModelBundle> bundle;
};

struct mesh_result {
    mesh::TuneResult result;
    mesh::HyperparamSpace space;  // for serializing the best configuration
};

extern "C" {

const char* mesh_version(void) { return mesh::kToolVersion; }

const char* mesh_last_error(void) { return g_last_error.c_str(); }

void mesh_string_free(char* s) { delete[] s; }

mesh_status mesh_space_from_json(const char* json, mesh_space** out) {
    if (auto rc = require(json != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] {
        auto handle = std::make_unique<mesh_space>();
        handle->space = mesh::HyperparamSpace::from_json(nlohmann::json::parse(json));
        *out = handle.release();
    });
}

mesh_status mesh_space_load(const char* path, mesh_space** out) {
    if (auto rc = require(path != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] {
        auto handle = std::make_unique<mesh_space>();
        handle->space = mesh::HyperparamSpace::load(path);
        *out = handle.release();
    });
}

size_t mesh_space_param_count(const mesh_space* space) {
    return space == nullptr ? 0 : space->space.size();
}

void mesh_space_free(mesh_space* space) { delete space; }

mesh_status mesh_sample_configurations_json(const mesh_space* space, int64_t n, uint64_t seed,
                                            char** out_json) {
    if (auto rc = require(space != nullptr && out_json != nullptr, "null argument")) return rc;
    return guarded([&] {
        const auto configs = mesh::sample_configurations(space->space, n, seed);
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& config : configs) {
            arr.push_back({{"config_id", config.id.str()},
                           {"values", space->space.values_json(config)}});
        }
        *out_json = copy_string(arr.dump());
    });
}

mesh_status mesh_schedule_build(int64_t r_min, int64_t r_max, double eta, mesh_schedule** out) {
    if (auto rc = require(out != nullptr, "null argument")) return rc;
    return guarded([&] {
        auto handle = std::make_unique<mesh_schedule>();
        handle->sched = mesh::build_schedule(r_min, r_max, eta);
        *out = handle.release();
    });
}

int mesh_schedule_num_rounds(const mesh_schedule* sched) {
    return sched == nullptr ? 0 : sched->sched.num_rounds();
}

int64_t mesh_schedule_resource_at(const mesh_schedule* sched, int round) {
    if (sched == nullptr || round < 0 || round >= sched->sched.num_rounds()) return -1;
    return sched->sched.resources[static_cast<std::size_t>(round)];
}

mesh_status mesh_cohort_sizes(const mesh_schedule* sched, int64_t n, int64_t* out) {
    if (auto rc = require(sched != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] {
        const auto sizes = mesh::cohort_sizes(n, sched->sched);
        for (std::size_t i = 0; i < sizes.size(); ++i) out[i] = sizes[i];
    });
}

mesh_status mesh_equivalent_rs_budget(const mesh_schedule* sched, int64_t n, int64_t* out) {
    if (auto rc = require(sched != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] { *out = mesh::equivalent_rs_budget(n, sched->sched); });
}

void mesh_schedule_free(mesh_schedule* sched) { delete sched; }

mesh_status mesh_dataset_load_csv(const char* csv_path, const char* split_json_path,
                                  mesh_dataset** out) {
    if (auto rc = require(csv_path != nullptr && split_json_path != nullptr && out != nullptr,
                          "null argument")) {
        return rc;
    }
    return guarded([&] {
        auto handle = std::make_unique<mesh_dataset>();
        handle->ds = mesh::Dataset::load_csv(csv_path, split_json_path);
        *out = handle.release();
    });
}

mesh_status mesh_dataset_open(const char* path, mesh_dataset** out) {
    if (auto rc = require(path != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] {
        auto handle = std::make_unique<mesh_dataset>();
        handle->ds = mesh::synth::load_dataset_path(path);
        *out = handle.release();
    });
}

const char* mesh_dataset_id(const mesh_dataset* ds) {
    return ds == nullptr ? "" : ds->ds.id.c_str();
}

mesh_status mesh_dataset_metafeatures(const mesh_dataset* ds,
                                      double out[MESH_NUM_DATASET_METAFEATURES]) {
    if (auto rc = require(ds != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] {
        const auto mf = mesh::compute_dataset_metafeatures(ds->ds);
        for (std::size_t i = 0; i < mf.values.size(); ++i) out[i] = mf.values[i];
    });
}

void mesh_dataset_free(mesh_dataset* ds) { delete ds; }

mesh_status mesh_table_load(const char* path, mesh_table** out) {
    if (auto rc = require(path != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] {
        auto handle = std::make_unique<mesh_table>();
        handle->table = std::make_shared<const mesh::LossCurveTable>(
            mesh::LossCurveTable::load(path));
        *out = handle.release();
    });
}

size_t mesh_table_size(const mesh_table* table) {
    return table == nullptr ? 0 : table->table->entries.size();
}

const char* mesh_table_dataset_id(const mesh_table* table) {
    return table == nullptr ? "" : table->table->dataset_id.c_str();
}

void mesh_table_free(mesh_table* table) { delete table; }

mesh_status mesh_evaluator_gbdt(const mesh_dataset* ds, const mesh_space* space,
                                mesh_evaluator** out) {
    if (auto rc = require(ds != nullptr && space != nullptr && out != nullptr,
                          "null argument")) {
        return rc;
    }
    return guarded([&] {
        auto handle = std::make_unique<mesh_evaluator>();
        handle->evaluator = std::make_unique<mesh::GbdtEvaluator>(ds->ds, space->space);
        *out = handle.release();
    });
}

mesh_status mesh_evaluator_replay(const mesh_table* table, mesh_evaluator** out) {
    if (auto rc = require(table != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] {
        auto handle = std::make_unique<mesh_evaluator>();
        handle->evaluator = std::make_unique<mesh::ReplayEvaluator>(*table->table);
        *out = handle.release();
    });
}

int64_t mesh_evaluator_resource_charged(const mesh_evaluator* evaluator) {
    return evaluator == nullptr ? 0 : evaluator->evaluator->resource_charged();
}

void mesh_evaluator_free(mesh_evaluator* evaluator) { delete evaluator; }

mesh_status mesh_bundle_load(const char* path, mesh_bundle** out) {
    if (auto rc = require(path != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] {
        auto handle = std::make_unique<mesh_bundle>();
        handle->bundle = std::make_unique<mesh::TrainedBundle>(mesh::TrainedBundle::load(path));
        *out = handle.release();
    });
}

mesh_status mesh_bundle_passthrough(mesh_bundle** out) {
    if (auto rc = require(out != nullptr, "null argument")) return rc;
    return guarded([&] {
        auto handle = std::make_unique<mesh_bundle>();
        handle->bundle = std::make_unique<mesh::PassthroughBundle>();
        *out = handle.release();
    });
}

mesh_status mesh_bundle_oracle(const mesh_table* table, mesh_bundle** out) {
    if (auto rc = require(table != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] {
        auto handle = std::make_unique<mesh_bundle>();
        handle->bundle = std::make_unique<mesh::OracleBundle>(table->table);
        *out = handle.release();
    });
}

void mesh_bundle_free(mesh_bundle* bundle) { delete bundle; }

mesh_status mesh_run_random_search(mesh_evaluator* evaluator, const mesh_space* space, int64_t k,
                                   int64_t r_max, uint64_t seed, int workers,
                                   mesh_result** out) {
    if (auto rc = require(evaluator != nullptr && space != nullptr && out != nullptr,
                          "null argument")) {
        return rc;
    }
    return guarded([&] {
        mesh::TunerOptions opts;
        opts.workers = workers;
        auto handle = std::make_unique<mesh_result>();
        handle->space = space->space;
        handle->result = mesh::run_random_search(*evaluator->evaluator, space->space, k, r_max,
                                                 seed, opts);
        *out = handle.release();
    });
}

mesh_status mesh_run_successive_halving(mesh_evaluator* evaluator, const mesh_space* space,
                                        int64_t n, const mesh_schedule* sched, uint64_t seed,
                                        int workers, mesh_result** out) {
    if (auto rc = require(evaluator != nullptr && space != nullptr && sched != nullptr &&
                              out != nullptr,
                          "null argument")) {
        return rc;
    }
    return guarded([&] {
        mesh::TunerOptions opts;
        opts.workers = workers;
        auto handle = std::make_unique<mesh_result>();
        handle->space = space->space;
        handle->result = mesh::run_successive_halving(*evaluator->evaluator, space->space, n,
                                                      sched->sched, seed, opts);
        *out = handle.release();
    });
}

mesh_status mesh_run_mesh(mesh_evaluator* evaluator, const mesh_space* space, int64_t n,
                          const mesh_schedule* sched, const mesh_bundle* bundle,
                          const double* dataset_mf, uint64_t seed, int workers,
                          mesh_result** out) {
    if (auto rc = require(evaluator != nullptr && space != nullptr && sched != nullptr &&
                              bundle != nullptr && out != nullptr,
                          "null argument")) {
        return rc;
    }
    return guarded([&] {
        std::optional<mesh::DatasetMetaFeatures> mf;
        if (dataset_mf != nullptr) {
            mesh::DatasetMetaFeatures value;
            for (std::size_t i = 0; i < value.values.size(); ++i) value.values[i] = dataset_mf[i];
            mf = value;
        } else {
            mf = evaluator->evaluator->dataset_metafeatures();
        }
        mesh::TunerOptions opts;
        opts.workers = workers;
        auto handle = std::make_unique<mesh_result>();
        handle->space = space->space;
        handle->result = mesh::run_mesh(*evaluator->evaluator, space->space, n, sched->sched,
                                        *bundle->bundle, mf, seed, opts);
        *out = handle.release();
    });
}

double mesh_result_best_loss(const mesh_result* result) {
    return result == nullptr ? std::nan("") : result->result.best_loss;
}

int64_t mesh_result_resource_spent(const mesh_result* result) {
    return result == nullptr ? 0 : result->result.resource_spent;
}

mesh_status mesh_result_best_config_json(const mesh_result* result, char** out_json) {
    if (auto rc = require(result != nullptr && out_json != nullptr, "null argument")) return rc;
    return guarded([&] {
        nlohmann::json j{
            {"config_id", result->result.best_config.id.str()},
            {"values", result->space.values_json(result->result.best_config)},
            {"best_loss", result->result.best_loss}};
        *out_json = copy_string(j.dump());
    });
}

mesh_status mesh_result_trace_json(const mesh_result* result, char** out_json) {
    if (auto rc = require(result != nullptr && out_json != nullptr, "null argument")) return rc;
    return guarded([&] {
        nlohmann::json trace = nlohmann::json::array();
        for (const auto& round : result->result.elimination_trace) {
            nlohmann::json ids = nlohmann::json::array();
            for (const auto& id : round) ids.push_back(id.str());
            trace.push_back(ids);
        }
        *out_json = copy_string(trace.dump());
    });
}

mesh_status mesh_result_write_log(const mesh_result* result, const char* path) {
    if (auto rc = require(result != nullptr && path != nullptr, "null argument")) return rc;
    return guarded([&] { result->result.write_log(path, nlohmann::json::object()); });
}

void mesh_result_free(mesh_result* result) { delete result; }

mesh_status mesh_build_metadataset(const char* const* table_paths, size_t n_tables,
                                   const mesh_space* space, const mesh_schedule* sched,
                                   const char* out_path) {
    if (auto rc = require(table_paths != nullptr && space != nullptr && sched != nullptr &&
                              out_path != nullptr,
                          "null argument")) {
        return rc;
    }
    return guarded([&] {
        std::vector<mesh::LossCurveTable> tables;
        tables.reserve(n_tables);
        for (size_t i = 0; i < n_tables; ++i) {
            tables.push_back(mesh::LossCurveTable::load(table_paths[i]));
        }
        const auto md = mesh::build_metadataset(tables, space->space, sched->sched);
        md.save(out_path);
    });
}

mesh_status mesh_train_meta(const char* metadataset_path, const char* kind,
                            const char* const* exclude_ids, size_t n_exclude, int folds,
                            uint64_t seed, const char* bundle_out_path) {
    if (auto rc = require(metadataset_path != nullptr && kind != nullptr &&
                              bundle_out_path != nullptr,
                          "null argument")) {
        return rc;
    }
    return guarded([&] {
        const auto md = mesh::MetaDataset::load(metadataset_path);
        std::set<std::string> exclude;
        for (size_t i = 0; i < n_exclude; ++i) {
            exclude.insert(exclude_ids[i]);
        }
        const auto bundle = mesh::train_meta_models(md, mesh::regressor_kind_from_str(kind),
                                                    exclude, folds, seed);
        bundle.save(bundle_out_path);
    });
}

mesh_status mesh_crossover_stats(const mesh_table* table, double* out, size_t out_len) {
    if (auto rc = require(table != nullptr && out != nullptr, "null argument")) return rc;
    return guarded([&] {
        const auto rows = mesh::crossover_stats(*table->table);
        if (out_len < rows.size()) {
            throw mesh::ContractViolation("output buffer holds " + std::to_string(out_len) +
                                          " doubles, need " + std::to_string(rows.size()));
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out[i] = rows[i].rank_correlation.value_or(std::nan(""));
        }
    });
}

mesh_status mesh_cmd_run(const char* command, const char* config_json) {
    if (auto rc = require(command != nullptr && config_json != nullptr, "null argument")) {
        return rc;
    }
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::exception& e) {
            throw mesh::ConfigError(std::string("invalid config JSON: ") + e.what());
        }
        mesh::run_command(command, j);
    });
}

}  // extern "C"
