/*
 * C API of the mesh hyperparameter-tuning engine.
 *
 * The library exposes the tuning core behind opaque handles and status
 * codes so it can be embedded from C or any FFI. Handles are created by
 * mesh_*_create/load functions and released with the matching mesh_*_free;
 * strings returned through char** out-parameters are released with
 * mesh_string_free. On any failure a function returns a nonzero status and
 * mesh_last_error() carries a thread-local message.
 */

#ifndef MESH_H
#define MESH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MESH_API __declspec(dllexport)
#else
#define MESH_API __attribute__((visibility("default")))
#endif

typedef enum mesh_status {
    MESH_OK = 0,
    MESH_ERROR = 1,              /* unexpected failure */
    MESH_CONFIG_ERROR = 2,       /* invalid experiment setup */
    MESH_DATA_ERROR = 3,         /* malformed or inconsistent data */
    MESH_LEAKAGE_ERROR = 4,      /* bundle provenance overlaps the target */
    MESH_CONTRACT_ERROR = 5,     /* broken caller contract */
    MESH_NUMERIC_ERROR = 6       /* non-finite values during training */
} mesh_status;

typedef struct mesh_space mesh_space;         /* hyperparameter search space */
typedef struct mesh_schedule mesh_schedule;   /* geometric resource ladder */
typedef struct mesh_dataset mesh_dataset;     /* binary-classification data */
typedef struct mesh_table mesh_table;         /* recorded loss curves */
typedef struct mesh_evaluator mesh_evaluator; /* train-and-score backend */
typedef struct mesh_bundle mesh_bundle;       /* per-round meta-models */
typedef struct mesh_result mesh_result;       /* one tuning run's outcome */

#define MESH_NUM_DATASET_METAFEATURES 15

MESH_API const char* mesh_version(void);
MESH_API const char* mesh_last_error(void);
MESH_API void mesh_string_free(char* s);

/* --- search spaces ------------------------------------------------------ */

MESH_API mesh_status mesh_space_from_json(const char* json, mesh_space** out);
MESH_API mesh_status mesh_space_load(const char* path, mesh_space** out);
MESH_API size_t mesh_space_param_count(const mesh_space* space);
MESH_API void mesh_space_free(mesh_space* space);

/* n configurations sampled uniformly on each parameter's scale, returned as
 * a JSON array of {"config_id": ..., "values": {...}} objects. */
MESH_API mesh_status mesh_sample_configurations_json(const mesh_space* space, int64_t n,
                                                     uint64_t seed, char** out_json);

/* --- resource schedules ------------------------------------------------- */

MESH_API mesh_status mesh_schedule_build(int64_t r_min, int64_t r_max, double eta,
                                         mesh_schedule** out);
MESH_API int mesh_schedule_num_rounds(const mesh_schedule* sched);
MESH_API int64_t mesh_schedule_resource_at(const mesh_schedule* sched, int round);
/* out must hold mesh_schedule_num_rounds entries. */
MESH_API mesh_status mesh_cohort_sizes(const mesh_schedule* sched, int64_t n, int64_t* out);
MESH_API mesh_status mesh_equivalent_rs_budget(const mesh_schedule* sched, int64_t n,
                                               int64_t* out);
MESH_API void mesh_schedule_free(mesh_schedule* sched);

/* --- datasets and curve tables ------------------------------------------ */

MESH_API mesh_status mesh_dataset_load_csv(const char* csv_path, const char* split_json_path,
                                           mesh_dataset** out);
/* Accepts "synth:..." specifications as well as CSV paths. */
MESH_API mesh_status mesh_dataset_open(const char* path, mesh_dataset** out);
MESH_API const char* mesh_dataset_id(const mesh_dataset* ds);
MESH_API mesh_status mesh_dataset_metafeatures(const mesh_dataset* ds,
                                               double out[MESH_NUM_DATASET_METAFEATURES]);
MESH_API void mesh_dataset_free(mesh_dataset* ds);

MESH_API mesh_status mesh_table_load(const char* path, mesh_table** out);
MESH_API size_t mesh_table_size(const mesh_table* table);
MESH_API const char* mesh_table_dataset_id(const mesh_table* table);
MESH_API void mesh_table_free(mesh_table* table);

/* --- evaluators ---------------------------------------------------------- */

MESH_API mesh_status mesh_evaluator_gbdt(const mesh_dataset* ds, const mesh_space* space,
                                         mesh_evaluator** out);
MESH_API mesh_status mesh_evaluator_replay(const mesh_table* table, mesh_evaluator** out);
/* Ladder-convention resource units charged so far. */
MESH_API int64_t mesh_evaluator_resource_charged(const mesh_evaluator* evaluator);
MESH_API void mesh_evaluator_free(mesh_evaluator* evaluator);

/* --- meta-model bundles -------------------------------------------------- */

MESH_API mesh_status mesh_bundle_load(const char* path, mesh_bundle** out);
MESH_API mesh_status mesh_bundle_passthrough(mesh_bundle** out);
MESH_API mesh_status mesh_bundle_oracle(const mesh_table* table, mesh_bundle** out);
MESH_API void mesh_bundle_free(mesh_bundle* bundle);

/* --- tuners --------------------------------------------------------------
 * All runs are deterministic in (seed, inputs), independent of `workers`. */

MESH_API mesh_status mesh_run_random_search(mesh_evaluator* evaluator, const mesh_space* space,
                                            int64_t k, int64_t r_max, uint64_t seed,
                                            int workers, mesh_result** out);
MESH_API mesh_status mesh_run_successive_halving(mesh_evaluator* evaluator,
                                                 const mesh_space* space, int64_t n,
                                                 const mesh_schedule* sched, uint64_t seed,
                                                 int workers, mesh_result** out);
/* dataset_mf may be NULL; the evaluator's own meta-features are used then. */
MESH_API mesh_status mesh_run_mesh(mesh_evaluator* evaluator, const mesh_space* space, int64_t n,
                                   const mesh_schedule* sched, const mesh_bundle* bundle,
                                   const double* dataset_mf, uint64_t seed, int workers,
                                   mesh_result** out);

MESH_API double mesh_result_best_loss(const mesh_result* result);
MESH_API int64_t mesh_result_resource_spent(const mesh_result* result);
MESH_API mesh_status mesh_result_best_config_json(const mesh_result* result, char** out_json);
/* Elimination trace as a JSON array of per-round config-id arrays. */
MESH_API mesh_status mesh_result_trace_json(const mesh_result* result, char** out_json);
MESH_API mesh_status mesh_result_write_log(const mesh_result* result, const char* path);
MESH_API void mesh_result_free(mesh_result* result);

/* --- offline phase -------------------------------------------------------- */

MESH_API mesh_status mesh_build_metadataset(const char* const* table_paths, size_t n_tables,
                                            const mesh_space* space, const mesh_schedule* sched,
                                            const char* out_path);
MESH_API mesh_status mesh_train_meta(const char* metadataset_path, const char* kind,
                                     const char* const* exclude_ids, size_t n_exclude,
                                     int folds, uint64_t seed, const char* bundle_out_path);

/* Per-round rank correlation between losses at r_i and the top resource;
 * out must hold one double per schedule round, NaN marks an undefined value. */
MESH_API mesh_status mesh_crossover_stats(const mesh_table* table, double* out, size_t out_len);

/* --- command layer --------------------------------------------------------
 * The same engine the CLI drives: command is one of "generate-curves",
 * "build-metadataset", "train-meta", "compare", "diagnostics"; config_json
 * is the experiment-config document. */
MESH_API mesh_status mesh_cmd_run(const char* command, const char* config_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MESH_H */
