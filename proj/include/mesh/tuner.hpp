#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mesh/bundle.hpp"
#include "mesh/evaluator.hpp"
#include "mesh/schedule.hpp"
#include "mesh/space.hpp"

namespace mesh {

// One configuration's observed loss curve within a tuning run.
struct TrialRecord {
    std::string dataset_id;
    Configuration config;
    std::map<int, double> losses;  // round index -> validation loss
    std::optional<std::int64_t> stopped_early_at;
};

struct RoundLogRecord {
    int round = 0;
    ConfigId config_id;
    std::int64_t resource = 0;
    double observed = 0.0;
    std::optional<double> predicted;  // meta-driven runs only
    bool survived = false;
};

struct TuneResult {
    Configuration best_config;
    // Minimum validation loss among top-resource evaluations. Intermediate
    // losses are recorded in `trials` and `log` but never reported as the
    // run's result.
    double best_loss = 0.0;
    std::vector<TrialRecord> trials;
    std::int64_t resource_spent = 0;
    // Per elimination round, the surviving config ids in id order.
    std::vector<std::vector<ConfigId>> elimination_trace;
    std::vector<RoundLogRecord> log;

    // JSON-lines run log: a header record followed by one record per
    // (round, config). The elimination trace is reconstructible from the
    // survived flags alone.
    void write_log(const std::string& path, const nlohmann::json& header) const;
};

struct TunerOptions {
    int workers = 1;
    // Early stopping applies to random search at the maximal resource; the
    // halving ladder is itself the stopping mechanism, so inside SH rounds
    // it stays off unless overridden.
    bool rs_early_stopping = true;
    std::int64_t patience = 50;
};

// The k configs with the smallest scores; ties broken by lower config id.
// Returned in (score, id) order. Throws ContractViolation when lengths
// differ or k is out of range.
std::vector<Configuration> top_k(const std::vector<Configuration>& configs,
                                 const std::vector<double>& scores, std::size_t k);

TuneResult run_random_search(Evaluator& evaluator, const HyperparamSpace& space, std::int64_t k,
                             std::int64_t r_max, std::uint64_t seed,
                             const TunerOptions& opts = {});

TuneResult run_successive_halving(Evaluator& evaluator, const HyperparamSpace& space,
                                  std::int64_t n, const ResourceSchedule& sched,
                                  std::uint64_t seed, const TunerOptions& opts = {});

TuneResult run_mesh(Evaluator& evaluator, const HyperparamSpace& space, std::int64_t n,
                    const ResourceSchedule& sched, const MetaModelBundle& bundle,
                    const std::optional<DatasetMetaFeatures>& dataset_mf, std::uint64_t seed,
                    const TunerOptions& opts = {});

}  // namespace mesh
