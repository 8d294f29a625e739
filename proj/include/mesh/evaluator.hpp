#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mesh/curve_table.hpp"
#include "mesh/dataset.hpp"
#include "mesh/gbdt.hpp"
#include "mesh/metafeatures.hpp"
#include "mesh/space.hpp"

namespace mesh {

struct EarlyStopResult {
    double best_loss = 0.0;
    std::int64_t stopped_at = 0;  // rounds actually trained
};

// Train-and-score backend behind one contract. Budget accounting follows
// the ladder convention: an evaluation at resource r charges r units
// (stopped_at units when early stopping cuts a run short), matching
// sum(n_i * r_i) for a full halving run. Warm state makes the *compute*
// cost of ascending evaluations equal to one training run; compute is
// instrumented separately where it exists (GbdtEvaluator::trees_trained).
class Evaluator {
public:
    virtual ~Evaluator() = default;

    // n candidate configurations for a tuning run, deterministic in seed and
    // prefix-stable (the first m of n candidates equal a request for m).
    virtual std::vector<Configuration> sample_candidates(std::int64_t n, std::uint64_t seed) = 0;

    // Validation loss at `resource` units, reusing warm state per config.
    virtual double evaluate(const Configuration& config, std::int64_t resource) = 0;

    // Best validation loss over rounds 1..stopped_at; stops once the loss
    // has failed to improve for `patience` consecutive rounds.
    virtual EarlyStopResult evaluate_early_stopped(const Configuration& config,
                                                   std::int64_t r_max,
                                                   std::int64_t patience) = 0;

    virtual const HyperparamSpace& space() const = 0;
    virtual const std::string& dataset_id() const = 0;
    virtual std::optional<DatasetMetaFeatures> dataset_metafeatures() const = 0;

    std::int64_t resource_charged() const { return charged_.load(); }

protected:
    void charge(std::int64_t units) { charged_.fetch_add(units); }

private:
    std::atomic<std::int64_t> charged_{0};
};

// Native GBDT backend; the resource is the number of boosting rounds.
// Distinct configurations may evaluate concurrently: each holds its own
// trainer, and feature-subset streams are keyed by (config id, round), so
// results are independent of the parallel schedule.
class GbdtEvaluator : public Evaluator {
public:
    GbdtEvaluator(Dataset ds, HyperparamSpace space);

    std::vector<Configuration> sample_candidates(std::int64_t n, std::uint64_t seed) override;
    double evaluate(const Configuration& config, std::int64_t resource) override;
    EarlyStopResult evaluate_early_stopped(const Configuration& config, std::int64_t r_max,
                                           std::int64_t patience) override;

    const HyperparamSpace& space() const override { return space_; }
    const std::string& dataset_id() const override { return dataset_.id; }
    std::optional<DatasetMetaFeatures> dataset_metafeatures() const override;

    // Actual fits across all configurations (warm continuation counts only
    // the newly trained delta).
    std::int64_t trees_trained() const { return trees_trained_.load(); }

private:
    gbdt::Trainer& trainer_for(const Configuration& config);

    Dataset dataset_;
    HyperparamSpace space_;
    std::shared_ptr<const gbdt::TrainData> data_;
    std::map<ConfigId, std::unique_ptr<gbdt::Trainer>> trainers_;
    std::mutex trainers_mutex_;
    std::atomic<std::int64_t> trees_trained_{0};
};

// Pure-lookup backend over a recorded loss-curve table; used for
// deterministic tuner tests and replay experiments.
class ReplayEvaluator : public Evaluator {
public:
    explicit ReplayEvaluator(LossCurveTable table);

    std::vector<Configuration> sample_candidates(std::int64_t n, std::uint64_t seed) override;
    double evaluate(const Configuration& config, std::int64_t resource) override;
    // No curve finer than the recorded levels exists, so replay runs to
    // r_max and returns the recorded loss there.
    EarlyStopResult evaluate_early_stopped(const Configuration& config, std::int64_t r_max,
                                           std::int64_t patience) override;

    const HyperparamSpace& space() const override { return table_.space; }
    const std::string& dataset_id() const override { return table_.dataset_id; }
    std::optional<DatasetMetaFeatures> dataset_metafeatures() const override {
        return table_.dataset_mf;
    }

    const LossCurveTable& table() const { return table_; }

private:
    LossCurveTable table_;
};

}  // namespace mesh
