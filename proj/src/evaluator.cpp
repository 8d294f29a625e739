#include "mesh/evaluator.hpp"

#include <algorithm>
#include <limits>

#include "mesh/errors.hpp"
#include "mesh/rng.hpp"

namespace mesh {

GbdtEvaluator::GbdtEvaluator(Dataset ds, HyperparamSpace space)
    : dataset_(std::move(ds)), space_(std::move(space)) {
    dataset_.validate();
    data_ = std::make_shared<const gbdt::TrainData>(gbdt::TrainData::from_dataset(dataset_));
}

std::vector<Configuration> GbdtEvaluator::sample_candidates(std::int64_t n, std::uint64_t seed) {
    return sample_configurations(space_, n, seed);
}

gbdt::Trainer& GbdtEvaluator::trainer_for(const Configuration& config) {
    std::lock_guard<std::mutex> lock(trainers_mutex_);
    auto it = trainers_.find(config.id);
    if (it == trainers_.end()) {
        gbdt::Trainer::Options opts;
        opts.objective = gbdt::Objective::Logistic;
        opts.hp = gbdt::Hyperparams::from_config(space_, config);
        opts.rng_key = mix_seed(config.id.seed, config.id.index);
        it = trainers_
                 .emplace(config.id, std::make_unique<gbdt::Trainer>(data_, opts))
                 .first;
    }
    return *it->second;
}

double GbdtEvaluator::evaluate(const Configuration& config, std::int64_t resource) {
    auto& trainer = trainer_for(config);
    trees_trained_.fetch_add(trainer.advance_to(resource));
    charge(resource);
    return trainer.val_loss_at(resource);
}

EarlyStopResult GbdtEvaluator::evaluate_early_stopped(const Configuration& config,
                                                      std::int64_t r_max,
                                                      std::int64_t patience) {
    if (patience < 1) throw ContractViolation("patience must be >= 1");
    auto& trainer = trainer_for(config);

    EarlyStopResult result;
    result.best_loss = std::numeric_limits<double>::infinity();
    std::int64_t best_round = 0;
    std::int64_t round = 0;
    while (round < r_max) {
        ++round;
        trees_trained_.fetch_add(trainer.advance_to(round));
        const double loss = trainer.val_loss_at(round);
        if (loss < result.best_loss) {
            result.best_loss = loss;
            best_round = round;
        } else if (round - best_round >= patience) {
            break;
        }
    }
    result.stopped_at = round;
    charge(result.stopped_at);
    return result;
}

std::optional<DatasetMetaFeatures> GbdtEvaluator::dataset_metafeatures() const {
    return compute_dataset_metafeatures(dataset_);
}

ReplayEvaluator::ReplayEvaluator(LossCurveTable table) : table_(std::move(table)) {
    table_.sort_entries();
    table_.validate();
}

std::vector<Configuration> ReplayEvaluator::sample_candidates(std::int64_t n,
                                                              std::uint64_t seed) {
    if (n < 1) throw ContractViolation("sample_candidates requires n >= 1");
    if (static_cast<std::size_t>(n) > table_.entries.size()) {
        throw DataError("replay table '" + table_.dataset_id + "' has " +
                        std::to_string(table_.entries.size()) + " configs, requested " +
                        std::to_string(n));
    }
    std::vector<std::size_t> order(table_.entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<Configuration> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        out.push_back(table_.entries[order[static_cast<std::size_t>(i)]].config);
    }
    return out;
}

double ReplayEvaluator::evaluate(const Configuration& config, std::int64_t resource) {
    const CurveEntry* entry = table_.find(config.id);
    if (entry == nullptr) {
        throw DataError("replay table '" + table_.dataset_id + "' has no config " +
                        config.id.str());
    }
    const auto it = entry->losses.find(resource);
    if (it == entry->losses.end()) {
        throw DataError("replay table '" + table_.dataset_id + "': config " + config.id.str() +
                        " has no loss at resource " + std::to_string(resource));
    }
    charge(resource);
    return it->second;
}

EarlyStopResult ReplayEvaluator::evaluate_early_stopped(const Configuration& config,
                                                        std::int64_t r_max,
                                                        std::int64_t patience) {
    if (patience < 1) throw ContractViolation("patience must be >= 1");
    const double loss = evaluate(config, r_max);  // charges r_max
    return EarlyStopResult{loss, r_max};
}

}  // namespace mesh
