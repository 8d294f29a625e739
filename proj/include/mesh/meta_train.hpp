#pragma once

#include <functional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "mesh/bundle.hpp"
#include "mesh/metadataset.hpp"
#include "mesh/regressors.hpp"

namespace mesh {

enum class RegressorKind { Knn, Gbdt, Mlp };

RegressorKind regressor_kind_from_str(const std::string& s);
std::string regressor_kind_str(RegressorKind kind);

// One fitted per-round meta-regressor with its training-time
// standardization statistics.
struct MetaModel {
    RegressorKind kind = RegressorKind::Knn;
    int round = 0;
    int expected_width = 0;
    Standardizer standardizer;
    nlohmann::json hyperparams;  // chosen grid point, or the fixed defaults
    double cv_mse = std::numeric_limits<double>::quiet_NaN();
    std::variant<KnnRegressor, GbdtRegressor, MlpRegressor> regressor;

    // Raw (unstandardized) features; throws ContractViolation on width
    // mismatch, naming the round.
    double predict(const std::vector<double>& features) const;

    nlohmann::json to_json() const;
    static MetaModel from_json(const nlohmann::json& j);
};

// Bundle of per-round trained meta-models. Landmark recipe: round i consumes
// the observed losses of rounds 0..i-1 only.
class TrainedBundle : public MetaModelBundle {
public:
    TrainedBundle() = default;

    bool covers(int round) const override;
    std::vector<int> landmark_rounds(int round) const override;
    double predict(int round, const DatasetMetaFeatures* dataset_mf, const HyperparamSpace& space,
                   const Configuration& config,
                   const std::vector<double>& landmarks) const override;
    const std::vector<std::string>& provenance() const override { return provenance_; }
    std::string describe() const override;

    const std::vector<MetaModel>& models() const { return models_; }
    const HyperparamSpace& space() const { return space_; }
    const ResourceSchedule& schedule() const { return schedule_; }

    void save(const std::string& path) const;
    static TrainedBundle load(const std::string& path);

    friend TrainedBundle train_meta_models(const MetaDataset& md, RegressorKind kind,
                                           const std::set<std::string>& exclude_datasets,
                                           int folds, std::uint64_t seed);

private:
    std::vector<MetaModel> models_;  // index = round
    std::vector<std::string> provenance_;
    HyperparamSpace space_;
    ResourceSchedule schedule_;
};

// Offline phase: per round, grid-search the regressor's own hyperparameters
// by k-fold cross-validation with folds grouped by dataset id (never split
// by row), then refit the winner on all included examples. Examples from
// `exclude_datasets` are dropped entirely. The MLP kind trains once with
// fixed defaults and no grid.
TrainedBundle train_meta_models(const MetaDataset& md, RegressorKind kind,
                                const std::set<std::string>& exclude_datasets, int folds,
                                std::uint64_t seed);

struct MseRow {
    int round = 0;
    std::int64_t resource = 0;
    std::size_t count = 0;
    double mse = 0.0;
};

// Per-round MSE of an arbitrary per-example predictor on held-out examples.
std::vector<MseRow> offline_mse_report(
    const std::function<double(const MetaExample&)>& predictor, const MetaDataset& held_out);

// Same, evaluating a trained bundle's per-round models.
std::vector<MseRow> offline_mse_report(const TrainedBundle& bundle, const MetaDataset& held_out);

}  // namespace mesh
