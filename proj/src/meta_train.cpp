#include "mesh/meta_train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "mesh/errors.hpp"
#include "mesh/rng.hpp"
#include "mesh/version.hpp"

namespace mesh {

RegressorKind regressor_kind_from_str(const std::string& s) {
    if (s == "knn") return RegressorKind::Knn;
    if (s == "gbdt") return RegressorKind::Gbdt;
    if (s == "mlp") return RegressorKind::Mlp;
    throw ConfigError("unknown regressor kind '" + s + "' (expected knn, gbdt or mlp)");
}

std::string regressor_kind_str(RegressorKind kind) {
    switch (kind) {
        case RegressorKind::Knn: return "knn";
        case RegressorKind::Gbdt: return "gbdt";
        case RegressorKind::Mlp: return "mlp";
    }
    return "unknown";
}

double MetaModel::predict(const std::vector<double>& features) const {
    if (static_cast<int>(features.size()) != expected_width) {
        throw ContractViolation("meta-model for round " + std::to_string(round) +
                                " expected width " + std::to_string(expected_width) + ", got " +
                                std::to_string(features.size()));
    }
    const auto z = standardizer.apply(features);
    return std::visit([&](const auto& reg) { return reg.predict(z); }, regressor);
}

nlohmann::json MetaModel::to_json() const {
    nlohmann::json j{{"kind", regressor_kind_str(kind)},
                     {"round", round},
                     {"expected_width", expected_width},
                     {"hyperparams", hyperparams},
                     {"standardization", standardizer.to_json()}};
    if (std::isfinite(cv_mse)) j["cv_mse"] = cv_mse;
    std::visit([&](const auto& reg) { j["model"] = reg.to_json(); }, regressor);
    return j;
}

MetaModel MetaModel::from_json(const nlohmann::json& j) {
    MetaModel m;
    m.kind = regressor_kind_from_str(j.at("kind").get<std::string>());
    m.round = j.at("round").get<int>();
    m.expected_width = j.at("expected_width").get<int>();
    m.hyperparams = j.at("hyperparams");
    m.standardizer = Standardizer::from_json(j.at("standardization"));
    if (j.contains("cv_mse")) m.cv_mse = j["cv_mse"].get<double>();
    switch (m.kind) {
        case RegressorKind::Knn:
            m.regressor = KnnRegressor::from_json(j.at("model"));
            break;
        case RegressorKind::Gbdt:
            m.regressor = GbdtRegressor::from_json(j.at("model"));
            break;
        case RegressorKind::Mlp:
            m.regressor = MlpRegressor::from_json(j.at("model"));
            break;
    }
    return m;
}

bool TrainedBundle::covers(int round) const {
    return round >= 0 && round < static_cast<int>(models_.size());
}

std::vector<int> TrainedBundle::landmark_rounds(int round) const {
    std::vector<int> rounds;
    rounds.reserve(static_cast<std::size_t>(round));
    for (int j = 0; j < round; ++j) rounds.push_back(j);
    return rounds;
}

double TrainedBundle::predict(int round, const DatasetMetaFeatures* dataset_mf,
                              const HyperparamSpace& space, const Configuration& config,
                              const std::vector<double>& landmarks) const {
    if (!covers(round)) {
        throw ConfigError("bundle has no meta-model for round " + std::to_string(round));
    }
    if (dataset_mf == nullptr) {
        throw ConfigError("trained bundle needs dataset meta-features");
    }
    if (!space.same_layout(space_)) {
        throw ConfigError("bundle was trained on a different search space");
    }
    std::vector<double> features;
    features.reserve(dataset_mf->values.size() + space.size() + landmarks.size());
    features.insert(features.end(), dataset_mf->values.begin(), dataset_mf->values.end());
    const auto config_features = space.config_metafeatures(config);
    features.insert(features.end(), config_features.begin(), config_features.end());
    features.insert(features.end(), landmarks.begin(), landmarks.end());
    return models_[static_cast<std::size_t>(round)].predict(features);
}

std::string TrainedBundle::describe() const {
    if (models_.empty()) return "trained(empty)";
    return "trained(" + regressor_kind_str(models_.front().kind) + ")";
}

void TrainedBundle::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write bundle file '" + path + "'");
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& m : models_) rounds.push_back(m.to_json());
    const nlohmann::json j{
        {"feature_set_version", kFeatureSetVersion},
        {"tool_version", kToolVersion},
        {"schedule",
         {{"r_min", schedule_.r_min}, {"r_max", schedule_.r_max}, {"eta", schedule_.eta}}},
        {"space", space_.to_json()},
        {"provenance", provenance_},
        {"rounds", rounds}};
    out << j.dump(2) << "\n";
}

TrainedBundle TrainedBundle::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open bundle file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("invalid JSON in bundle file '" + path + "': " + e.what());
    }
    TrainedBundle bundle;
    const auto version = j.at("feature_set_version").get<std::string>();
    if (version != kFeatureSetVersion) {
        throw DataError("bundle '" + path + "' has feature set version '" + version +
                        "', this build uses '" + kFeatureSetVersion + "'");
    }
    const auto& sj = j.at("schedule");
    bundle.schedule_ =
        build_schedule(sj.at("r_min").get<std::int64_t>(), sj.at("r_max").get<std::int64_t>(),
                       sj.at("eta").get<double>());
    bundle.space_ = HyperparamSpace::from_json(j.at("space"));
    bundle.provenance_ = j.at("provenance").get<std::vector<std::string>>();
    for (const auto& rj : j.at("rounds")) {
        bundle.models_.push_back(MetaModel::from_json(rj));
    }
    for (std::size_t i = 0; i < bundle.models_.size(); ++i) {
        if (bundle.models_[i].round != static_cast<int>(i)) {
            throw DataError("bundle '" + path + "' has out-of-order rounds");
        }
    }
    return bundle;
}

namespace {

struct GridPoint {
    nlohmann::json description;
    std::function<std::variant<KnnRegressor, GbdtRegressor, MlpRegressor>(
        const std::vector<std::vector<double>>&, const std::vector<double>&)>
        fit;
};

std::vector<GridPoint> grid_for(RegressorKind kind, std::uint64_t mlp_seed) {
    std::vector<GridPoint> grid;
    switch (kind) {
        case RegressorKind::Knn: {
            for (int k : {1, 3, 5, 11, 25}) {
                grid.push_back({nlohmann::json{{"k", k}},
                                [k](const auto& x, const auto& y) {
                                    return std::variant<KnnRegressor, GbdtRegressor,
                                                        MlpRegressor>(KnnRegressor(k, x, y));
                                }});
            }
            break;
        }
        case RegressorKind::Gbdt: {
            for (int depth : {3, 5}) {
                for (std::int64_t rounds : {100, 300}) {
                    for (double lr : {0.05, 0.1}) {
                        GbdtRegressor::Params p;
                        p.max_depth = depth;
                        p.rounds = rounds;
                        p.learning_rate = lr;
                        grid.push_back(
                            {nlohmann::json{{"max_depth", depth},
                                            {"rounds", rounds},
                                            {"learning_rate", lr},
                                            {"lambda", p.lambda}},
                             [p](const auto& x, const auto& y) {
                                 return std::variant<KnnRegressor, GbdtRegressor, MlpRegressor>(
                                     GbdtRegressor::fit(x, y, p));
                             }});
                    }
                }
            }
            break;
        }
        case RegressorKind::Mlp: {
            MlpRegressor::Params p;
            p.seed = mlp_seed;
            grid.push_back({nlohmann::json{{"hidden", p.hidden},
                                           {"epochs", p.epochs},
                                           {"batch_size", p.batch_size},
                                           {"step_size", p.step_size}},
                            [p](const auto& x, const auto& y) {
                                return std::variant<KnnRegressor, GbdtRegressor, MlpRegressor>(
                                    MlpRegressor::fit(x, y, p));
                            }});
            break;
        }
    }
    return grid;
}

double predict_variant(const std::variant<KnnRegressor, GbdtRegressor, MlpRegressor>& reg,
                       const std::vector<double>& x) {
    return std::visit([&](const auto& r) { return r.predict(x); }, reg);
}

}  // namespace

TrainedBundle train_meta_models(const MetaDataset& md, RegressorKind kind,
                                const std::set<std::string>& exclude_datasets, int folds,
                                std::uint64_t seed) {
    if (folds < 2) throw ConfigError("cross-validation requires folds >= 2");

    TrainedBundle bundle;
    bundle.space_ = md.space;
    bundle.schedule_ = md.schedule;
    for (const auto& id : md.provenance) {
        if (!exclude_datasets.count(id)) bundle.provenance_.push_back(id);
    }

    // One dataset->fold assignment shared by every round.
    std::vector<std::string> ids = bundle.provenance_;
    std::sort(ids.begin(), ids.end());
    Rng fold_rng(mix_seed(seed, 0xF01D5));
    fold_rng.shuffle(ids);
    std::map<std::string, int> fold_of;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        fold_of[ids[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }

    const bool cross_validate = kind != RegressorKind::Mlp;
    const auto grid = grid_for(kind, seed);

    for (int round = 0; round < md.schedule.num_rounds(); ++round) {
        std::vector<std::vector<double>> features;
        std::vector<double> targets;
        std::vector<int> fold_idx;
        std::set<std::string> round_ids;
        for (const auto& ex : md.per_round[static_cast<std::size_t>(round)]) {
            if (exclude_datasets.count(ex.dataset_id)) continue;
            features.push_back(ex.features);
            targets.push_back(ex.target);
            fold_idx.push_back(fold_of.at(ex.dataset_id));
            round_ids.insert(ex.dataset_id);
        }
        if (features.empty()) {
            throw DataError("no examples left for round " + std::to_string(round) +
                            " after exclusions");
        }

        std::size_t best_point = 0;
        double best_mse = std::numeric_limits<double>::infinity();
        if (cross_validate) {
            if (static_cast<int>(round_ids.size()) < folds) {
                throw DataError("round " + std::to_string(round) + " has only " +
                                std::to_string(round_ids.size()) +
                                " distinct datasets, cannot form " + std::to_string(folds) +
                                " dataset-grouped folds");
            }
            for (std::size_t g = 0; g < grid.size(); ++g) {
                double se = 0.0;
                std::size_t count = 0;
                for (int f = 0; f < folds; ++f) {
                    std::vector<std::vector<double>> train_x, val_x;
                    std::vector<double> train_y, val_y;
                    for (std::size_t i = 0; i < features.size(); ++i) {
                        if (fold_idx[i] == f) {
                            val_x.push_back(features[i]);
                            val_y.push_back(targets[i]);
                        } else {
                            train_x.push_back(features[i]);
                            train_y.push_back(targets[i]);
                        }
                    }
                    if (train_x.empty() || val_x.empty()) continue;
                    const auto std_fit = Standardizer::fit(train_x);
                    const auto reg = grid[g].fit(std_fit.apply_all(train_x), train_y);
                    for (std::size_t i = 0; i < val_x.size(); ++i) {
                        const double d =
                            predict_variant(reg, std_fit.apply(val_x[i])) - val_y[i];
                        se += d * d;
                    }
                    count += val_x.size();
                }
                const double mse = se / static_cast<double>(count);
                if (mse < best_mse) {
                    best_mse = mse;
                    best_point = g;
                }
            }
        }

        MetaModel model;
        model.kind = kind;
        model.round = round;
        model.expected_width = md.width_for_round(round);
        model.hyperparams = grid[best_point].description;
        model.cv_mse = cross_validate ? best_mse : std::numeric_limits<double>::quiet_NaN();
        model.standardizer = Standardizer::fit(features);
        model.regressor =
            grid[best_point].fit(model.standardizer.apply_all(features), targets);
        bundle.models_.push_back(std::move(model));
    }
    return bundle;
}

std::vector<MseRow> offline_mse_report(
    const std::function<double(const MetaExample&)>& predictor, const MetaDataset& held_out) {
    std::vector<MseRow> rows;
    for (int round = 0; round < held_out.schedule.num_rounds(); ++round) {
        MseRow row;
        row.round = round;
        row.resource = held_out.schedule.resources[static_cast<std::size_t>(round)];
        double se = 0.0;
        for (const auto& ex : held_out.per_round[static_cast<std::size_t>(round)]) {
            const double d = predictor(ex) - ex.target;
            se += d * d;
            ++row.count;
        }
        row.mse = row.count > 0 ? se / static_cast<double>(row.count)
                                : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(row);
    }
    return rows;
}

std::vector<MseRow> offline_mse_report(const TrainedBundle& bundle, const MetaDataset& held_out) {
    return offline_mse_report(
        [&bundle](const MetaExample& ex) {
            if (!bundle.covers(ex.round)) {
                throw ConfigError("bundle has no meta-model for round " +
                                  std::to_string(ex.round));
            }
            return bundle.models()[static_cast<std::size_t>(ex.round)].predict(ex.features);
        },
        held_out);
}

}  // namespace mesh
