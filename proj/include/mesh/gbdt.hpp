#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <json.hpp>

#include "mesh/dataset.hpp"
#include "mesh/space.hpp"

namespace mesh::gbdt {

// Column-major feature matrix; training scans one feature at a time.
struct ColMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // cols * rows

    double at(std::size_t r, std::size_t c) const { return data[c * rows + r]; }
    const double* col(std::size_t c) const { return data.data() + c * rows; }

    static ColMatrix from_rows(const std::vector<std::vector<double>>& rows);
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // x < threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;
    double weight = 0.0;        // leaf value before learning-rate shrinkage
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(const std::vector<double>& x) const;
    double predict_col(const ColMatrix& m, std::size_t row) const;

    nlohmann::json to_json() const;  // nested node objects
    static Tree from_json(const nlohmann::json& j);
};

struct Hyperparams {
    double lambda = 1.0;            // leaf L2 regularization
    double colsample_bytree = 1.0;  // feature fraction per tree
    int max_depth = 6;
    double learning_rate = 0.1;

    // Reads the four tuned values out of a sampled configuration by name.
    static Hyperparams from_config(const HyperparamSpace& space, const Configuration& config);
};

enum class Objective { Logistic, SquaredError };

struct GbdtModel {
    Objective objective = Objective::Logistic;
    Hyperparams hp;
    double base_score = 0.0;  // margin space for logistic, raw for squared error
    std::vector<Tree> trees;

    std::int64_t trained_rounds() const { return static_cast<std::int64_t>(trees.size()); }
    double predict_margin(const std::vector<double>& x) const;
    // Probability for the logistic objective, raw value otherwise.
    double predict_value(const std::vector<double>& x) const;

    nlohmann::json to_json() const;
    static GbdtModel from_json(const nlohmann::json& j);
};

// Immutable per-split training context: columnized matrices plus presorted
// feature orders. Built once per dataset and shared by every configuration.
struct TrainData {
    ColMatrix train_x;
    ColMatrix val_x;  // may be empty
    std::vector<double> train_y;
    std::vector<double> val_y;
    std::vector<std::vector<std::int32_t>> sorted;  // per feature, train rows by value

    static TrainData from_dataset(const Dataset& ds);
    static TrainData from_rows(const std::vector<std::vector<double>>& x,
                               const std::vector<double>& y);
    void build_sorted();
};

// Incremental boosting: one Trainer per (configuration, dataset) pair.
// advance_to(r) grows the model to r trees; per-round train/validation
// losses are recorded so any earlier resource level can be read back.
class Trainer {
public:
    struct Options {
        Objective objective = Objective::Logistic;
        Hyperparams hp;
        // Per-tree feature subsets draw from a stream keyed by
        // (rng_key, tree index), so the result is independent of warm
        // continuation and of any parallel schedule.
        std::uint64_t rng_key = 0;
    };

    Trainer(std::shared_ptr<const TrainData> data, Options opts,
            const GbdtModel* warm_from = nullptr);

    // Extends the model to `rounds` trees; no-op when already there.
    // Returns the number of newly fitted trees.
    std::int64_t advance_to(std::int64_t rounds);

    const GbdtModel& model() const { return model_; }
    std::int64_t trained_rounds() const { return model_.trained_rounds(); }

    bool has_validation() const { return !data_->val_y.empty(); }
    // Loss after `round` trees; round 0 is the base-score-only loss.
    double val_loss_at(std::int64_t round) const;
    double train_loss_at(std::int64_t round) const;

private:
    void record_losses();
    void apply_tree(const Tree& tree);
    Tree fit_tree(std::int64_t tree_index, const std::vector<double>& grad,
                  const std::vector<double>& hess);
    void compute_gradients(std::vector<double>& grad, std::vector<double>& hess,
                           std::int64_t round) const;

    std::shared_ptr<const TrainData> data_;
    Options opts_;
    GbdtModel model_;
    std::vector<double> train_margin_;
    std::vector<double> val_margin_;
    std::vector<double> train_loss_history_;
    std::vector<double> val_loss_history_;
};

// One-call training facade. With warm_from, the existing trees are reused
// verbatim and only the remaining rounds are fitted; the result is
// bit-identical to a cold run at the same round count.
GbdtModel train(const Dataset& ds, const HyperparamSpace& space, const Configuration& config,
                std::int64_t rounds, const GbdtModel* warm_from = nullptr);

double base_score_for(Objective objective, const std::vector<double>& y);

}  // namespace mesh::gbdt
