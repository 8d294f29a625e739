#include "mesh/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mesh/errors.hpp"
#include "mesh/loss.hpp"
#include "mesh/rng.hpp"

namespace mesh::gbdt {

namespace {

constexpr double kMinSplitGain = 1e-12;
constexpr double kBaseScoreClamp = 5.0;

double squared_loss(const std::vector<double>& y, const std::vector<double>& pred) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = pred[i] - y[i];
        total += d * d;
    }
    return total / static_cast<double>(y.size());
}

}  // namespace

ColMatrix ColMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    ColMatrix m;
    m.rows = rows.size();
    m.cols = rows.empty() ? 0 : rows.front().size();
    m.data.resize(m.rows * m.cols);
    for (std::size_t r = 0; r < m.rows; ++r) {
        if (rows[r].size() != m.cols) {
            throw ContractViolation("ColMatrix::from_rows: ragged rows");
        }
        for (std::size_t c = 0; c < m.cols; ++c) {
            m.data[c * m.rows + r] = rows[r][c];
        }
    }
    return m;
}

double Tree::predict(const std::vector<double>& x) const {
    std::int32_t node = 0;
    while (nodes[node].feature >= 0) {
        const auto& n = nodes[node];
        node = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[node].weight;
}

double Tree::predict_col(const ColMatrix& m, std::size_t row) const {
    std::int32_t node = 0;
    while (nodes[node].feature >= 0) {
        const auto& n = nodes[node];
        node = m.at(row, static_cast<std::size_t>(n.feature)) < n.threshold ? n.left : n.right;
    }
    return nodes[node].weight;
}

namespace {

nlohmann::json node_to_json(const Tree& tree, std::int32_t id) {
    const auto& n = tree.nodes[id];
    if (n.feature < 0) {
        return nlohmann::json{{"weight", n.weight}};
    }
    return nlohmann::json{{"feature", n.feature},
                          {"threshold", n.threshold},
                          {"left", node_to_json(tree, n.left)},
                          {"right", node_to_json(tree, n.right)}};
}

std::int32_t node_from_json(const nlohmann::json& j, Tree& tree) {
    const auto id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("weight")) {
        tree.nodes[id].weight = j["weight"].get<double>();
        return id;
    }
    tree.nodes[id].feature = j.at("feature").get<std::int32_t>();
    tree.nodes[id].threshold = j.at("threshold").get<double>();
    const auto left = node_from_json(j.at("left"), tree);
    const auto right = node_from_json(j.at("right"), tree);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
}

}  // namespace

nlohmann::json Tree::to_json() const { return node_to_json(*this, 0); }

Tree Tree::from_json(const nlohmann::json& j) {
    Tree tree;
    node_from_json(j, tree);
    return tree;
}

Hyperparams Hyperparams::from_config(const HyperparamSpace& space, const Configuration& config) {
    space.check(config);
    Hyperparams hp;
    const auto need = [&](const char* name) {
        const int idx = space.index_of(name);
        if (idx < 0) {
            throw ConfigError(std::string("search space is missing required param '") + name +
                              "'");
        }
        return config.values[static_cast<std::size_t>(idx)];
    };
    hp.lambda = need("lambda");
    hp.colsample_bytree = need("colsample_bytree");
    hp.max_depth = static_cast<int>(need("max_depth"));
    hp.learning_rate = need("learning_rate");
    return hp;
}

double GbdtModel::predict_margin(const std::vector<double>& x) const {
    double margin = base_score;
    for (const auto& tree : trees) {
        margin += hp.learning_rate * tree.predict(x);
    }
    return margin;
}

double GbdtModel::predict_value(const std::vector<double>& x) const {
    const double margin = predict_margin(x);
    return objective == Objective::Logistic ? sigmoid(margin) : margin;
}

nlohmann::json GbdtModel::to_json() const {
    nlohmann::json trees_json = nlohmann::json::array();
    for (const auto& tree : trees) trees_json.push_back(tree.to_json());
    return nlohmann::json{
        {"objective", objective == Objective::Logistic ? "logistic" : "squared_error"},
        {"lambda", hp.lambda},
        {"colsample_bytree", hp.colsample_bytree},
        {"max_depth", hp.max_depth},
        {"learning_rate", hp.learning_rate},
        {"base_score", base_score},
        {"trees", trees_json}};
}

GbdtModel GbdtModel::from_json(const nlohmann::json& j) {
    GbdtModel model;
    const auto obj = j.at("objective").get<std::string>();
    if (obj == "logistic") {
        model.objective = Objective::Logistic;
    } else if (obj == "squared_error") {
        model.objective = Objective::SquaredError;
    } else {
        throw DataError("unknown objective '" + obj + "'");
    }
    model.hp.lambda = j.at("lambda").get<double>();
    model.hp.colsample_bytree = j.at("colsample_bytree").get<double>();
    model.hp.max_depth = j.at("max_depth").get<int>();
    model.hp.learning_rate = j.at("learning_rate").get<double>();
    model.base_score = j.at("base_score").get<double>();
    for (const auto& tj : j.at("trees")) model.trees.push_back(Tree::from_json(tj));
    return model;
}

TrainData TrainData::from_dataset(const Dataset& ds) {
    ds.validate();
    TrainData data;
    const std::size_t n_train = ds.train_idx.size();
    const std::size_t n_val = ds.val_idx.size();
    data.train_x.rows = n_train;
    data.train_x.cols = ds.n_cols;
    data.train_x.data.resize(n_train * ds.n_cols);
    data.val_x.rows = n_val;
    data.val_x.cols = ds.n_cols;
    data.val_x.data.resize(n_val * ds.n_cols);
    data.train_y.resize(n_train);
    data.val_y.resize(n_val);
    for (std::size_t t = 0; t < n_train; ++t) {
        const auto row = static_cast<std::size_t>(ds.train_idx[t]);
        for (std::size_t c = 0; c < ds.n_cols; ++c) {
            data.train_x.data[c * n_train + t] = ds.at(row, c);
        }
        data.train_y[t] = static_cast<double>(ds.labels[row]);
    }
    for (std::size_t t = 0; t < n_val; ++t) {
        const auto row = static_cast<std::size_t>(ds.val_idx[t]);
        for (std::size_t c = 0; c < ds.n_cols; ++c) {
            data.val_x.data[c * n_val + t] = ds.at(row, c);
        }
        data.val_y[t] = static_cast<double>(ds.labels[row]);
    }
    data.build_sorted();
    return data;
}

TrainData TrainData::from_rows(const std::vector<std::vector<double>>& x,
                               const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw ContractViolation("TrainData::from_rows: feature/target length mismatch");
    }
    TrainData data;
    data.train_x = ColMatrix::from_rows(x);
    data.train_y = y;
    data.build_sorted();
    return data;
}

void TrainData::build_sorted() {
    sorted.assign(train_x.cols, {});
    for (std::size_t c = 0; c < train_x.cols; ++c) {
        auto& order = sorted[c];
        order.resize(train_x.rows);
        std::iota(order.begin(), order.end(), 0);
        const double* values = train_x.col(c);
        std::stable_sort(order.begin(), order.end(), [values](std::int32_t a, std::int32_t b) {
            return values[a] < values[b];
        });
    }
}

double base_score_for(Objective objective, const std::vector<double>& y) {
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    if (objective == Objective::SquaredError) return mean;
    // Log-odds of the training-label mean, clamped so a pure class cannot
    // produce an infinite margin.
    if (mean <= 0.0) return -kBaseScoreClamp;
    if (mean >= 1.0) return kBaseScoreClamp;
    return std::clamp(std::log(mean / (1.0 - mean)), -kBaseScoreClamp, kBaseScoreClamp);
}

Trainer::Trainer(std::shared_ptr<const TrainData> data, Options opts, const GbdtModel* warm_from)
    : data_(std::move(data)), opts_(opts) {
    if (data_->train_y.empty()) {
        throw DataError("gbdt training requires a non-empty train split");
    }
    model_.objective = opts_.objective;
    model_.hp = opts_.hp;
    model_.base_score = base_score_for(opts_.objective, data_->train_y);
    train_margin_.assign(data_->train_y.size(), model_.base_score);
    val_margin_.assign(data_->val_y.size(), model_.base_score);
    record_losses();
    if (warm_from != nullptr) {
        // Replaying the warm model's trees reproduces the margin updates a
        // cold run would have made, in the same order.
        for (const auto& tree : warm_from->trees) {
            model_.trees.push_back(tree);
            apply_tree(tree);
            record_losses();
        }
    }
}

std::int64_t Trainer::advance_to(std::int64_t rounds) {
    std::int64_t fitted = 0;
    std::vector<double> grad(data_->train_y.size());
    std::vector<double> hess(data_->train_y.size());
    while (trained_rounds() < rounds) {
        const std::int64_t tree_index = trained_rounds();
        compute_gradients(grad, hess, tree_index + 1);
        Tree tree = fit_tree(tree_index, grad, hess);
        model_.trees.push_back(tree);
        apply_tree(tree);
        record_losses();
        ++fitted;
    }
    return fitted;
}

double Trainer::val_loss_at(std::int64_t round) const {
    if (!has_validation()) {
        throw ContractViolation("trainer has no validation split");
    }
    if (round < 0 || round >= static_cast<std::int64_t>(val_loss_history_.size())) {
        throw ContractViolation("validation loss not recorded for round " +
                                std::to_string(round));
    }
    return val_loss_history_[static_cast<std::size_t>(round)];
}

double Trainer::train_loss_at(std::int64_t round) const {
    if (round < 0 || round >= static_cast<std::int64_t>(train_loss_history_.size())) {
        throw ContractViolation("training loss not recorded for round " + std::to_string(round));
    }
    return train_loss_history_[static_cast<std::size_t>(round)];
}

void Trainer::record_losses() {
    if (opts_.objective == Objective::Logistic) {
        train_loss_history_.push_back(logistic_loss_from_margins(data_->train_y, train_margin_));
        if (has_validation()) {
            val_loss_history_.push_back(logistic_loss_from_margins(data_->val_y, val_margin_));
        }
    } else {
        train_loss_history_.push_back(squared_loss(data_->train_y, train_margin_));
        if (has_validation()) {
            val_loss_history_.push_back(squared_loss(data_->val_y, val_margin_));
        }
    }
}

void Trainer::apply_tree(const Tree& tree) {
    const double lr = opts_.hp.learning_rate;
    for (std::size_t t = 0; t < train_margin_.size(); ++t) {
        train_margin_[t] += lr * tree.predict_col(data_->train_x, t);
    }
    for (std::size_t t = 0; t < val_margin_.size(); ++t) {
        val_margin_[t] += lr * tree.predict_col(data_->val_x, t);
    }
}

void Trainer::compute_gradients(std::vector<double>& grad, std::vector<double>& hess,
                                std::int64_t round) const {
    double g_total = 0.0;
    double h_total = 0.0;
    if (opts_.objective == Objective::Logistic) {
        for (std::size_t t = 0; t < grad.size(); ++t) {
            const double p = sigmoid(train_margin_[t]);
            grad[t] = p - data_->train_y[t];
            hess[t] = p * (1.0 - p);
            g_total += grad[t];
            h_total += hess[t];
        }
    } else {
        for (std::size_t t = 0; t < grad.size(); ++t) {
            grad[t] = train_margin_[t] - data_->train_y[t];
            hess[t] = 1.0;
            g_total += grad[t];
            h_total += 1.0;
        }
    }
    if (!std::isfinite(g_total) || !std::isfinite(h_total)) {
        throw NumericalError("non-finite gradients at round " + std::to_string(round));
    }
}

namespace {

struct FrontierNode {
    std::int32_t node = 0;
    double g_sum = 0.0;
    double h_sum = 0.0;
    std::int32_t count = 0;
};

struct SplitAccumulator {
    double g_left = 0.0;
    double h_left = 0.0;
    std::int32_t count_left = 0;
    double last_value = 0.0;
    bool has_last = false;
};

struct BestSplit {
    double gain = kMinSplitGain;
    std::int32_t feature = -1;
    double threshold = 0.0;
    double g_left = 0.0;
    double h_left = 0.0;
    std::int32_t count_left = 0;
};

double leaf_objective(double g, double h, double lambda) { return g * g / (h + lambda); }

}  // namespace

Tree Trainer::fit_tree(std::int64_t tree_index, const std::vector<double>& grad,
                       const std::vector<double>& hess) {
    const auto& data = *data_;
    const std::size_t n = data.train_y.size();
    const std::size_t p = data.train_x.cols;
    const double lambda = opts_.hp.lambda;

    // Feature subset of size ceil(colsample * p), redrawn per tree.
    std::vector<std::int32_t> subset;
    const auto want = static_cast<std::size_t>(std::min(
        static_cast<double>(p),
        std::max(1.0, std::ceil(opts_.hp.colsample_bytree * static_cast<double>(p)))));
    if (want >= p) {
        subset.resize(p);
        std::iota(subset.begin(), subset.end(), 0);
    } else {
        std::vector<std::int32_t> pool(p);
        std::iota(pool.begin(), pool.end(), 0);
        Rng rng(mix_seed(opts_.rng_key, static_cast<std::uint64_t>(tree_index)));
        for (std::size_t i = 0; i < want; ++i) {
            const auto j = static_cast<std::size_t>(
                rng.uniform_int(static_cast<std::int64_t>(i),
                                static_cast<std::int64_t>(p) - 1));
            std::swap(pool[i], pool[j]);
        }
        subset.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want));
        std::sort(subset.begin(), subset.end());
    }

    Tree tree;
    tree.nodes.emplace_back();
    std::vector<std::int32_t> node_of(n, 0);
    // Per-node gradient sums, parallel to tree.nodes; needed for leaf weights.
    std::vector<double> node_g{0.0};
    std::vector<double> node_h{0.0};

    FrontierNode root;
    for (std::size_t t = 0; t < n; ++t) {
        root.g_sum += grad[t];
        root.h_sum += hess[t];
    }
    root.count = static_cast<std::int32_t>(n);
    node_g[0] = root.g_sum;
    node_h[0] = root.h_sum;

    std::vector<FrontierNode> frontier{root};
    std::vector<std::int32_t> node_slot;  // node id -> frontier slot, -1 elsewhere

    for (int depth = 0; depth < opts_.hp.max_depth && !frontier.empty(); ++depth) {
        node_slot.assign(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < frontier.size(); ++s) {
            node_slot[static_cast<std::size_t>(frontier[s].node)] = static_cast<std::int32_t>(s);
        }

        std::vector<BestSplit> best(frontier.size());
        std::vector<SplitAccumulator> acc(frontier.size());
        for (std::int32_t f : subset) {
            std::fill(acc.begin(), acc.end(), SplitAccumulator{});
            const double* values = data.train_x.col(static_cast<std::size_t>(f));
            for (std::int32_t idx : data.sorted[static_cast<std::size_t>(f)]) {
                const std::int32_t slot = node_slot[static_cast<std::size_t>(node_of[idx])];
                if (slot < 0) continue;
                auto& a = acc[static_cast<std::size_t>(slot)];
                const double v = values[idx];
                if (a.has_last && v > a.last_value) {
                    const auto& fr = frontier[static_cast<std::size_t>(slot)];
                    const double g_right = fr.g_sum - a.g_left;
                    const double h_right = fr.h_sum - a.h_left;
                    const double gain =
                        0.5 * (leaf_objective(a.g_left, a.h_left, lambda) +
                               leaf_objective(g_right, h_right, lambda) -
                               leaf_objective(fr.g_sum, fr.h_sum, lambda));
                    auto& b = best[static_cast<std::size_t>(slot)];
                    // Strictly-greater comparison keeps the first maximum:
                    // lowest feature index, then lowest threshold.
                    if (gain > b.gain) {
                        b.gain = gain;
                        b.feature = f;
                        b.threshold = 0.5 * (a.last_value + v);
                        b.g_left = a.g_left;
                        b.h_left = a.h_left;
                        b.count_left = a.count_left;
                    }
                }
                a.g_left += grad[idx];
                a.h_left += hess[idx];
                a.count_left += 1;
                a.last_value = v;
                a.has_last = true;
            }
        }

        std::vector<FrontierNode> next;
        for (std::size_t s = 0; s < frontier.size(); ++s) {
            const auto& b = best[s];
            if (b.feature < 0) continue;  // stays a leaf
            const auto& fr = frontier[s];
            const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
            const auto right_id = left_id + 1;
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            node_g.push_back(b.g_left);
            node_h.push_back(b.h_left);
            node_g.push_back(fr.g_sum - b.g_left);
            node_h.push_back(fr.h_sum - b.h_left);
            auto& parent = tree.nodes[static_cast<std::size_t>(fr.node)];
            parent.feature = b.feature;
            parent.threshold = b.threshold;
            parent.left = left_id;
            parent.right = right_id;
            next.push_back({left_id, b.g_left, b.h_left, b.count_left});
            next.push_back({right_id, fr.g_sum - b.g_left, fr.h_sum - b.h_left,
                            fr.count - b.count_left});
        }

        if (!next.empty()) {
            for (std::size_t t = 0; t < n; ++t) {
                auto node = node_of[t];
                while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
                    const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
                    node = data.train_x.at(t, static_cast<std::size_t>(nd.feature)) < nd.threshold
                               ? nd.left
                               : nd.right;
                }
                node_of[t] = node;
            }
        }

        // Children with fewer than 2 rows cannot split again.
        frontier.clear();
        for (const auto& fn : next) {
            if (fn.count >= 2) frontier.push_back(fn);
        }
    }

    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        if (tree.nodes[i].feature < 0) {
            tree.nodes[i].weight = -node_g[i] / (node_h[i] + lambda);
        }
    }
    return tree;
}

GbdtModel train(const Dataset& ds, const HyperparamSpace& space, const Configuration& config,
                std::int64_t rounds, const GbdtModel* warm_from) {
    if (warm_from != nullptr && warm_from->trained_rounds() > rounds) {
        throw ContractViolation("warm model has " + std::to_string(warm_from->trained_rounds()) +
                                " rounds, cannot shrink to " + std::to_string(rounds));
    }
    Trainer::Options opts;
    opts.objective = Objective::Logistic;
    opts.hp = Hyperparams::from_config(space, config);
    opts.rng_key = mix_seed(config.id.seed, config.id.index);
    auto data = std::make_shared<const TrainData>(TrainData::from_dataset(ds));
    Trainer trainer(std::move(data), opts, warm_from);
    trainer.advance_to(rounds);
    return trainer.model();
}

}  // namespace mesh::gbdt
