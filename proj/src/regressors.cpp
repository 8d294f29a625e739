#include "mesh/regressors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mesh/errors.hpp"
#include "mesh/rng.hpp"

namespace mesh {

namespace {

constexpr double kScaleFloor = 1e-12;

void check_width(std::size_t got, std::size_t want, const char* who) {
    if (got != want) {
        throw ContractViolation(std::string(who) + ": feature width " + std::to_string(got) +
                                ", expected " + std::to_string(want));
    }
}

}  // namespace

Standardizer Standardizer::fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw ContractViolation("Standardizer::fit: no rows");
    const std::size_t width = rows.front().size();
    Standardizer s;
    s.mean.assign(width, 0.0);
    s.scale.assign(width, 1.0);
    const double n = static_cast<double>(rows.size());
    for (const auto& row : rows) {
        check_width(row.size(), width, "Standardizer::fit");
        for (std::size_t c = 0; c < width; ++c) s.mean[c] += row[c];
    }
    for (std::size_t c = 0; c < width; ++c) s.mean[c] /= n;
    std::vector<double> var(width, 0.0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < width; ++c) {
            const double d = row[c] - s.mean[c];
            var[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < width; ++c) {
        const double sd = std::sqrt(var[c] / n);
        s.scale[c] = sd > kScaleFloor ? sd : 1.0;
    }
    return s;
}

std::vector<double> Standardizer::apply(const std::vector<double>& x) const {
    check_width(x.size(), mean.size(), "Standardizer::apply");
    std::vector<double> out(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) out[c] = (x[c] - mean[c]) / scale[c];
    return out;
}

std::vector<std::vector<double>> Standardizer::apply_all(
    const std::vector<std::vector<double>>& rows) const {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(apply(row));
    return out;
}

nlohmann::json Standardizer::to_json() const {
    return nlohmann::json{{"mean", mean}, {"std", scale}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
    Standardizer s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.scale = j.at("std").get<std::vector<double>>();
    return s;
}

KnnRegressor::KnnRegressor(int k, std::vector<std::vector<double>> train_x,
                           std::vector<double> train_y)
    : k_(k), train_x_(std::move(train_x)), train_y_(std::move(train_y)) {
    if (k_ < 1) throw ContractViolation("knn requires k >= 1");
    if (train_x_.size() != train_y_.size() || train_x_.empty()) {
        throw ContractViolation("knn requires matching, non-empty training data");
    }
}

double KnnRegressor::predict(const std::vector<double>& x) const {
    check_width(x.size(), train_x_.front().size(), "KnnRegressor::predict");
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(train_x_.size());
    for (std::size_t i = 0; i < train_x_.size(); ++i) {
        double d2 = 0.0;
        const auto& row = train_x_[i];
        for (std::size_t c = 0; c < row.size(); ++c) {
            const double d = row[c] - x[c];
            d2 += d * d;
        }
        dist.emplace_back(d2, i);
    }
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(k_), dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += train_y_[dist[i].second];
    return sum / static_cast<double>(k);
}

nlohmann::json KnnRegressor::to_json() const {
    return nlohmann::json{{"k", k_}, {"train_x", train_x_}, {"train_y", train_y_}};
}

KnnRegressor KnnRegressor::from_json(const nlohmann::json& j) {
    return KnnRegressor(j.at("k").get<int>(),
                        j.at("train_x").get<std::vector<std::vector<double>>>(),
                        j.at("train_y").get<std::vector<double>>());
}

GbdtRegressor GbdtRegressor::fit(const std::vector<std::vector<double>>& x,
                                 const std::vector<double>& y, const Params& params) {
    gbdt::Trainer::Options opts;
    opts.objective = gbdt::Objective::SquaredError;
    opts.hp.lambda = params.lambda;
    opts.hp.colsample_bytree = 1.0;
    opts.hp.max_depth = params.max_depth;
    opts.hp.learning_rate = params.learning_rate;
    auto data = std::make_shared<const gbdt::TrainData>(gbdt::TrainData::from_rows(x, y));
    gbdt::Trainer trainer(std::move(data), opts);
    trainer.advance_to(params.rounds);
    GbdtRegressor reg;
    reg.model_ = trainer.model();
    return reg;
}

double GbdtRegressor::predict(const std::vector<double>& x) const {
    return model_.predict_value(x);
}

nlohmann::json GbdtRegressor::to_json() const { return model_.to_json(); }

GbdtRegressor GbdtRegressor::from_json(const nlohmann::json& j) {
    GbdtRegressor reg;
    reg.model_ = gbdt::GbdtModel::from_json(j);
    return reg;
}

MlpRegressor MlpRegressor::init(int inputs, const Params& params) {
    if (inputs < 1) throw ContractViolation("mlp requires at least one input");
    MlpRegressor mlp;
    Rng rng(mix_seed(params.seed, 0x4d4c50));
    std::vector<int> sizes;
    sizes.push_back(inputs);
    for (int h : params.hidden) sizes.push_back(h);
    sizes.push_back(1);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Layer layer;
        layer.in = sizes[l];
        layer.out = sizes[l + 1];
        layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
        layer.b.assign(static_cast<std::size_t>(layer.out), 0.0);
        const double sd = std::sqrt(2.0 / static_cast<double>(layer.in));
        for (auto& w : layer.w) w = sd * rng.normal();
        mlp.layers_.push_back(std::move(layer));
    }
    return mlp;
}

void MlpRegressor::forward(const std::vector<double>& x,
                           std::vector<std::vector<double>>& activations) const {
    activations.clear();
    activations.push_back(x);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& layer = layers_[l];
        const auto& in = activations.back();
        check_width(in.size(), static_cast<std::size_t>(layer.in), "MlpRegressor::forward");
        std::vector<double> out(static_cast<std::size_t>(layer.out));
        for (int o = 0; o < layer.out; ++o) {
            double z = layer.b[static_cast<std::size_t>(o)];
            const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) z += wrow[i] * in[static_cast<std::size_t>(i)];
            // rectified hidden layers, linear output
            out[static_cast<std::size_t>(o)] =
                (l + 1 < layers_.size() && z < 0.0) ? 0.0 : z;
        }
        activations.push_back(std::move(out));
    }
}

double MlpRegressor::predict(const std::vector<double>& x) const {
    std::vector<std::vector<double>> acts;
    forward(x, acts);
    return acts.back().front();
}

double MlpRegressor::mse(const std::vector<std::vector<double>>& x,
                         const std::vector<double>& y) const {
    if (x.size() != y.size() || x.empty()) {
        throw ContractViolation("MlpRegressor::mse: bad batch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = predict(x[i]) - y[i];
        total += d * d;
    }
    return total / static_cast<double>(x.size());
}

std::vector<double> MlpRegressor::parameters() const {
    std::vector<double> theta;
    for (const auto& layer : layers_) {
        theta.insert(theta.end(), layer.w.begin(), layer.w.end());
        theta.insert(theta.end(), layer.b.begin(), layer.b.end());
    }
    return theta;
}

void MlpRegressor::set_parameters(const std::vector<double>& theta) {
    std::size_t pos = 0;
    for (auto& layer : layers_) {
        for (auto& w : layer.w) w = theta.at(pos++);
        for (auto& b : layer.b) b = theta.at(pos++);
    }
    if (pos != theta.size()) {
        throw ContractViolation("MlpRegressor::set_parameters: length mismatch");
    }
}

std::vector<double> MlpRegressor::mse_gradient(const std::vector<std::vector<double>>& x,
                                               const std::vector<double>& y) const {
    if (x.size() != y.size() || x.empty()) {
        throw ContractViolation("MlpRegressor::mse_gradient: bad batch");
    }
    // Gradient accumulators mirroring the layer layout.
    std::vector<Layer> grads;
    for (const auto& layer : layers_) {
        Layer g;
        g.in = layer.in;
        g.out = layer.out;
        g.w.assign(layer.w.size(), 0.0);
        g.b.assign(layer.b.size(), 0.0);
        grads.push_back(std::move(g));
    }

    std::vector<std::vector<double>> acts;
    const double inv_n = 1.0 / static_cast<double>(x.size());
    for (std::size_t s = 0; s < x.size(); ++s) {
        forward(x[s], acts);
        // d(MSE)/d(pred) for this sample
        std::vector<double> delta{2.0 * inv_n * (acts.back().front() - y[s])};
        for (std::size_t l = layers_.size(); l-- > 0;) {
            const Layer& layer = layers_[l];
            const auto& in = acts[l];
            const auto& out = acts[l + 1];
            std::vector<double> next_delta(static_cast<std::size_t>(layer.in), 0.0);
            for (int o = 0; o < layer.out; ++o) {
                double d = delta[static_cast<std::size_t>(o)];
                // ReLU gate on hidden layers (derivative 0 at the kink).
                if (l + 1 < layers_.size() && out[static_cast<std::size_t>(o)] <= 0.0) {
                    d = 0.0;
                }
                if (d == 0.0) continue;
                grads[l].b[static_cast<std::size_t>(o)] += d;
                double* grow = grads[l].w.data() + static_cast<std::size_t>(o) * layer.in;
                const double* wrow = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
                for (int i = 0; i < layer.in; ++i) {
                    grow[i] += d * in[static_cast<std::size_t>(i)];
                    next_delta[static_cast<std::size_t>(i)] += d * wrow[i];
                }
            }
            delta = std::move(next_delta);
        }
    }

    std::vector<double> flat;
    for (const auto& g : grads) {
        flat.insert(flat.end(), g.w.begin(), g.w.end());
        flat.insert(flat.end(), g.b.begin(), g.b.end());
    }
    return flat;
}

void MlpRegressor::sgd_step(const std::vector<std::vector<double>>& x,
                            const std::vector<double>& y,
                            const std::vector<std::size_t>& batch, double step) {
    std::vector<std::vector<double>> bx;
    std::vector<double> by;
    bx.reserve(batch.size());
    by.reserve(batch.size());
    for (auto i : batch) {
        bx.push_back(x[i]);
        by.push_back(y[i]);
    }
    const auto grad = mse_gradient(bx, by);
    auto theta = parameters();
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= step * grad[i];
    set_parameters(theta);
}

MlpRegressor MlpRegressor::fit(const std::vector<std::vector<double>>& x,
                               const std::vector<double>& y, const Params& params) {
    if (x.size() != y.size() || x.empty()) {
        throw ContractViolation("MlpRegressor::fit: bad training data");
    }
    MlpRegressor mlp = init(static_cast<int>(x.front().size()), params);
    Rng rng(mix_seed(params.seed, 0x53474400));
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    const auto batch_size = static_cast<std::size_t>(std::max(1, params.batch_size));
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const auto end = std::min(order.size(), start + batch_size);
            std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
            mlp.sgd_step(x, y, batch, params.step_size);
        }
    }
    return mlp;
}

nlohmann::json MlpRegressor::to_json() const {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : layers_) {
        // weight matrices serialized row-major
        layers.push_back(nlohmann::json{
            {"in", layer.in}, {"out", layer.out}, {"w", layer.w}, {"b", layer.b}});
    }
    return nlohmann::json{{"layers", layers}};
}

MlpRegressor MlpRegressor::from_json(const nlohmann::json& j) {
    MlpRegressor mlp;
    for (const auto& lj : j.at("layers")) {
        Layer layer;
        layer.in = lj.at("in").get<int>();
        layer.out = lj.at("out").get<int>();
        layer.w = lj.at("w").get<std::vector<double>>();
        layer.b = lj.at("b").get<std::vector<double>>();
        if (layer.w.size() != static_cast<std::size_t>(layer.in) * layer.out ||
            layer.b.size() != static_cast<std::size_t>(layer.out)) {
            throw DataError("malformed mlp layer");
        }
        mlp.layers_.push_back(std::move(layer));
    }
    if (mlp.layers_.empty()) throw DataError("mlp with no layers");
    return mlp;
}

}  // namespace mesh
