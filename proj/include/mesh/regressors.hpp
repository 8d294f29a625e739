#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "mesh/gbdt.hpp"

namespace mesh {

// Per-column standardization fitted on training features; constant columns
// keep scale 1 so they standardize to exactly 0.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const std::vector<std::vector<double>>& rows);
    std::vector<double> apply(const std::vector<double>& x) const;
    std::vector<std::vector<double>> apply_all(const std::vector<std::vector<double>>& rows) const;

    nlohmann::json to_json() const;
    static Standardizer from_json(const nlohmann::json& j);
};

// Mean target of the k nearest training points by Euclidean distance;
// distance ties break on the lower training index.
class KnnRegressor {
public:
    KnnRegressor() = default;
    KnnRegressor(int k, std::vector<std::vector<double>> train_x, std::vector<double> train_y);

    double predict(const std::vector<double>& x) const;
    int k() const { return k_; }
    std::size_t train_size() const { return train_y_.size(); }

    nlohmann::json to_json() const;
    static KnnRegressor from_json(const nlohmann::json& j);

private:
    int k_ = 1;
    std::vector<std::vector<double>> train_x_;
    std::vector<double> train_y_;
};

// Native GBDT with the squared-error objective; zero trees predict the
// training-target mean.
class GbdtRegressor {
public:
    struct Params {
        int max_depth = 3;
        std::int64_t rounds = 100;
        double learning_rate = 0.05;
        double lambda = 1.0;
    };

    GbdtRegressor() = default;
    static GbdtRegressor fit(const std::vector<std::vector<double>>& x,
                             const std::vector<double>& y, const Params& params);

    double predict(const std::vector<double>& x) const;
    const gbdt::GbdtModel& model() const { return model_; }

    nlohmann::json to_json() const;
    static GbdtRegressor from_json(const nlohmann::json& j);

private:
    gbdt::GbdtModel model_;
};

// Feed-forward network with rectified hidden layers and a linear output,
// trained by mini-batch gradient descent on the mean squared error.
class MlpRegressor {
public:
    struct Params {
        std::vector<int> hidden = {64, 64};
        int epochs = 200;
        int batch_size = 256;
        double step_size = 1e-3;
        std::uint64_t seed = 0;
    };

    MlpRegressor() = default;
    static MlpRegressor fit(const std::vector<std::vector<double>>& x,
                            const std::vector<double>& y, const Params& params);

    double predict(const std::vector<double>& x) const;

    // Test hooks for gradient checking: the flattened parameter vector and
    // the analytic gradient of the MSE over a batch.
    static MlpRegressor init(int inputs, const Params& params);
    std::vector<double> parameters() const;
    void set_parameters(const std::vector<double>& theta);
    double mse(const std::vector<std::vector<double>>& x, const std::vector<double>& y) const;
    std::vector<double> mse_gradient(const std::vector<std::vector<double>>& x,
                                     const std::vector<double>& y) const;

    nlohmann::json to_json() const;
    static MlpRegressor from_json(const nlohmann::json& j);

private:
    struct Layer {
        int in = 0;
        int out = 0;
        std::vector<double> w;  // row-major, out x in
        std::vector<double> b;
    };

    void forward(const std::vector<double>& x, std::vector<std::vector<double>>& activations) const;
    void sgd_step(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                  const std::vector<std::size_t>& batch, double step);

    std::vector<Layer> layers_;
};

}  // namespace mesh
