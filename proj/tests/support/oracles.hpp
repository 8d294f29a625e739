#pragma once

// Independent reference implementations the tests check the library
// against. Everything here is deliberately naive: enumeration, full sorts
// and finite differences, sharing no code with the implementation paths
// they verify.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <vector>

#include "mesh/space.hpp"

namespace mesh::test {

// Mean target of the k nearest points by squared Euclidean distance,
// distance ties broken by lower index; full sort, no shortcuts.
inline double brute_knn(const std::vector<std::vector<double>>& train_x,
                        const std::vector<double>& train_y, const std::vector<double>& q,
                        std::size_t k) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < train_x.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < q.size(); ++c) {
            const double d = train_x[i][c] - q[c];
            d2 += d * d;
        }
        all.emplace_back(d2, i);
    }
    std::sort(all.begin(), all.end());
    k = std::min(k, all.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += train_y[all[i].second];
    return sum / static_cast<double>(k);
}

// Indices of the k smallest scores via a full stable sort on (score, id).
inline std::vector<std::size_t> top_k_oracle(const std::vector<double>& scores,
                                             const std::vector<ConfigId>& ids, std::size_t k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return ids[a] < ids[b];
    });
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

// One-sample Kolmogorov-Smirnov statistic against the uniform CDF on
// [lo, hi].
inline double ks_uniform(std::vector<double> samples, double lo, double hi) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double stat = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = (samples[i] - lo) / (hi - lo);
        stat = std::max(stat, std::fabs(static_cast<double>(i) / n - cdf));
        stat = std::max(stat, std::fabs(static_cast<double>(i + 1) / n - cdf));
    }
    return stat;
}

// Central finite differences of f at theta.
template <typename F>
std::vector<double> central_differences(F&& f, std::vector<double> theta, double h = 1e-5) {
    std::vector<double> grad(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double keep = theta[i];
        theta[i] = keep + h;
        const double up = f(theta);
        theta[i] = keep - h;
        const double down = f(theta);
        theta[i] = keep;
        grad[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

// Scratch depth-limited regression-tree boosting for tiny datasets
// (exhaustive split search). Mirrors the documented split rules: midpoint
// thresholds between distinct values, first strict gain maximum wins with
// features ascending then thresholds ascending, leaves weighted
// -G/(H+lambda), margins updated by learning_rate * weight.
struct NaiveBoost {
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        double weight = 0.0;
        std::unique_ptr<Node> left, right;
    };

    std::vector<std::vector<double>> x;  // row-major
    std::vector<double> y;
    double lambda = 1.0;
    double learning_rate = 0.3;
    int max_depth = 2;
    std::vector<double> margins;

    void init_base() {
        double mean = 0.0;
        for (double v : y) mean += v;
        mean /= static_cast<double>(y.size());
        double base = 0.0;
        if (mean <= 0.0) {
            base = -5.0;
        } else if (mean >= 1.0) {
            base = 5.0;
        } else {
            base = std::clamp(std::log(mean / (1.0 - mean)), -5.0, 5.0);
        }
        margins.assign(y.size(), base);
    }

    static double leaf_term(double g, double h, double lambda) { return g * g / (h + lambda); }

    std::unique_ptr<Node> build(const std::vector<std::size_t>& rows,
                                const std::vector<double>& g, const std::vector<double>& h,
                                int depth) {
        double g_sum = 0.0, h_sum = 0.0;
        for (auto r : rows) {
            g_sum += g[r];
            h_sum += h[r];
        }
        auto node = std::make_unique<Node>();
        node->weight = -g_sum / (h_sum + lambda);
        if (depth >= max_depth || rows.size() < 2) return node;

        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;
        for (std::size_t f = 0; f < x.front().size(); ++f) {
            auto sorted = rows;
            std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                return x[a][f] < x[b][f];
            });
            double gl = 0.0, hl = 0.0;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                gl += g[sorted[i]];
                hl += h[sorted[i]];
                if (x[sorted[i + 1]][f] > x[sorted[i]][f]) {
                    const double gain = 0.5 * (leaf_term(gl, hl, lambda) +
                                               leaf_term(g_sum - gl, h_sum - hl, lambda) -
                                               leaf_term(g_sum, h_sum, lambda));
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = static_cast<int>(f);
                        best_threshold = 0.5 * (x[sorted[i]][f] + x[sorted[i + 1]][f]);
                    }
                }
            }
        }
        if (best_feature < 0) return node;

        node->feature = best_feature;
        node->threshold = best_threshold;
        std::vector<std::size_t> left_rows, right_rows;
        for (auto r : rows) {
            (x[r][static_cast<std::size_t>(best_feature)] < best_threshold ? left_rows
                                                                           : right_rows)
                .push_back(r);
        }
        node->left = build(left_rows, g, h, depth + 1);
        node->right = build(right_rows, g, h, depth + 1);
        return node;
    }

    static double predict(const Node& node, const std::vector<double>& row) {
        if (node.feature < 0) return node.weight;
        return predict(row[static_cast<std::size_t>(node.feature)] < node.threshold
                           ? *node.left
                           : *node.right,
                       row);
    }

    void boost_round() {
        std::vector<double> g(y.size()), h(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double p = 1.0 / (1.0 + std::exp(-margins[i]));
            g[i] = p - y[i];
            h[i] = p * (1.0 - p);
        }
        std::vector<std::size_t> rows(y.size());
        std::iota(rows.begin(), rows.end(), 0);
        const auto tree = build(rows, g, h, 0);
        for (std::size_t i = 0; i < y.size(); ++i) {
            margins[i] += learning_rate * predict(*tree, x[i]);
        }
    }
};

}  // namespace mesh::test
