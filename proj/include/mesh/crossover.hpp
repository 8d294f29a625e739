#pragma once

#include <optional>
#include <vector>

#include "mesh/curve_table.hpp"

namespace mesh {

// Spearman rank correlation with average ranks for ties; absent when either
// side has fewer than two values or no rank variance.
std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b);

struct CrossoverRow {
    int round = 0;
    std::int64_t resource = 0;
    std::optional<double> rank_correlation;  // vs the top-resource losses
};

// Per round, the rank correlation between losses at r_i and losses at the
// top resource. Low or negative early-round values are the crossover
// signature that makes greedy elimination unreliable.
std::vector<CrossoverRow> crossover_stats(const LossCurveTable& table);

}  // namespace mesh
