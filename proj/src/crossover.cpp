#include "mesh/crossover.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mesh/errors.hpp"

namespace mesh {

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw ContractViolation("spearman: length mismatch");
    }
    if (a.size() < 2) return std::nullopt;
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        const double da = ra[i] - ma;
        const double db = rb[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va <= 0.0 || vb <= 0.0) return std::nullopt;
    return cov / std::sqrt(va * vb);
}

std::vector<CrossoverRow> crossover_stats(const LossCurveTable& table) {
    table.validate();
    std::vector<double> final_losses;
    final_losses.reserve(table.entries.size());
    for (const auto& entry : table.entries) {
        final_losses.push_back(entry.losses.at(table.schedule.top_resource()));
    }
    std::vector<CrossoverRow> rows;
    for (int i = 0; i <= table.schedule.s_max; ++i) {
        CrossoverRow row;
        row.round = i;
        row.resource = table.schedule.resources[static_cast<std::size_t>(i)];
        std::vector<double> losses;
        losses.reserve(table.entries.size());
        for (const auto& entry : table.entries) {
            losses.push_back(entry.losses.at(row.resource));
        }
        row.rank_correlation = spearman(losses, final_losses);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace mesh
