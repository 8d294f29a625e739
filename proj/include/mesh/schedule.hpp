#pragma once

#include <cstdint>
#include <vector>

namespace mesh {

// Geometric resource ladder for successive halving: resource levels
// r_i = r_min * eta^i for i = 0..s_max, with s_max = floor(log_eta(r_max/r_min)).
// Resource values are rounded down to integers (boosting rounds are integral).
struct ResourceSchedule {
    std::int64_t r_min = 1;
    std::int64_t r_max = 1;
    double eta = 2.0;
    int s_max = 0;
    std::vector<std::int64_t> resources;  // r_i for i = 0..s_max

    int num_rounds() const { return static_cast<int>(resources.size()); }
    std::int64_t top_resource() const { return resources.back(); }
};

// Throws ConfigError naming the offending field on invalid bounds.
ResourceSchedule build_schedule(std::int64_t r_min, std::int64_t r_max, double eta);

// Cohort sizes n_i = floor(n * eta^-i). Requires n >= eta^s_max, mirroring
// the ladder's entry condition; throws ConfigError otherwise.
std::vector<std::int64_t> cohort_sizes(std::int64_t n, const ResourceSchedule& sched);

// Number of max-resource evaluations with the same total resource as one
// halving run: floor(sum_i n_i*r_i / r_max).
std::int64_t equivalent_rs_budget(std::int64_t n, const ResourceSchedule& sched);

}  // namespace mesh
