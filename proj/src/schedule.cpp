#include "mesh/schedule.hpp"

#include <cmath>
#include <string>

#include "mesh/errors.hpp"

namespace mesh {

namespace {

// Guard against representation error before flooring values that are exact
// in real arithmetic (e.g. 16 * 2^6).
constexpr double kFloorGuard = 1e-9;

}  // namespace

ResourceSchedule build_schedule(std::int64_t r_min, std::int64_t r_max, double eta) {
    if (r_min < 1) {
        throw ConfigError("r_min must be >= 1, got " + std::to_string(r_min));
    }
    if (r_max < r_min) {
        throw ConfigError("r_max must be >= r_min, got r_max=" + std::to_string(r_max) +
                          " with r_min=" + std::to_string(r_min));
    }
    if (!(eta > 1.0)) {
        throw ConfigError("eta must be > 1, got " + std::to_string(eta));
    }

    ResourceSchedule sched;
    sched.r_min = r_min;
    sched.r_max = r_max;
    sched.eta = eta;
    for (int i = 0;; ++i) {
        const double exact = static_cast<double>(r_min) * std::pow(eta, i);
        if (exact > static_cast<double>(r_max) + kFloorGuard) break;
        sched.resources.push_back(static_cast<std::int64_t>(std::floor(exact + kFloorGuard)));
    }
    sched.s_max = static_cast<int>(sched.resources.size()) - 1;
    return sched;
}

std::vector<std::int64_t> cohort_sizes(std::int64_t n, const ResourceSchedule& sched) {
    const double entry = std::pow(sched.eta, sched.s_max);
    if (static_cast<double>(n) + kFloorGuard < entry) {
        throw ConfigError("n=" + std::to_string(n) + " is below eta^s_max=" +
                          std::to_string(entry) +
                          "; the ladder requires n >= eta^s_max");
    }
    std::vector<std::int64_t> sizes;
    sizes.reserve(sched.resources.size());
    for (int i = 0; i <= sched.s_max; ++i) {
        const double exact = static_cast<double>(n) * std::pow(sched.eta, -i);
        sizes.push_back(static_cast<std::int64_t>(std::floor(exact + kFloorGuard)));
    }
    return sizes;
}

std::int64_t equivalent_rs_budget(std::int64_t n, const ResourceSchedule& sched) {
    const auto sizes = cohort_sizes(n, sched);
    std::int64_t total = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        total += sizes[i] * sched.resources[i];
    }
    return total / sched.r_max;
}

}  // namespace mesh
