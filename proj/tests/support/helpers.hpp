#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <string>
#include <unistd.h>
#include <vector>

#include "mesh/curve_table.hpp"
#include "mesh/dataset.hpp"
#include "mesh/rng.hpp"
#include "mesh/schedule.hpp"
#include "mesh/space.hpp"

namespace mesh::test {

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("mesh_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

// The four-parameter GBDT-style space used throughout the tests.
inline HyperparamSpace xgb_space() {
    return HyperparamSpace({
        {"lambda", ParamKind::Continuous, 1e-3, 1e2, ParamScale::Log},
        {"colsample_bytree", ParamKind::Continuous, 0.3, 1.0, ParamScale::Linear},
        {"max_depth", ParamKind::Integer, 2, 12, ParamScale::Linear},
        {"learning_rate", ParamKind::Continuous, 1e-3, 0.5, ParamScale::Log},
    });
}

// Curve table from a loss matrix: losses[c][i] is config c's loss at round i.
// Config ids are (id_seed, c).
inline LossCurveTable make_table(const std::string& dataset_id, const ResourceSchedule& sched,
                                 const HyperparamSpace& space,
                                 const std::vector<std::vector<double>>& losses,
                                 std::uint64_t id_seed = 0) {
    LossCurveTable table;
    table.dataset_id = dataset_id;
    table.schedule = sched;
    table.space = space;
    const auto configs =
        sample_configurations(space, static_cast<std::int64_t>(losses.size()), id_seed);
    for (std::size_t c = 0; c < losses.size(); ++c) {
        CurveEntry entry;
        entry.config = configs[c];
        for (std::size_t i = 0; i < losses[c].size(); ++i) {
            entry.losses[sched.resources[i]] = losses[c][i];
        }
        table.entries.push_back(std::move(entry));
    }
    table.sort_entries();
    table.validate();
    return table;
}

// Uniform-random loss table over a random schedule; used by the reduction
// and oracle property tests.
inline LossCurveTable random_table(Rng& rng, const HyperparamSpace& space,
                                   ResourceSchedule* sched_out) {
    const double eta = rng.uniform01() < 0.5 ? 2.0 : 3.0;
    const auto r_min = rng.uniform_int(1, 8);
    const int max_smax = eta == 2.0 ? 5 : 3;
    const auto s_max = static_cast<int>(rng.uniform_int(0, max_smax));
    std::int64_t r_max = r_min;
    for (int i = 0; i < s_max; ++i) r_max = static_cast<std::int64_t>(r_max * eta);
    const auto sched = build_schedule(r_min, r_max, eta);

    const auto entry_floor = static_cast<std::int64_t>(std::pow(eta, sched.s_max));
    const auto n = rng.uniform_int(entry_floor, 64);
    std::vector<std::vector<double>> losses(static_cast<std::size_t>(n));
    for (auto& row : losses) {
        row.resize(sched.resources.size());
        for (auto& v : row) v = rng.uniform01();
    }
    *sched_out = sched;
    return make_table("random", sched, space, losses, rng.uniform_int(0, 1 << 20));
}

// Small dense dataset with an explicit split.
inline Dataset make_dataset(const std::string& id,
                            const std::vector<std::vector<double>>& rows,
                            const std::vector<int>& labels,
                            const std::vector<std::int32_t>& train_idx,
                            const std::vector<std::int32_t>& val_idx) {
    Dataset ds;
    ds.id = id;
    ds.n_rows = rows.size();
    ds.n_cols = rows.front().size();
    for (const auto& row : rows) {
        ds.features.insert(ds.features.end(), row.begin(), row.end());
    }
    for (int y : labels) ds.labels.push_back(static_cast<std::uint8_t>(y));
    ds.train_idx = train_idx;
    ds.val_idx = val_idx;
    ds.validate();
    return ds;
}

// Random small binary dataset: two Gaussian blobs plus label noise.
inline Dataset random_dataset(Rng& rng, const std::string& id, std::size_t rows = 60,
                              std::size_t cols = 3) {
    std::vector<std::vector<double>> x(rows, std::vector<double>(cols));
    std::vector<int> y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = rng.uniform01() < 0.5 ? 0 : 1;
        for (std::size_t c = 0; c < cols; ++c) {
            x[r][c] = rng.normal() + (y[r] == 1 ? 1.0 : -1.0) * rng.uniform(0.0, 1.5);
        }
    }
    std::vector<std::int32_t> train_idx, val_idx;
    for (std::size_t r = 0; r < rows; ++r) {
        if (r % 4 == 3) {
            val_idx.push_back(static_cast<std::int32_t>(r));
        } else {
            train_idx.push_back(static_cast<std::int32_t>(r));
        }
    }
    return make_dataset(id, x, y, train_idx, val_idx);
}

}  // namespace mesh::test
