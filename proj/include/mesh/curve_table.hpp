#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mesh/metafeatures.hpp"
#include "mesh/schedule.hpp"
#include "mesh/space.hpp"

namespace mesh {

struct CurveEntry {
    Configuration config;
    std::map<std::int64_t, double> losses;  // resource level -> validation loss
};

// Validation-loss curves of sampled configurations on one dataset, one loss
// per schedule level. The offline meta-phase consumes these; the replay
// evaluator serves them back.
//
// File format: JSON-lines. The first line is a header record carrying the
// dataset id, schedule, search space, dataset meta-features, tool version
// and the generating experiment config. Each following line is one entry:
//   {"config_id": "...", "values": {...}, "losses": {"16": 0.41, ...}}
struct LossCurveTable {
    std::string dataset_id;
    ResourceSchedule schedule;
    HyperparamSpace space;
    std::optional<DatasetMetaFeatures> dataset_mf;
    nlohmann::json experiment_config;  // echoed verbatim into the header
    std::vector<CurveEntry> entries;   // kept sorted by config id

    const CurveEntry* find(const ConfigId& id) const;
    double final_loss(const CurveEntry& entry) const;

    void sort_entries();
    // Every entry must cover every schedule level with finite losses.
    void validate() const;

    void save(const std::string& path) const;
    static LossCurveTable load(const std::string& path);
};

}  // namespace mesh
