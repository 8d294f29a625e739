#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mesh/curve_table.hpp"
#include "mesh/metafeatures.hpp"
#include "mesh/schedule.hpp"
#include "mesh/space.hpp"

namespace mesh {

// One regression example of the offline phase: features are dataset
// meta-features + configuration meta-features + the landmarking losses of
// rounds 0..round-1; the target is the top-resource validation loss.
struct MetaExample {
    std::vector<double> features;
    double target = 0.0;
    std::string dataset_id;
    ConfigId config_id;
    int round = 0;
};

struct MetaDataset {
    ResourceSchedule schedule;
    HyperparamSpace space;
    std::vector<std::string> provenance;             // source dataset ids
    std::vector<std::vector<MetaExample>> per_round;  // [round][example]

    // 15 dataset meta-features + one column per space parameter; round-i
    // examples then append i landmark columns.
    int base_width() const;
    int width_for_round(int round) const { return base_width() + round; }

    std::vector<std::string> base_column_names() const;

    void save(const std::string& path) const;  // JSON-lines with header record
    static MetaDataset load(const std::string& path);
};

// Builds per-round examples from complete curve tables. Every table must
// cover the schedule exactly and carry dataset meta-features; mismatches are
// rejected naming the dataset id.
MetaDataset build_metadataset(const std::vector<LossCurveTable>& tables,
                              const HyperparamSpace& space, const ResourceSchedule& sched);

}  // namespace mesh
