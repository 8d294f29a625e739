#pragma once

#include <array>
#include <string>
#include <vector>

#include "mesh/dataset.hpp"

namespace mesh {

inline constexpr int kNumDatasetMetaFeatures = 15;

// Column order of the dataset meta-feature vector. The layout is versioned
// (kFeatureSetVersion) and recorded in meta-dataset and bundle files.
const std::array<std::string, kNumDatasetMetaFeatures>& dataset_metafeature_names();

struct DatasetMetaFeatures {
    std::array<double, kNumDatasetMetaFeatures> values{};
    // Statistics that were imputed to 0 because a column was degenerate
    // (e.g. constant features); surfaced in logs by callers.
    std::vector<std::string> imputed;
};

// Deterministic 15-vector describing a dataset. Row/column counts describe
// the full dataset; every statistic is computed on the training split only,
// so meta-features never see validation rows.
DatasetMetaFeatures compute_dataset_metafeatures(const Dataset& ds);

}  // namespace mesh
