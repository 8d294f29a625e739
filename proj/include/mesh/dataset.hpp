#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mesh {

// Binary-classification dataset with a fixed train/validation split.
struct Dataset {
    std::string id;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> features;  // row-major, n_rows x n_cols
    std::vector<std::uint8_t> labels;
    std::vector<std::int32_t> train_idx;
    std::vector<std::int32_t> val_idx;

    double at(std::size_t row, std::size_t col) const {
        return features[row * n_cols + col];
    }

    // Throws DataError on missing values, non-binary labels, or a split
    // that is overlapping, out of range, or empty on either side.
    void validate() const;

    // CSV with header, last column = label in {0,1}; the sidecar JSON names
    // the dataset id and the train/validation row-index lists:
    //   {"dataset_id": "...", "train": [...], "validation": [...]}
    static Dataset load_csv(const std::string& csv_path, const std::string& split_path);
};

}  // namespace mesh
