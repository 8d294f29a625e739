#include "mesh/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mesh/errors.hpp"

namespace mesh {

namespace {

double parse_cell(const std::string& cell, const std::string& path, std::size_t line) {
    if (cell.empty()) {
        throw DataError(path + ":" + std::to_string(line) + ": missing value");
    }
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
        throw DataError(path + ":" + std::to_string(line) + ": cannot parse '" + cell + "'");
    }
    return v;
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::vector<std::int32_t> parse_index_list(const nlohmann::json& j, const std::string& key,
                                           const std::string& path) {
    if (!j.contains(key) || !j[key].is_array()) {
        throw DataError(path + ": split file needs an integer array '" + key + "'");
    }
    std::vector<std::int32_t> idx;
    for (const auto& v : j[key]) idx.push_back(v.get<std::int32_t>());
    return idx;
}

}  // namespace

void Dataset::validate() const {
    if (n_rows == 0 || n_cols == 0) {
        throw DataError("dataset '" + id + "' is empty");
    }
    if (features.size() != n_rows * n_cols || labels.size() != n_rows) {
        throw DataError("dataset '" + id + "' has inconsistent dimensions");
    }
    for (double v : features) {
        if (!std::isfinite(v)) {
            throw DataError("dataset '" + id + "' contains non-finite feature values");
        }
    }
    for (auto y : labels) {
        if (y != 0 && y != 1) {
            throw DataError("dataset '" + id + "' has non-binary labels");
        }
    }
    if (train_idx.empty() || val_idx.empty()) {
        throw DataError("dataset '" + id + "' needs non-empty train and validation splits");
    }
    std::set<std::int32_t> seen;
    for (auto i : train_idx) {
        if (i < 0 || static_cast<std::size_t>(i) >= n_rows) {
            throw DataError("dataset '" + id + "' train index out of range: " + std::to_string(i));
        }
        seen.insert(i);
    }
    for (auto i : val_idx) {
        if (i < 0 || static_cast<std::size_t>(i) >= n_rows) {
            throw DataError("dataset '" + id + "' validation index out of range: " +
                            std::to_string(i));
        }
        if (seen.count(i)) {
            throw DataError("dataset '" + id + "' train/validation splits overlap at row " +
                            std::to_string(i));
        }
    }
}

Dataset Dataset::load_csv(const std::string& csv_path, const std::string& split_path) {
    std::ifstream in(csv_path);
    if (!in) throw DataError("cannot open dataset file '" + csv_path + "'");

    Dataset ds;
    std::string line;
    if (!std::getline(in, line)) throw DataError(csv_path + ": empty file");
    const auto header = split_commas(line);
    if (header.size() < 2) {
        throw DataError(csv_path + ": need at least one feature column and a label column");
    }
    ds.n_cols = header.size() - 1;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != header.size()) {
            throw DataError(csv_path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
            ds.features.push_back(parse_cell(cells[c], csv_path, line_no));
        }
        const double y = parse_cell(cells.back(), csv_path, line_no);
        if (y != 0.0 && y != 1.0) {
            throw DataError(csv_path + ":" + std::to_string(line_no) +
                            ": label must be 0 or 1");
        }
        ds.labels.push_back(static_cast<std::uint8_t>(y));
        ++ds.n_rows;
    }

    std::ifstream sin(split_path);
    if (!sin) throw DataError("cannot open split file '" + split_path + "'");
    nlohmann::json sj;
    try {
        sin >> sj;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("invalid JSON in split file '" + split_path + "': " + e.what());
    }
    if (!sj.contains("dataset_id") || !sj["dataset_id"].is_string()) {
        throw DataError(split_path + ": split file needs a string 'dataset_id'");
    }
    ds.id = sj["dataset_id"].get<std::string>();
    ds.train_idx = parse_index_list(sj, "train", split_path);
    ds.val_idx = parse_index_list(sj, "validation", split_path);

    ds.validate();
    return ds;
}

}  // namespace mesh
