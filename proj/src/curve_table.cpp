#include "mesh/curve_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mesh/errors.hpp"
#include "mesh/version.hpp"

namespace mesh {

const CurveEntry* LossCurveTable::find(const ConfigId& id) const {
    const auto it = std::lower_bound(
        entries.begin(), entries.end(), id,
        [](const CurveEntry& e, const ConfigId& want) { return e.config.id < want; });
    if (it == entries.end() || !(it->config.id == id)) return nullptr;
    return &*it;
}

double LossCurveTable::final_loss(const CurveEntry& entry) const {
    const auto it = entry.losses.find(schedule.top_resource());
    if (it == entry.losses.end()) {
        throw DataError("table '" + dataset_id + "': config " + entry.config.id.str() +
                        " has no loss at the top resource");
    }
    return it->second;
}

void LossCurveTable::sort_entries() {
    std::sort(entries.begin(), entries.end(), [](const CurveEntry& a, const CurveEntry& b) {
        return a.config.id < b.config.id;
    });
}

void LossCurveTable::validate() const {
    for (const auto& entry : entries) {
        for (std::int64_t r : schedule.resources) {
            const auto it = entry.losses.find(r);
            if (it == entry.losses.end()) {
                throw DataError("table '" + dataset_id + "': config " + entry.config.id.str() +
                                " is missing resource level " + std::to_string(r));
            }
            if (!std::isfinite(it->second)) {
                throw DataError("table '" + dataset_id + "': config " + entry.config.id.str() +
                                " has a non-finite loss at level " + std::to_string(r));
            }
        }
    }
}

void LossCurveTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write table file '" + path + "'");

    nlohmann::json header{
        {"dataset_id", dataset_id},
        {"schedule",
         {{"r_min", schedule.r_min}, {"r_max", schedule.r_max}, {"eta", schedule.eta}}},
        {"space", space.to_json()},
        {"tool_version", kToolVersion},
    };
    if (dataset_mf.has_value()) {
        header["dataset_metafeatures"] = dataset_mf->values;
    }
    if (!experiment_config.is_null()) {
        header["experiment_config"] = experiment_config;
    }
    out << header.dump() << "\n";

    std::vector<const CurveEntry*> ordered;
    ordered.reserve(entries.size());
    for (const auto& e : entries) ordered.push_back(&e);
    std::sort(ordered.begin(), ordered.end(), [](const CurveEntry* a, const CurveEntry* b) {
        return a->config.id < b->config.id;
    });
    for (const CurveEntry* entry : ordered) {
        nlohmann::json losses = nlohmann::json::object();
        for (const auto& [r, loss] : entry->losses) {
            losses[std::to_string(r)] = loss;
        }
        nlohmann::json line{{"config_id", entry->config.id.str()},
                            {"values", space.values_json(entry->config)},
                            {"losses", losses}};
        out << line.dump() << "\n";
    }
}

LossCurveTable LossCurveTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open table file '" + path + "'");

    LossCurveTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        if (line_no == 1) {
            if (!j.contains("dataset_id")) {
                throw DataError(path + ": first line must be a table header");
            }
            table.dataset_id = j["dataset_id"].get<std::string>();
            const auto& sj = j.at("schedule");
            table.schedule = build_schedule(sj.at("r_min").get<std::int64_t>(),
                                            sj.at("r_max").get<std::int64_t>(),
                                            sj.at("eta").get<double>());
            table.space = HyperparamSpace::from_json(j.at("space"));
            if (j.contains("dataset_metafeatures")) {
                DatasetMetaFeatures mf;
                const auto& arr = j["dataset_metafeatures"];
                if (arr.size() != mf.values.size()) {
                    throw DataError(path + ": dataset_metafeatures must have " +
                                    std::to_string(mf.values.size()) + " entries");
                }
                for (std::size_t i = 0; i < mf.values.size(); ++i) {
                    mf.values[i] = arr[i].get<double>();
                }
                table.dataset_mf = mf;
            }
            if (j.contains("experiment_config")) {
                table.experiment_config = j["experiment_config"];
            }
            continue;
        }
        CurveEntry entry;
        const auto id = ConfigId::parse(j.at("config_id").get<std::string>());
        entry.config = table.space.config_from_values(id, j.at("values"));
        for (const auto& [key, value] : j.at("losses").items()) {
            entry.losses[std::stoll(key)] = value.get<double>();
        }
        table.entries.push_back(std::move(entry));
    }
    if (line_no == 0) throw DataError(path + ": empty table file");
    table.sort_entries();
    table.validate();
    return table;
}

}  // namespace mesh
