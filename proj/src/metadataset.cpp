#include "mesh/metadataset.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "mesh/errors.hpp"
#include "mesh/version.hpp"

namespace mesh {

int MetaDataset::base_width() const {
    return kNumDatasetMetaFeatures + static_cast<int>(space.size());
}

std::vector<std::string> MetaDataset::base_column_names() const {
    std::vector<std::string> names(dataset_metafeature_names().begin(),
                                   dataset_metafeature_names().end());
    for (const auto& p : space.params()) {
        names.push_back("hp_" + p.name);
    }
    return names;
}

MetaDataset build_metadataset(const std::vector<LossCurveTable>& tables,
                              const HyperparamSpace& space, const ResourceSchedule& sched) {
    MetaDataset md;
    md.schedule = sched;
    md.space = space;
    md.per_round.assign(static_cast<std::size_t>(sched.num_rounds()), {});

    std::set<std::string> seen_ids;
    for (const auto& table : tables) {
        if (!seen_ids.insert(table.dataset_id).second) {
            throw DataError("duplicate curve table for dataset '" + table.dataset_id + "'");
        }
        if (table.schedule.resources != sched.resources) {
            throw DataError("curve table for dataset '" + table.dataset_id +
                            "' does not cover the requested schedule");
        }
        if (!table.space.same_layout(space)) {
            throw DataError("curve table for dataset '" + table.dataset_id +
                            "' was sampled from a different space");
        }
        if (!table.dataset_mf.has_value()) {
            throw DataError("curve table for dataset '" + table.dataset_id +
                            "' carries no dataset meta-features");
        }
        table.validate();

        const auto& mf = table.dataset_mf->values;
        for (const auto& entry : table.entries) {
            const auto config_features = space.config_metafeatures(entry.config);
            const double target = entry.losses.at(sched.top_resource());
            for (int i = 0; i <= sched.s_max; ++i) {
                MetaExample ex;
                ex.dataset_id = table.dataset_id;
                ex.config_id = entry.config.id;
                ex.round = i;
                ex.target = target;
                ex.features.reserve(static_cast<std::size_t>(md.width_for_round(i)));
                ex.features.insert(ex.features.end(), mf.begin(), mf.end());
                ex.features.insert(ex.features.end(), config_features.begin(),
                                   config_features.end());
                for (int j = 0; j < i; ++j) {
                    ex.features.push_back(
                        entry.losses.at(sched.resources[static_cast<std::size_t>(j)]));
                }
                md.per_round[static_cast<std::size_t>(i)].push_back(std::move(ex));
            }
        }
        md.provenance.push_back(table.dataset_id);
    }
    return md;
}

void MetaDataset::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write meta-dataset file '" + path + "'");

    nlohmann::json header{
        {"feature_set_version", kFeatureSetVersion},
        {"schedule", {{"r_min", schedule.r_min}, {"r_max", schedule.r_max}, {"eta", schedule.eta}}},
        {"space", space.to_json()},
        {"columns_base", base_column_names()},
        {"landmark_column_prefix", "L"},
        {"provenance", provenance},
        {"tool_version", kToolVersion},
    };
    out << header.dump() << "\n";
    for (const auto& round_examples : per_round) {
        for (const auto& ex : round_examples) {
            nlohmann::json line{{"dataset_id", ex.dataset_id},
                                {"config_id", ex.config_id.str()},
                                {"round", ex.round},
                                {"features", ex.features},
                                {"target", ex.target}};
            out << line.dump() << "\n";
        }
    }
}

MetaDataset MetaDataset::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open meta-dataset file '" + path + "'");

    MetaDataset md;
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> ids;
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
            if (!j.contains("feature_set_version")) {
                throw DataError(path + ": first line must be a meta-dataset header");
            }
            const auto version = j["feature_set_version"].get<std::string>();
            if (version != kFeatureSetVersion) {
                throw DataError(path + ": feature set version '" + version +
                                "' does not match this build's '" + kFeatureSetVersion + "'");
            }
            const auto& sj = j.at("schedule");
            md.schedule = build_schedule(sj.at("r_min").get<std::int64_t>(),
                                         sj.at("r_max").get<std::int64_t>(),
                                         sj.at("eta").get<double>());
            md.space = HyperparamSpace::from_json(j.at("space"));
            md.per_round.assign(static_cast<std::size_t>(md.schedule.num_rounds()), {});
            if (j.contains("provenance")) {
                md.provenance = j["provenance"].get<std::vector<std::string>>();
            }
            continue;
        }
        MetaExample ex;
        ex.dataset_id = j.at("dataset_id").get<std::string>();
        ex.config_id = ConfigId::parse(j.at("config_id").get<std::string>());
        ex.round = j.at("round").get<int>();
        ex.features = j.at("features").get<std::vector<double>>();
        ex.target = j.at("target").get<double>();
        if (ex.round < 0 || ex.round >= md.schedule.num_rounds()) {
            throw DataError(path + ":" + std::to_string(line_no) + ": round " +
                            std::to_string(ex.round) + " outside the schedule");
        }
        if (static_cast<int>(ex.features.size()) != md.width_for_round(ex.round)) {
            throw DataError(path + ":" + std::to_string(line_no) + ": feature width " +
                            std::to_string(ex.features.size()) + " does not match round " +
                            std::to_string(ex.round));
        }
        if (!std::isfinite(ex.target)) {
            throw DataError(path + ":" + std::to_string(line_no) + ": non-finite target");
        }
        ids.insert(ex.dataset_id);
        md.per_round[static_cast<std::size_t>(ex.round)].push_back(std::move(ex));
    }
    if (line_no == 0) throw DataError(path + ": empty meta-dataset file");
    if (md.provenance.empty()) {
        md.provenance.assign(ids.begin(), ids.end());
    }
    return md;
}

}  // namespace mesh
