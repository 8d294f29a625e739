#include "mesh/bundle.hpp"

#include "mesh/errors.hpp"

namespace mesh {

const std::vector<std::string>& MetaModelBundle::provenance() const {
    static const std::vector<std::string> empty;
    return empty;
}

std::vector<int> PassthroughBundle::landmark_rounds(int round) const {
    std::vector<int> rounds;
    rounds.reserve(static_cast<std::size_t>(round) + 1);
    for (int j = 0; j <= round; ++j) rounds.push_back(j);
    return rounds;
}

double PassthroughBundle::predict(int round, const DatasetMetaFeatures*, const HyperparamSpace&,
                                  const Configuration& config,
                                  const std::vector<double>& landmarks) const {
    if (landmarks.size() != static_cast<std::size_t>(round) + 1) {
        throw ContractViolation("passthrough bundle at round " + std::to_string(round) +
                                " expected " + std::to_string(round + 1) +
                                " landmarks for config " + config.id.str());
    }
    return landmarks.back();
}

OracleBundle::OracleBundle(std::shared_ptr<const LossCurveTable> table)
    : table_(std::move(table)) {
    if (table_ == nullptr) throw ContractViolation("oracle bundle needs a table");
}

double OracleBundle::predict(int, const DatasetMetaFeatures*, const HyperparamSpace&,
                             const Configuration& config, const std::vector<double>&) const {
    const CurveEntry* entry = table_->find(config.id);
    if (entry == nullptr) {
        throw DataError("oracle table '" + table_->dataset_id + "' has no config " +
                        config.id.str());
    }
    return table_->final_loss(*entry);
}

}  // namespace mesh
