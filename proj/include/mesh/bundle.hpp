#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mesh/curve_table.hpp"
#include "mesh/metafeatures.hpp"
#include "mesh/space.hpp"

namespace mesh {

// One meta-model per ladder round. At round i the tuner hands the bundle the
// dataset meta-features, the configuration, and the observed losses at the
// rounds named by landmark_rounds(i); the bundle answers with a predicted
// top-resource validation loss used only for ranking.
class MetaModelBundle {
public:
    virtual ~MetaModelBundle() = default;

    virtual bool covers(int round) const = 0;

    // Rounds whose observed losses round-i prediction consumes. Trained
    // bundles use rounds 0..i-1; the passthrough baseline also reads round i.
    virtual std::vector<int> landmark_rounds(int round) const = 0;

    virtual double predict(int round, const DatasetMetaFeatures* dataset_mf,
                           const HyperparamSpace& space, const Configuration& config,
                           const std::vector<double>& landmarks) const = 0;

    // Dataset ids the bundle was trained on; empty for baselines.
    virtual const std::vector<std::string>& provenance() const;

    virtual std::string describe() const = 0;
};

// Degenerate bundle that returns the latest observed loss; under it the
// meta-driven tuner reduces exactly to successive halving.
class PassthroughBundle : public MetaModelBundle {
public:
    bool covers(int) const override { return true; }
    std::vector<int> landmark_rounds(int round) const override;
    double predict(int round, const DatasetMetaFeatures*, const HyperparamSpace&,
                   const Configuration&, const std::vector<double>& landmarks) const override;
    std::string describe() const override { return "passthrough"; }
};

// Answers with the true top-resource loss looked up from a replay table;
// the idealized upper bound for elimination quality.
class OracleBundle : public MetaModelBundle {
public:
    explicit OracleBundle(std::shared_ptr<const LossCurveTable> table);

    bool covers(int) const override { return true; }
    std::vector<int> landmark_rounds(int) const override { return {}; }
    double predict(int round, const DatasetMetaFeatures*, const HyperparamSpace&,
                   const Configuration& config, const std::vector<double>&) const override;
    std::string describe() const override { return "oracle"; }

private:
    std::shared_ptr<const LossCurveTable> table_;
};

}  // namespace mesh
