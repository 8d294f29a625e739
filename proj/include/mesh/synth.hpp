#pragma once

#include <cstdint>
#include <string>

#include "mesh/curve_table.hpp"
#include "mesh/dataset.hpp"
#include "mesh/schedule.hpp"
#include "mesh/space.hpp"

namespace mesh::synth {

// Linear-logit binary classification data: iid standard-normal features,
// labels drawn from sigmoid(separation * w.x + intercept), optional label
// flips. Addressable from the CLI as a dataset path:
//   synth:cls?rows=400&cols=8&seed=1&sep=1.5&flip=0.02&balance=0.5
struct ClassificationSpec {
    std::string id;  // defaults to "synth-cls-<seed>"
    std::size_t rows = 400;
    std::size_t cols = 8;
    std::uint64_t seed = 0;
    double separation = 1.5;
    double flip = 0.0;
    double balance = 0.5;
    double val_fraction = 0.25;

    static ClassificationSpec parse(const std::string& uri);  // throws ConfigError
};

Dataset make_classification(const ClassificationSpec& spec);

bool is_synth_path(const std::string& path);

// Loads a CSV dataset (sidecar split file at "<stem>.split.json") or
// materializes a synth: specification.
Dataset load_dataset_path(const std::string& path);

// Parametric loss-curve family with controllable crossover: each sampled
// configuration carries a latent quality; its top-resource loss is affine in
// that quality while early-round losses mix in an anticorrelated component
// scaled by `severity`. Landmarks identify the quality progressively, so the
// family exercises exactly the failure mode greedy elimination has and the
// meta-models are meant to fix. Losses decrease along the ladder and carry
// per-level noise that shrinks with the resource.
struct CurveFamilySpec {
    std::string dataset_id;  // defaults to "synthcurve-<seed>"
    std::uint64_t dataset_seed = 0;
    std::int64_t n_configs = 64;
    // > 0 anticorrelates early rounds with the final ranking; <= -0.65 makes
    // rankings consistent across rounds.
    double severity = 0.9;

    double base_loss = 0.22;
    double loss_spread = 0.30;
    double drop_floor = 0.03;
    double noise0 = 0.025;
    double noise_decay = 0.45;
    // Fraction of a configuration's quality explained by its parameters;
    // the rest is latent until landmarks reveal it.
    double config_signal = 0.35;
};

LossCurveTable make_crossover_table(const CurveFamilySpec& spec, const HyperparamSpace& space,
                                    const ResourceSchedule& sched);

}  // namespace mesh::synth
