#include "mesh/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "mesh/errors.hpp"
#include "mesh/loss.hpp"
#include "mesh/rng.hpp"

namespace mesh::synth {

namespace {

constexpr const char* kSynthPrefix = "synth:";

std::map<std::string, std::string> parse_query(const std::string& query,
                                               const std::string& uri) {
    std::map<std::string, std::string> kv;
    std::size_t pos = 0;
    while (pos < query.size()) {
        auto amp = query.find('&', pos);
        if (amp == std::string::npos) amp = query.size();
        const auto pair = query.substr(pos, amp - pos);
        const auto eq = pair.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError("malformed synth spec '" + uri + "'");
        }
        kv[pair.substr(0, eq)] = pair.substr(eq + 1);
        pos = amp + 1;
    }
    return kv;
}

double to_double(const std::string& s, const std::string& uri) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw ConfigError("malformed number '" + s + "' in synth spec '" + uri + "'");
    }
}

}  // namespace

bool is_synth_path(const std::string& path) {
    return path.rfind(kSynthPrefix, 0) == 0;
}

ClassificationSpec ClassificationSpec::parse(const std::string& uri) {
    if (!is_synth_path(uri)) throw ConfigError("not a synth spec: '" + uri + "'");
    const auto body = uri.substr(std::string(kSynthPrefix).size());
    const auto qmark = body.find('?');
    const auto kind = body.substr(0, qmark);
    if (kind != "cls") {
        throw ConfigError("unknown synth kind '" + kind + "' in '" + uri + "'");
    }
    ClassificationSpec spec;
    if (qmark != std::string::npos) {
        for (const auto& [key, value] : parse_query(body.substr(qmark + 1), uri)) {
            if (key == "rows") {
                spec.rows = static_cast<std::size_t>(to_double(value, uri));
            } else if (key == "cols") {
                spec.cols = static_cast<std::size_t>(to_double(value, uri));
            } else if (key == "seed") {
                spec.seed = static_cast<std::uint64_t>(to_double(value, uri));
            } else if (key == "sep") {
                spec.separation = to_double(value, uri);
            } else if (key == "flip") {
                spec.flip = to_double(value, uri);
            } else if (key == "balance") {
                spec.balance = to_double(value, uri);
            } else if (key == "val_fraction") {
                spec.val_fraction = to_double(value, uri);
            } else if (key == "id") {
                spec.id = value;
            } else {
                throw ConfigError("unknown synth option '" + key + "' in '" + uri + "'");
            }
        }
    }
    if (spec.rows < 8) throw ConfigError("synth cls needs rows >= 8");
    if (spec.cols < 1) throw ConfigError("synth cls needs cols >= 1");
    if (!(spec.balance > 0.0 && spec.balance < 1.0)) {
        throw ConfigError("synth cls balance must be in (0, 1)");
    }
    if (!(spec.val_fraction > 0.0 && spec.val_fraction < 1.0)) {
        throw ConfigError("synth cls val_fraction must be in (0, 1)");
    }
    if (spec.id.empty()) spec.id = "synth-cls-" + std::to_string(spec.seed);
    return spec;
}

Dataset make_classification(const ClassificationSpec& spec) {
    Rng rng(mix_seed(spec.seed, 0xC1A55));
    Dataset ds;
    ds.id = spec.id;
    ds.n_rows = spec.rows;
    ds.n_cols = spec.cols;
    ds.features.resize(spec.rows * spec.cols);

    std::vector<double> w(spec.cols);
    double norm = 0.0;
    for (auto& v : w) {
        v = rng.normal();
        norm += v * v;
    }
    norm = std::sqrt(std::max(norm, 1e-12));
    for (auto& v : w) v /= norm;
    const double intercept = std::log(spec.balance / (1.0 - spec.balance));

    ds.labels.resize(spec.rows);
    for (std::size_t r = 0; r < spec.rows; ++r) {
        double logit = intercept;
        for (std::size_t c = 0; c < spec.cols; ++c) {
            const double x = rng.normal();
            ds.features[r * spec.cols + c] = x;
            logit += spec.separation * w[c] * x;
        }
        std::uint8_t y = rng.uniform01() < sigmoid(logit) ? 1 : 0;
        if (spec.flip > 0.0 && rng.uniform01() < spec.flip) y = 1 - y;
        ds.labels[r] = y;
    }

    std::vector<std::int32_t> order(spec.rows);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const auto n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(spec.val_fraction * static_cast<double>(spec.rows))));
    ds.val_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    ds.train_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(ds.val_idx.begin(), ds.val_idx.end());
    std::sort(ds.train_idx.begin(), ds.train_idx.end());
    ds.validate();
    return ds;
}

Dataset load_dataset_path(const std::string& path) {
    if (is_synth_path(path)) {
        return make_classification(ClassificationSpec::parse(path));
    }
    std::string split_path = path;
    const auto dot = split_path.rfind(".csv");
    if (dot == split_path.size() - 4) {
        split_path = split_path.substr(0, dot) + ".split.json";
    } else {
        split_path += ".split.json";
    }
    return Dataset::load_csv(path, split_path);
}

namespace {

// Position of each parameter value inside its sampling domain, in [0, 1].
double domain_position(const ParamDef& p, double v) {
    if (p.scale == ParamScale::Log) {
        return (std::log(v) - std::log(p.lower)) / (std::log(p.upper) - std::log(p.lower));
    }
    return (v - p.lower) / (p.upper - p.lower);
}

DatasetMetaFeatures synthesize_metafeatures(std::uint64_t dataset_seed) {
    Rng rng(mix_seed(dataset_seed, 0x3F3F));
    DatasetMetaFeatures mf;
    const double n_rows = std::floor(rng.uniform(120.0, 5000.0));
    const double n_cols = std::floor(rng.uniform(3.0, 50.0));
    const double balance = rng.uniform(0.08, 0.5);
    mf.values[0] = n_rows;
    mf.values[1] = n_cols;
    mf.values[2] = std::log(n_rows);
    mf.values[3] = std::log(n_cols);
    mf.values[4] = n_rows / n_cols;
    mf.values[5] = balance;
    mf.values[6] = rng.uniform(-1.0, 1.0);   // aggregated feature mean
    mf.values[7] = rng.uniform(0.5, 2.0);    // aggregated feature std
    mf.values[8] = rng.uniform(-0.5, 0.5);   // aggregated skew
    mf.values[9] = rng.uniform(-0.5, 1.0);   // aggregated excess kurtosis
    mf.values[10] = rng.uniform(0.05, 0.6);  // mean |feature-label corr|
    mf.values[11] = rng.uniform(-0.1, 0.4);  // mean pairwise feature corr
    mf.values[12] = rng.uniform(0.0, 0.5);   // feature std dispersion
    mf.values[13] = -(balance * std::log(balance) + (1.0 - balance) * std::log(1.0 - balance));
    mf.values[14] = -(1.0 - balance) * std::log(1.0 - kProbEps) - balance * std::log(kProbEps);
    return mf;
}

}  // namespace

LossCurveTable make_crossover_table(const CurveFamilySpec& spec, const HyperparamSpace& space,
                                    const ResourceSchedule& sched) {
    if (spec.n_configs < 1) throw ConfigError("curve family needs n_configs >= 1");

    LossCurveTable table;
    table.dataset_id = spec.dataset_id.empty()
                           ? "synthcurve-" + std::to_string(spec.dataset_seed)
                           : spec.dataset_id;
    table.schedule = sched;
    table.space = space;
    table.dataset_mf = synthesize_metafeatures(spec.dataset_seed);

    const auto configs = sample_configurations(space, spec.n_configs, spec.dataset_seed);
    static const double kWeights[] = {0.4, 0.1, 0.2, 0.3};
    const double kappa = std::max(0.0, 1.0 + 1.55 * spec.severity);

    for (const auto& config : configs) {
        // Parameter-driven quality share.
        double weighted = 0.0;
        double weight_sum = 0.0;
        for (std::size_t k = 0; k < space.size(); ++k) {
            const double w = kWeights[k % 4];
            weighted += w * domain_position(space.params()[k], config.values[k]);
            weight_sum += w;
        }
        const double s = weighted / weight_sum;
        const double u =
            Rng(mix_seed(spec.dataset_seed, config.id.index, 0xC0FFEE)).uniform01();
        const double quality = spec.config_signal * s + (1.0 - spec.config_signal) * u;

        const double final_loss = spec.base_loss + spec.loss_spread * quality;
        const double drop =
            spec.drop_floor + kappa * spec.loss_spread * (1.0 - quality);

        CurveEntry entry;
        entry.config = config;
        for (int j = 0; j <= sched.s_max; ++j) {
            const double c_j =
                sched.s_max == 0 ? 0.0
                                 : 1.0 - static_cast<double>(j) / static_cast<double>(sched.s_max);
            const double sigma = spec.noise0 * std::pow(spec.noise_decay, j);
            const double noise =
                sigma * Rng(mix_seed(spec.dataset_seed, config.id.index, 1000 + j)).normal();
            const double loss = final_loss + c_j * drop + noise;
            entry.losses[sched.resources[static_cast<std::size_t>(j)]] = std::max(loss, 1e-4);
        }
        table.entries.push_back(std::move(entry));
    }
    table.sort_entries();
    return table;
}

}  // namespace mesh::synth
