#include "mesh/metafeatures.hpp"

#include <cmath>

namespace mesh {

namespace {

constexpr double kProbClamp = 1e-15;

struct ColumnMoments {
    double mean = 0.0;
    double stddev = 0.0;
    double skew = 0.0;      // third standardized moment
    double kurtosis = 0.0;  // excess kurtosis
    bool degenerate = false;
};

ColumnMoments column_moments(const std::vector<double>& v) {
    ColumnMoments m;
    const double n = static_cast<double>(v.size());
    for (double x : v) m.mean += x;
    m.mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - m.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    m.stddev = std::sqrt(m2);
    if (m2 <= 0.0) {
        m.degenerate = true;
        return m;
    }
    m.skew = m3 / (m2 * m.stddev);
    m.kurtosis = m4 / (m2 * m2) - 3.0;
    return m;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va <= 0.0 || vb <= 0.0) return std::nan("");
    return cov / std::sqrt(va * vb);
}

}  // namespace

const std::array<std::string, kNumDatasetMetaFeatures>& dataset_metafeature_names() {
    static const std::array<std::string, kNumDatasetMetaFeatures> names = {
        "n_rows",
        "n_cols",
        "log_n_rows",
        "log_n_cols",
        "rows_cols_ratio",
        "class_balance",
        "feature_mean_agg",
        "feature_std_agg",
        "feature_skew_agg",
        "feature_kurtosis_agg",
        "mean_abs_feature_label_corr",
        "mean_pairwise_feature_corr",
        "feature_std_dispersion",
        "label_entropy",
        "majority_baseline_loss",
    };
    return names;
}

DatasetMetaFeatures compute_dataset_metafeatures(const Dataset& ds) {
    ds.validate();
    DatasetMetaFeatures mf;
    const auto& names = dataset_metafeature_names();

    const std::size_t n_train = ds.train_idx.size();
    const std::size_t p = ds.n_cols;

    // Columnized training features and labels.
    std::vector<std::vector<double>> cols(p, std::vector<double>(n_train));
    std::vector<double> y(n_train);
    for (std::size_t t = 0; t < n_train; ++t) {
        const auto row = static_cast<std::size_t>(ds.train_idx[t]);
        for (std::size_t c = 0; c < p; ++c) cols[c][t] = ds.at(row, c);
        y[t] = static_cast<double>(ds.labels[row]);
    }

    mf.values[0] = static_cast<double>(ds.n_rows);
    mf.values[1] = static_cast<double>(ds.n_cols);
    mf.values[2] = std::log(static_cast<double>(ds.n_rows));
    mf.values[3] = std::log(static_cast<double>(ds.n_cols));
    mf.values[4] = static_cast<double>(ds.n_rows) / static_cast<double>(ds.n_cols);

    double pos = 0.0;
    for (double v : y) pos += v;
    const double q = pos / static_cast<double>(n_train);  // positive-class fraction
    const double minority = std::min(q, 1.0 - q);
    mf.values[5] = minority;

    std::vector<ColumnMoments> moments(p);
    double mean_agg = 0.0, std_agg = 0.0, skew_agg = 0.0, kurt_agg = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
        moments[c] = column_moments(cols[c]);
        mean_agg += moments[c].mean;
        std_agg += moments[c].stddev;
        skew_agg += moments[c].skew;
        kurt_agg += moments[c].kurtosis;
        if (moments[c].degenerate) {
            mf.imputed.push_back("column " + std::to_string(c) + " skew/kurtosis");
        }
    }
    const double pd = static_cast<double>(p);
    mf.values[6] = mean_agg / pd;
    mf.values[7] = std_agg / pd;
    mf.values[8] = skew_agg / pd;
    mf.values[9] = kurt_agg / pd;

    double corr_sum = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
        const double r = pearson(cols[c], y);
        if (std::isnan(r)) {
            mf.imputed.push_back("column " + std::to_string(c) + " label correlation");
        } else {
            corr_sum += std::fabs(r);
        }
    }
    mf.values[10] = corr_sum / pd;

    if (p >= 2) {
        double pair_sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a + 1; b < p; ++b) {
                const double r = pearson(cols[a], cols[b]);
                if (std::isnan(r)) {
                    mf.imputed.push_back("pair (" + std::to_string(a) + "," +
                                         std::to_string(b) + ") correlation");
                } else {
                    pair_sum += r;
                }
                ++pairs;
            }
        }
        mf.values[11] = pair_sum / static_cast<double>(pairs);
    } else {
        mf.values[11] = 0.0;
    }

    std::vector<double> stds(p);
    for (std::size_t c = 0; c < p; ++c) stds[c] = moments[c].stddev;
    mf.values[12] = column_moments(stds).stddev;

    double entropy = 0.0;
    if (q > 0.0) entropy -= q * std::log(q);
    if (q < 1.0) entropy -= (1.0 - q) * std::log(1.0 - q);
    mf.values[13] = entropy;

    // Logistic loss of always predicting the majority class outright,
    // probability clamped like every other predicted probability.
    const double p_hit = 1.0 - kProbClamp;
    mf.values[14] = -(1.0 - minority) * std::log(p_hit) - minority * std::log(kProbClamp);

    for (std::size_t i = 0; i < mf.values.size(); ++i) {
        if (!std::isfinite(mf.values[i])) {
            mf.values[i] = 0.0;
            mf.imputed.push_back(names[i]);
        }
    }
    return mf;
}

}  // namespace mesh
