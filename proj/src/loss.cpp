#include "mesh/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mesh/errors.hpp"

namespace mesh {

double sigmoid(double margin) {
    if (margin >= 0.0) {
        return 1.0 / (1.0 + std::exp(-margin));
    }
    const double e = std::exp(margin);
    return e / (1.0 + e);
}

namespace {

double loss_term(double y, double p) {
    const double clamped = std::clamp(p, kProbEps, 1.0 - kProbEps);
    return -(y * std::log(clamped) + (1.0 - y) * std::log(1.0 - clamped));
}

}  // namespace

double logistic_loss(const std::vector<double>& labels, const std::vector<double>& probs) {
    if (labels.size() != probs.size()) {
        throw ContractViolation("logistic_loss: " + std::to_string(labels.size()) +
                                " labels vs " + std::to_string(probs.size()) +
                                " probabilities");
    }
    if (labels.empty()) {
        throw ContractViolation("logistic_loss: empty input");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        total += loss_term(labels[i], probs[i]);
    }
    return total / static_cast<double>(labels.size());
}

double logistic_loss(const std::vector<std::uint8_t>& labels, const std::vector<double>& probs) {
    std::vector<double> y(labels.begin(), labels.end());
    return logistic_loss(y, probs);
}

double logistic_loss_from_margins(const std::vector<double>& labels,
                                  const std::vector<double>& margins) {
    if (labels.size() != margins.size()) {
        throw ContractViolation("logistic_loss_from_margins: length mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        total += loss_term(labels[i], sigmoid(margins[i]));
    }
    return total / static_cast<double>(labels.size());
}

}  // namespace mesh
