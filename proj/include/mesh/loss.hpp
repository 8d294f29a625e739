#pragma once

#include <cstdint>
#include <vector>

namespace mesh {

// Probability clamp used everywhere a probability meets a logarithm.
inline constexpr double kProbEps = 1e-15;

double sigmoid(double margin);

// Mean of -[y*ln(p) + (1-y)*ln(1-p)] with p clamped to [kProbEps, 1-kProbEps].
// Throws ContractViolation on length mismatch.
double logistic_loss(const std::vector<double>& labels, const std::vector<double>& probs);
double logistic_loss(const std::vector<std::uint8_t>& labels, const std::vector<double>& probs);

// Same loss evaluated on margins (log-odds) instead of probabilities.
double logistic_loss_from_margins(const std::vector<double>& labels,
                                  const std::vector<double>& margins);

}  // namespace mesh
