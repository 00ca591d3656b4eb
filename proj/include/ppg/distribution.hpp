#pragma once

#include <Eigen/Dense>

namespace ppg {

// A categorical predictive distribution p(y|x) over K >= 2 outcomes.
struct PredictiveDistribution {
    Eigen::VectorXd probs;

    Eigen::Index k() const { return probs.size(); }
};

// Throws an argument error unless probs has K >= 2, every entry is finite
// and nonnegative, and the entries sum to 1 within 1e-9.
void validate_distribution(const PredictiveDistribution& p);

// Numerically stable softmax (max-shifted before exponentiation).
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

}  // namespace ppg
