#include "ppg/distribution.hpp"

#include <cmath>
#include <sstream>

#include "ppg/errors.hpp"

namespace ppg {

void validate_distribution(const PredictiveDistribution& p) {
    if (p.k() < 2) {
        throw ArgumentError("distribution: need at least two outcome probabilities");
    }
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.k(); ++i) {
        const double v = p.probs[i];
        if (!std::isfinite(v) || v < 0.0) {
            std::ostringstream os;
            os << "distribution: probability " << i << " is " << v;
            throw ArgumentError(os.str());
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "distribution: probabilities sum to " << sum << ", expected 1";
        throw ArgumentError(os.str());
    }
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    if (logits.size() == 0) throw ArgumentError("softmax: empty logits");
    const Eigen::ArrayXd shifted = logits.array() - logits.maxCoeff();
    const Eigen::ArrayXd exps = shifted.exp();
    return exps / exps.sum();
}

}  // namespace ppg
