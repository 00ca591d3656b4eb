#pragma once

#include <cstdint>
#include <string>

#include "ppg/distribution.hpp"
#include "ppg/features.hpp"
#include "ppg/signal.hpp"

namespace ppg {

// Multinomial logistic regression over the extracted features, with the
// training-split normalization baked in so predict-time scaling always
// matches what training saw.
struct ClassifierModel {
    Eigen::VectorXd feature_means;  // per feature
    Eigen::VectorXd feature_stds;   // 0 flags a constant feature, zeroed at use
    Eigen::MatrixXd weights;        // classes x features
    Eigen::VectorXd biases;         // classes

    Eigen::Index num_classes() const { return weights.rows(); }
    Eigen::Index num_features() const { return weights.cols(); }
};

struct ClassifierTrainConfig {
    double learning_rate = 0.1;
    int epochs = 200;
    int batch_size = 32;
    std::uint64_t seed = 0;
};

struct ClassifierTrainResult {
    ClassifierModel model;
    std::vector<double> epoch_train_loss;  // mean cross-entropy
    std::vector<double> epoch_val_loss;    // empty when no validation set given
    int best_epoch = -1;
};

// Z-scores are winsorized at +/-kMaxNormalizedFeature: near-constant training
// features otherwise map heavily corrupted inputs hundreds of standard
// deviations out, saturating the softmax to exact 0/1 probabilities and
// collapsing every downstream threshold. The bound is far outside anything an
// in-distribution signal produces.
inline constexpr double kMaxNormalizedFeature = 8.0;

Eigen::VectorXd normalize_features(const ClassifierModel& model,
                                   const Eigen::VectorXd& features);

// Seeded minibatch SGD on cross-entropy. When a validation set is given the
// epoch with the lowest validation loss wins; otherwise the final epoch's
// weights are returned.
ClassifierTrainResult train_classifier(const Dataset& train,
                                       const Dataset& validation,
                                       const ClassifierTrainConfig& config);

PredictiveDistribution predict_features(const ClassifierModel& model,
                                        const Eigen::VectorXd& features);
PredictiveDistribution predict(const ClassifierModel& model, const Signal& signal);

double cross_entropy(const PredictiveDistribution& p, int label);

// Versioned binary with the feature schema hash embedded: loading a model
// trained against a different extractor fails with a schema error instead
// of quietly scoring garbage.
void save_classifier(const std::string& path, const ClassifierModel& model);
ClassifierModel load_classifier(const std::string& path);

}  // namespace ppg
